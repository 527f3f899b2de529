import { startFixtureServer } from "./server";

const port = Number(process.env.PORT || 8199);
startFixtureServer(port).then((server) => {
  console.log(`fixture server listening on 127.0.0.1:${server.port}`);
  console.log(`hosts: ${[...server.hostPorts.keys()].join(", ")}`);
});
