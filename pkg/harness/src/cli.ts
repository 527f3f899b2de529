/**
 * Crawl one site and write a trace file v1.
 *
 *   ts-node src/cli.ts --url http://fixture-one.test/ --region EU \
 *     --setters data/setters.jsonl --model button_model.json \
 *     --host-map fixture-one.test=8199,tracker.test=8199 --out trace.jsonl
 */

import { parseArgs } from "util";
import { crawl } from "./crawl";
import { ForestModel } from "./model";
import { loadSetters } from "./setters";

function parseHostMap(spec: string): Map<string, number> {
  const map = new Map<string, number>();
  for (const entry of spec.split(",")) {
    const [host, port] = entry.split("=");
    if (!host || !port || Number.isNaN(Number(port))) {
      throw new Error(`bad host-map entry: ${entry}`);
    }
    map.set(host.trim(), Number(port));
  }
  return map;
}

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: {
      url: { type: "string" },
      region: { type: "string", default: "EU" },
      iteration: { type: "string", default: "1" },
      timeout: { type: "string", default: "60" },
      "top-k": { type: "string", default: "5" },
      subpages: { type: "string", default: "5" },
      out: { type: "string", default: "trace.jsonl" },
      seed: { type: "string", default: "1" },
      setters: { type: "string" },
      model: { type: "string" },
      "host-map": { type: "string" },
    },
  });
  if (!values.url || !values.setters || !values.model || !values["host-map"]) {
    console.error(
      "usage: cli.ts --url URL --setters FILE --model FILE --host-map host=port[,host=port...]",
    );
    return 2;
  }
  const timeoutSeconds = Number(values.timeout);
  const topK = Number(values["top-k"]);
  if (timeoutSeconds <= 0 || topK < 1) {
    console.error("timeout must be > 0 and top-k >= 1");
    return 2;
  }
  const result = await crawl(
    {
      siteUrl: values.url,
      region: values.region!,
      iteration: Number(values.iteration),
      timeoutSeconds,
      topK,
      subpageCount: Number(values.subpages),
      outputPath: values.out!,
      seed: Number(values.seed),
      hostPorts: parseHostMap(values["host-map"]!),
    },
    await loadSetters(values.setters),
    await ForestModel.load(values.model),
  );
  console.log(JSON.stringify(result, null, 2));
  return result.status === "ok" || result.status === "no_banner" ? 0 : 1;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(String(err));
    process.exit(1);
  },
);
