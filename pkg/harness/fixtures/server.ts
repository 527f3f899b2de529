/**
 * Locally served fixture sites, routed by Host header:
 *
 *   fixture-one.test  - OneTrust-style CMP, consent recorded server-side;
 *                       seeds exactly 2 violations after reject-all
 *                       (_ga keeps flowing though rejected; zx_track is
 *                       never declared). The menu control is a plain
 *                       footer link, so the harness must find it with
 *                       the ranked button model.
 *   fixture-bot.test  - Cookiebot-style CMP with a mapped Customize
 *                       control and the four fixed categories.
 *   tracker.test      - third-party pixel/frame host, sets no cookies.
 *   nobanner.test     - no CMP at all.
 */

import express, { Express, Request, Response } from "express";
import { AddressInfo } from "net";

const GIF = Buffer.from("R0lGODlhAQABAIAAAAAAAP///yH5BAEAAAAALAAAAAABAAEAAAIBRAA7", "base64");

function page(title: string, body: string): string {
  return `<!DOCTYPE html><html><head><title>${title}</title></head><body>${body}</body></html>`;
}

function fixtureOne(app: Express): void {
  const setSiteCookies = (res: Response) => {
    res.append("Set-Cookie", "sess=k3State7; Path=/");
    res.append("Set-Cookie", "_ga=GA1.2.778899001.166778899; Path=/");
    res.append("Set-Cookie", "zx_track=8f14e45fceea167a5a36dedd4bea2543; Path=/");
  };
  const nav = `
    <nav>
      <a href="/news">News</a>
      <a href="/about">About Us</a>
      <a href="/contact">Contact</a>
      <a href="http://elsewhere.test/promo">Partner offers</a>
    </nav>`;
  const footer = `
    <footer>
      <a href="/privacy">Privacy Policy</a>
      <a class="manage-cookies" href="/cookie-settings">Cookie Settings</a>
      <a href="/terms">Terms of Service</a>
    </footer>`;

  app.get("/", (_req, res) => {
    setSiteCookies(res);
    res.send(
      page(
        "Fixture One",
        `<div id="banner" class="cookie-banner">We value your privacy. This site uses cookies.</div>
         ${nav}
         <main><h1>Welcome</h1>
           <img src="http://tracker.test/pixel.gif">
           <iframe src="http://tracker.test/frame.html"></iframe>
         </main>
         ${footer}`,
      ),
    );
  });
  for (const path of ["/news", "/about", "/contact", "/privacy", "/terms"]) {
    app.get(path, (_req, res) => {
      setSiteCookies(res);
      res.send(page(`Fixture One ${path}`, `${nav}<main><h1>${path}</h1></main>${footer}`));
    });
  }
  app.get("/cookie-settings", (_req, res) => {
    setSiteCookies(res);
    res.send(
      page(
        "Preference Center",
        `<div id="preference-center">
           <h2>Manage Consent Preferences</h2>
           <div class="ot-category" data-category="C0001">Strictly Necessary (always active)</div>
           <div class="ot-category" data-category="C0002">Performance</div>
           <div class="ot-category" data-category="C0003">Targeting</div>
           <a id="onetrust-accept-btn-handler" href="/ot/accept-all">Allow All</a>
           <a id="onetrust-reject-all-handler" href="/ot/reject-all">Reject All</a>
         </div>`,
      ),
    );
  });
  app.get("/ot/reject-all", (_req, res) => {
    res.append(
      "Set-Cookie",
      "OptanonConsent=groups=" +
        encodeURIComponent("C0001:1,C0002:0,C0003:0") +
        "; Path=/",
    );
    res.redirect(302, "/");
  });
  app.get("/ot/accept-all", (_req, res) => {
    res.append(
      "Set-Cookie",
      "OptanonConsent=groups=" +
        encodeURIComponent("C0001:1,C0002:1,C0003:1") +
        "; Path=/",
    );
    res.redirect(302, "/");
  });
  app.get("/ot/en.json", (_req, res) => {
    res.json({
      categories: [
        { category_id: "C0001", label: "Strictly Necessary", rejectable: false },
        { category_id: "C0002", label: "Performance", rejectable: true },
        { category_id: "C0003", label: "Targeting", rejectable: true },
      ],
      declarations: [
        {
          name_pattern: "sess",
          host: "fixture-one.test",
          category_id: "C0001",
          purpose_text: "Keeps your session active",
        },
        {
          name_pattern: "OptanonConsent",
          host: "fixture-one.test",
          category_id: "C0001",
          purpose_text: "Stores the consent preferences",
        },
        {
          name_pattern: "_ga",
          host: "fixture-one.test",
          category_id: "C0002",
          purpose_text: "Google Analytics visitor uid",
        },
      ],
      banner: {
        consent_model: "opt-in",
        banner_position: "bottom",
        consent_lifetime_days: "365",
      },
    });
  });
}

function fixtureBot(app: Express): void {
  const setSiteCookies = (res: Response) => {
    res.append("Set-Cookie", "csrft=Yw3Qp9; Path=/");
    res.append("Set-Cookie", "_fbp=fb.1.1700000123456.194673528; Path=/");
  };
  app.get("/", (_req, res) => {
    setSiteCookies(res);
    res.send(
      page(
        "Fixture Bot",
        `<div id="CybotCookiebotDialog">
           <p>This website uses cookies for preferences, statistics and marketing.</p>
           <a id="CybotCookiebotDialogBodyLevelButtonCustomize" href="/cb/settings">Customize</a>
         </div>
         <nav><a href="/store">Store</a><a href="/support">Support</a></nav>`,
      ),
    );
  });
  for (const path of ["/store", "/support"]) {
    app.get(path, (_req, res) => {
      setSiteCookies(res);
      res.send(page(`Fixture Bot ${path}`, `<main><h1>${path}</h1></main>`));
    });
  }
  app.get("/cb/settings", (_req, res) => {
    setSiteCookies(res);
    res.send(
      page(
        "Consent Settings",
        `<div id="CybotCookiebotDialogDetail">
           <div class="cb-category">Necessary (required)</div>
           <div class="cb-category">Preferences</div>
           <div class="cb-category">Statistics</div>
           <div class="cb-category">Marketing</div>
           <a id="CybotCookiebotDialogBodyButtonAccept" href="/cb/accept-all">Allow all</a>
           <a id="CybotCookiebotDialogBodyButtonDecline" href="/cb/reject-all">Deny</a>
         </div>`,
      ),
    );
  });
  const consentValue = (preferences: boolean, statistics: boolean, marketing: boolean) =>
    encodeURIComponent(
      `{stamp:'fixtureCB/2+abc=',necessary:true,preferences:${preferences},` +
        `statistics:${statistics},marketing:${marketing},method:'explicit',ver:1}`,
    );
  app.get("/cb/reject-all", (_req, res) => {
    res.append("Set-Cookie", `CookieConsent=${consentValue(false, false, false)}; Path=/`);
    res.redirect(302, "/");
  });
  app.get("/cb/accept-all", (_req, res) => {
    res.append("Set-Cookie", `CookieConsent=${consentValue(true, true, true)}; Path=/`);
    res.redirect(302, "/");
  });
  app.get("/cb/config.json", (_req, res) => {
    res.json({
      categories: [
        { category_id: "necessary", label: "Necessary", rejectable: false },
        { category_id: "preferences", label: "Preferences", rejectable: true },
        { category_id: "statistics", label: "Statistics", rejectable: true },
        { category_id: "marketing", label: "Marketing", rejectable: true },
        { category_id: "unclassified", label: "Unclassified", rejectable: false },
      ],
      declarations: [
        {
          name_pattern: "csrft",
          host: "fixture-bot.test",
          category_id: "necessary",
          purpose_text: "Request forgery protection",
        },
        {
          name_pattern: "CookieConsent",
          host: "fixture-bot.test",
          category_id: "necessary",
          purpose_text: "Stores the consent state",
        },
        {
          name_pattern: "_fbp",
          host: "fixture-bot.test",
          category_id: "marketing",
          purpose_text: "Meta pixel browser uid",
        },
      ],
      banner: { consent_model: "opt-in", banner_position: "center" },
    });
  });
}

function tracker(app: Express): void {
  app.get("/pixel.gif", (_req, res) => {
    res.type("image/gif").send(GIF);
  });
  app.get("/frame.html", (_req, res) => {
    res.send(
      page("ad frame", `<div class="ad">ad content</div><img src="/pixel.gif">`),
    );
  });
}

function noBanner(app: Express): void {
  app.get("/", (_req, res) => {
    res.append("Set-Cookie", "plain=1; Path=/");
    res.send(
      page(
        "No Banner",
        `<nav><a href="/one">One</a><a href="/two">Two</a></nav><main>Nothing to consent to here.</main>`,
      ),
    );
  });
  for (const path of ["/one", "/two"]) {
    app.get(path, (_req, res) => res.send(page(path, `<main>${path}</main>`)));
  }
}

export interface FixtureServer {
  port: number;
  hostPorts: Map<string, number>;
  close(): Promise<void>;
}

export async function startFixtureServer(port = 0): Promise<FixtureServer> {
  const hosts = new Map<string, Express>();
  for (const [host, install] of [
    ["fixture-one.test", fixtureOne],
    ["fixture-bot.test", fixtureBot],
    ["tracker.test", tracker],
    ["nobanner.test", noBanner],
  ] as Array<[string, (app: Express) => void]>) {
    const sub = express();
    install(sub);
    hosts.set(host, sub);
  }

  const app = express();
  app.use((req: Request, res: Response, next) => {
    const host = (req.headers.host || "").split(":")[0];
    const sub = hosts.get(host);
    if (!sub) {
      res.status(421).send("unknown fixture host");
      return;
    }
    sub(req, res, next);
  });

  return new Promise((resolve) => {
    const server = app.listen(port, "127.0.0.1", () => {
      const bound = (server.address() as AddressInfo).port;
      const hostPorts = new Map<string, number>();
      for (const host of hosts.keys()) hostPorts.set(host, bound);
      resolve({
        port: bound,
        hostPorts,
        close: () =>
          new Promise<void>((done, fail) =>
            server.close((err) => (err ? fail(err) : done())),
          ),
      });
    });
  });
}
