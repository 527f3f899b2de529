/**
 * HTTP-level browser with network capture: a cookie jar, manual redirect
 * following, subresource and iframe fetching, and a request log that
 * records exactly the cookies attached to each outgoing request (stored
 * but never-sent cookies are invisible here, by construction).
 *
 * Fixture hosts resolve through an explicit host->port map, so crawls
 * stay offline and deterministic.
 */

import * as http from "http";
import { CookieJar } from "./cookies";
import { Candidate, ElementNode, extractCandidates, parseHtml, selectAll } from "./html";
import { Phase } from "./trace";

export class LoadTimeout extends Error {}
export class NavigationError extends Error {}

export interface AttachedCookie {
  name: string;
  domain: string;
  path: string;
  value: string;
  observed_at: number;
  phase: Phase;
}

export interface CapturedRequest {
  request_id: string;
  url: string;
  method: string;
  initiator_frame: string;
  cookies: AttachedCookie[];
}

export interface PageView {
  url: string; // final URL after redirects
  html: string;
  root: ElementNode;
  frames: Array<{ url: string; html: string; root: ElementNode }>;
}

export interface BrowserOptions {
  hostPorts: Map<string, number>;
  timeoutMs: number;
  baseTimestamp?: number;
}

const MAX_REDIRECTS = 5;

export class HttpBrowser {
  readonly jar = new CookieJar();
  readonly requests: CapturedRequest[] = [];
  phase: Phase = "pre_consent";

  private requestCounter = 0;
  private clock: number;

  constructor(private options: BrowserOptions) {
    this.clock = options.baseTimestamp ?? 1700000000000;
  }

  private tick(): number {
    this.clock += 17;
    return this.clock;
  }

  now(): number {
    return this.clock;
  }

  private async rawRequest(
    url: string,
    initiatorFrame: string,
  ): Promise<{ status: number; headers: http.IncomingHttpHeaders; body: Buffer }> {
    const parsed = new URL(url);
    const port = this.options.hostPorts.get(parsed.hostname);
    if (port === undefined) {
      throw new NavigationError(`no route to host ${parsed.hostname}`);
    }
    const requestPath = parsed.pathname + parsed.search;

    // capture happens at send time: these cookies really travel
    const attached = this.jar.cookiesFor(parsed.hostname, parsed.pathname);
    this.requestCounter += 1;
    const captured: CapturedRequest = {
      request_id: `r${this.requestCounter}`,
      url,
      method: "GET",
      initiator_frame: initiatorFrame,
      cookies: attached.map((c) => ({
        name: c.name,
        domain: c.domain,
        path: c.path,
        value: c.value,
        observed_at: this.tick(),
        phase: this.phase,
      })),
    };
    this.requests.push(captured);

    const cookieHeader = this.jar.cookieHeader(parsed.hostname, parsed.pathname);
    const headers: Record<string, string> = { Host: parsed.host };
    if (cookieHeader) headers["Cookie"] = cookieHeader;

    return new Promise((resolve, reject) => {
      const req = http.request(
        {
          host: "127.0.0.1",
          port,
          path: requestPath,
          method: "GET",
          headers,
          setHost: false,
        },
        (res) => {
          const chunks: Buffer[] = [];
          res.on("data", (chunk) => chunks.push(chunk));
          res.on("end", () => {
            const setCookies = res.headers["set-cookie"] || [];
            for (const header of setCookies) {
              this.jar.setFromHeader(header, parsed.hostname, parsed.pathname);
            }
            resolve({
              status: res.statusCode || 0,
              headers: res.headers,
              body: Buffer.concat(chunks),
            });
          });
        },
      );
      req.setTimeout(this.options.timeoutMs, () => {
        req.destroy();
        reject(new LoadTimeout(`timed out loading ${url}`));
      });
      req.on("error", (err) => reject(new NavigationError(`${url}: ${err.message}`)));
      req.end();
    });
  }

  /** GET with redirect following; every hop is captured. */
  async fetch(
    url: string,
    initiatorFrame: string,
  ): Promise<{ url: string; status: number; body: Buffer; contentType: string }> {
    let current = url;
    for (let hop = 0; hop <= MAX_REDIRECTS; hop++) {
      const response = await this.rawRequest(current, initiatorFrame);
      if (
        response.status >= 300 &&
        response.status < 400 &&
        response.headers.location
      ) {
        current = new URL(response.headers.location, current).toString();
        continue;
      }
      return {
        url: current,
        status: response.status,
        body: response.body,
        contentType: String(response.headers["content-type"] || ""),
      };
    }
    throw new NavigationError(`too many redirects from ${url}`);
  }

  /** Load a page as a browser would: document, subresources, one level of
   * iframes. The page itself is the initiator frame for everything. */
  async navigate(url: string): Promise<PageView> {
    const document = await this.fetch(url, url);
    const html = document.body.toString("utf-8");
    const root = parseHtml(html);
    const pageUrl = document.url;
    const frames: PageView["frames"] = [];

    const subresourceUrls: string[] = [];
    for (const tag of ["img", "script"]) {
      for (const node of selectAll(root, tag)) {
        const src = node.attrs["src"];
        if (src) subresourceUrls.push(new URL(src, pageUrl).toString());
      }
    }
    for (const src of subresourceUrls) {
      try {
        await this.fetch(src, pageUrl);
      } catch (err) {
        if (err instanceof LoadTimeout) throw err;
        // unreachable third parties are an observation, not a failure
      }
    }

    for (const frameNode of selectAll(root, "iframe")) {
      const src = frameNode.attrs["src"];
      if (!src) continue;
      try {
        const frameDoc = await this.fetch(new URL(src, pageUrl).toString(), pageUrl);
        const frameHtml = frameDoc.body.toString("utf-8");
        const frameRoot = parseHtml(frameHtml);
        frames.push({ url: frameDoc.url, html: frameHtml, root: frameRoot });
        for (const tag of ["img", "script"]) {
          for (const node of selectAll(frameRoot, tag)) {
            const frameSrc = node.attrs["src"];
            if (!frameSrc) continue;
            try {
              await this.fetch(new URL(frameSrc, frameDoc.url).toString(), pageUrl);
            } catch (err) {
              if (err instanceof LoadTimeout) throw err;
            }
          }
        }
      } catch (err) {
        if (err instanceof LoadTimeout) throw err;
      }
    }
    return { url: pageUrl, html, root, frames };
  }

  /** All visible candidates of a page, main document first. */
  pageCandidates(page: PageView): Candidate[] {
    const candidates = extractCandidates(page.html, 0);
    page.frames.forEach((frame, index) => {
      candidates.push(...extractCandidates(frame.html, index + 1));
    });
    return candidates;
  }
}
