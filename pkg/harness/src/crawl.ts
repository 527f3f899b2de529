/**
 * The crawl procedure: load the homepage, find and open the cookie
 * preference menu (directly via a setter mapping, or by clicking
 * top-k model-ranked candidates and backing out of dead ends), reject
 * every rejectable category, reload, snapshot the recorded consent,
 * then sample same-scope subpages to generate cookie traffic.
 */

import { HttpBrowser, LoadTimeout, NavigationError, PageView } from "./browser";
import { ElementNode, extractLinks, selectOne } from "./html";
import { ForestModel } from "./model";
import { ConsentSetterMapping, SelectorMiss } from "./setters";
import {
  CategoryRecordOut,
  CmpId,
  DeclarationRecordOut,
  TraceRecord,
  normalizeDomain,
  writeTraceAtomic,
} from "./trace";

export interface CrawlJob {
  siteUrl: string;
  region: string;
  iteration: number;
  timeoutSeconds: number; // per page load
  topK: number;
  subpageCount: number;
  outputPath: string;
  seed: number;
  hostPorts: Map<string, number>;
}

export type CrawlStatus =
  | "ok"
  | "no_banner"
  | "consent_not_recorded";

export interface CrawlResult {
  status: CrawlStatus;
  tracePath: string;
  consentCookieValue: string | null;
  clickedCandidates: string[];
  subpagesVisited: string[];
}

interface CookieLibrary {
  categories: CategoryRecordOut[];
  declarations: DeclarationRecordOut[];
  banner: Record<string, string>;
}

/** Deterministic PRNG (mulberry32) so fixture crawls are reproducible. */
export function seededRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function sameScope(consentDomain: string, host: string): boolean {
  return host === consentDomain || host.endsWith("." + consentDomain);
}

function menuOpen(root: ElementNode, setters: ConsentSetterMapping[]): ConsentSetterMapping | null {
  for (const setter of setters) {
    if (selectOne(root, setter.reject_all)) return setter;
  }
  return null;
}

async function fetchLibrary(
  browser: HttpBrowser,
  baseUrl: string,
  setter: ConsentSetterMapping,
): Promise<CookieLibrary> {
  const empty: CookieLibrary = { categories: [], declarations: [], banner: {} };
  if (!setter.library_path) return empty;
  try {
    const response = await browser.fetch(
      new URL(setter.library_path, baseUrl).toString(),
      baseUrl,
    );
    const data = JSON.parse(response.body.toString("utf-8"));
    const categories: CategoryRecordOut[] = (data.categories || []).map(
      (c: { category_id: string; label: string; rejectable: boolean }) => ({
        kind: "category" as const,
        category_id: c.category_id,
        label: c.label,
        rejectable: Boolean(c.rejectable),
        consent_choice: c.rejectable ? ("not_consent" as const) : ("consent" as const),
      }),
    );
    const declarations: DeclarationRecordOut[] = (data.declarations || []).map(
      (d: {
        name_pattern: string;
        host: string;
        category_id: string;
        purpose_text?: string;
        declared_duration?: string;
      }) => ({
        kind: "declaration" as const,
        name_pattern: d.name_pattern,
        host: normalizeDomain(d.host),
        category_id: d.category_id,
        purpose_text: d.purpose_text ?? "",
        declared_duration: d.declared_duration ?? "",
      }),
    );
    const banner: Record<string, string> = {};
    for (const [key, value] of Object.entries(data.banner || {})) {
      banner[key] = String(value);
    }
    return { categories, declarations, banner };
  } catch (err) {
    if (err instanceof LoadTimeout) throw err;
    return empty;
  }
}

/** Consent-enforcement condition: was the reject-all choice recorded? */
export function rejectAllRecorded(
  cmp: CmpId,
  rawValue: string,
  categories: CategoryRecordOut[],
): boolean {
  const decoded = decodeURIComponent(rawValue);
  if (cmp === "onetrust") {
    const groupsMatch = decoded.match(/(?:^|&)groups=([^&]*)/);
    if (!groupsMatch) return false;
    const flags = new Map(
      groupsMatch[1]
        .split(",")
        .map((pair) => pair.split(":") as [string, string]),
    );
    return categories.every((category) =>
      category.rejectable
        ? flags.get(category.category_id) === "0"
        : flags.get(category.category_id) !== "0",
    );
  }
  if (cmp === "cookiebot") {
    return ["preferences", "statistics", "marketing"].every((field) =>
      new RegExp(`["']?${field}["']?\\s*[:=]\\s*false`, "i").test(decoded),
    );
  }
  return false;
}

/**
 * With the menu page open, trip the reject-all control and reload.
 * Returns the recorded consent-cookie value (null when the CMP failed
 * to record anything).
 */
export async function applyConsentRejectAll(
  browser: HttpBrowser,
  menuPage: PageView,
  setter: ConsentSetterMapping,
): Promise<{ rawValue: string | null; domain: string }> {
  const control = selectOne(menuPage.root, setter.reject_all);
  if (!control) {
    throw new SelectorMiss(`reject-all selector ${setter.reject_all} not found`);
  }
  const href = control.attrs["href"];
  if (!href) {
    throw new SelectorMiss(`reject-all control ${setter.reject_all} has no href`);
  }
  await browser.navigate(new URL(href, menuPage.url).toString());
  if (setter.confirm) {
    // layouts with a separate confirm step; absent on the bundled fixtures
    const after = await browser.navigate(menuPage.url);
    const confirm = selectOne(after.root, setter.confirm);
    if (confirm && confirm.attrs["href"]) {
      await browser.navigate(new URL(confirm.attrs["href"], after.url).toString());
    }
  }
  const cookie = browser.jar.get(setter.consent_cookie, new URL(menuPage.url).hostname);
  return {
    rawValue: cookie ? cookie.value : null,
    domain: cookie ? cookie.domain : new URL(menuPage.url).hostname,
  };
}

export async function crawl(
  job: CrawlJob,
  setters: ConsentSetterMapping[],
  model: ForestModel,
): Promise<CrawlResult> {
  const browser = new HttpBrowser({
    hostPorts: job.hostPorts,
    timeoutMs: job.timeoutSeconds * 1000,
  });
  const site = normalizeDomain(new URL(job.siteUrl).hostname);
  const clicked: string[] = [];

  browser.phase = "pre_consent";
  const homepage = await browser.navigate(job.siteUrl);

  // 1. find a mapped menu control directly, otherwise click ranked buttons
  let setter: ConsentSetterMapping | null = null;
  let menuPage: PageView | null = null;
  for (const mapping of setters) {
    const control = selectOne(homepage.root, mapping.open_menu);
    if (control && control.attrs["href"]) {
      setter = mapping;
      menuPage = await browser.navigate(
        new URL(control.attrs["href"], homepage.url).toString(),
      );
      break;
    }
  }
  if (!menuPage) {
    const ranked = model.rank(browser.pageCandidates(homepage));
    for (const { candidate } of ranked.slice(0, job.topK)) {
      const href = candidate.attributes["href"];
      clicked.push(candidate.locator);
      if (!href) continue; // cannot run scripts; only navigations work here
      let destination: PageView;
      try {
        destination = await browser.navigate(
          new URL(href, homepage.url).toString(),
        );
      } catch (err) {
        if (err instanceof LoadTimeout) throw err;
        continue; // dead click on an unreachable page
      }
      const found = menuOpen(destination.root, setters);
      if (found) {
        setter = found;
        menuPage = destination;
        break;
      }
      await browser.navigate(job.siteUrl); // back out and try the next one
    }
  }

  if (!setter || !menuPage) {
    // banner-absent trace: observations so far, no consent state
    await writeTrace(job, browser, site, null, null, null, [], clicked);
    return {
      status: "no_banner",
      tracePath: job.outputPath,
      consentCookieValue: null,
      clickedCandidates: clicked,
      subpagesVisited: [],
    };
  }

  const library = await fetchLibrary(browser, homepage.url, setter);

  // 2. reject all rejectable categories, reload, snapshot the record
  const consent = await applyConsentRejectAll(browser, menuPage, setter);
  browser.phase = "post_reject";
  const reloaded = await browser.navigate(job.siteUrl);
  const recorded =
    consent.rawValue !== null &&
    rejectAllRecorded(setter.cmp, consent.rawValue, library.categories);

  // 3. sample same-scope subpages to generate cookie traffic
  const consentDomain = normalizeDomain(consent.domain);
  const rng = seededRng(job.seed);
  const links = [...new Set(extractLinks(reloaded.root))]
    .map((href) => {
      try {
        return new URL(href, reloaded.url).toString();
      } catch {
        return "";
      }
    })
    .filter((url) => {
      if (!url.startsWith("http")) return false;
      const parsed = new URL(url);
      if (parsed.toString() === new URL(job.siteUrl).toString()) return false;
      return sameScope(consentDomain, normalizeDomain(parsed.hostname));
    })
    .sort();
  const chosen: string[] = [];
  const pool = [...links];
  while (chosen.length < job.subpageCount && pool.length > 0) {
    chosen.push(pool.splice(Math.floor(rng() * pool.length), 1)[0]);
  }
  browser.phase = "subpage_visit";
  for (const subpage of chosen) {
    try {
      await browser.navigate(subpage);
    } catch (err) {
      if (err instanceof LoadTimeout) throw err;
    }
  }

  await writeTrace(
    job,
    browser,
    site,
    setter,
    consent.rawValue,
    consentDomain,
    chosen,
    clicked,
    library,
    homepage.url,
  );
  return {
    status: recorded ? "ok" : "consent_not_recorded",
    tracePath: job.outputPath,
    consentCookieValue: consent.rawValue,
    clickedCandidates: clicked,
    subpagesVisited: chosen,
  };
}

async function writeTrace(
  job: CrawlJob,
  browser: HttpBrowser,
  site: string,
  setter: ConsentSetterMapping | null,
  rawValue: string | null,
  consentDomain: string | null,
  subpages: string[],
  clicked: string[],
  library?: CookieLibrary,
  pageUrl?: string,
): Promise<void> {
  const records: TraceRecord[] = [
    {
      kind: "meta",
      trace_version: 1,
      site,
      region: job.region,
      iteration: job.iteration,
      subpage_seed: job.seed,
    },
  ];
  if (library) {
    records.push(...library.categories);
    records.push(...library.declarations);
  }
  for (const request of browser.requests) {
    records.push({
      kind: "request",
      request_id: request.request_id,
      url: request.url,
      method: request.method,
      initiator_frame: request.initiator_frame,
    });
    for (const cookie of request.cookies) {
      records.push({
        kind: "cookie",
        request_id: request.request_id,
        name: cookie.name,
        domain: cookie.domain,
        path: cookie.path,
        value: cookie.value,
        observed_at: cookie.observed_at,
        phase: cookie.phase,
      });
    }
  }
  if (setter && rawValue !== null && consentDomain) {
    records.push({
      kind: "snapshot",
      cmp: setter.cmp,
      raw_value: rawValue,
      consent_cookie_domain: consentDomain,
      captured_at: browser.now(),
      page_url: pageUrl ?? job.siteUrl,
    });
  }
  const bannerParams: Record<string, string> = {
    ...(library ? library.banner : {}),
  };
  if (setter) {
    bannerParams["reject_all_present"] = "true";
  }
  if (Object.keys(bannerParams).length > 0) {
    records.push({ kind: "banner", parameters: bannerParams });
  }
  for (const url of subpages) {
    records.push({ kind: "subpage", url });
  }
  await writeTraceAtomic(job.outputPath, records);
}
