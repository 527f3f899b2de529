/**
 * Trace format v1 records (line-delimited JSON, typed by "kind") and an
 * atomic writer. Field names and enum tokens mirror the audit engine's
 * external interface exactly.
 */

import { promises as fs } from "fs";
import * as path from "path";

export type Phase = "pre_consent" | "post_reject" | "subpage_visit";
export type CmpId = "onetrust" | "cookiebot" | "other";

export interface MetaRecord {
  kind: "meta";
  trace_version: 1;
  site: string;
  region: string;
  iteration: number;
  subpage_seed?: number;
}

export interface RequestRecordOut {
  kind: "request";
  request_id: string;
  url: string;
  method: string;
  initiator_frame: string;
}

export interface CookieRecordOut {
  kind: "cookie";
  request_id: string;
  name: string;
  domain: string;
  path: string;
  value: string;
  observed_at: number;
  phase: Phase;
}

export interface DeclarationRecordOut {
  kind: "declaration";
  name_pattern: string;
  host: string;
  category_id: string;
  purpose_text: string;
  declared_duration: string;
}

export interface CategoryRecordOut {
  kind: "category";
  category_id: string;
  label: string;
  rejectable: boolean;
  consent_choice: "consent" | "not_consent";
}

export interface SnapshotRecordOut {
  kind: "snapshot";
  cmp: CmpId;
  raw_value: string;
  consent_cookie_domain: string;
  captured_at: number;
  page_url: string;
}

export interface BannerRecordOut {
  kind: "banner";
  parameters: Record<string, string>;
}

export interface SubpageRecordOut {
  kind: "subpage";
  url: string;
}

export type TraceRecord =
  | MetaRecord
  | RequestRecordOut
  | CookieRecordOut
  | DeclarationRecordOut
  | CategoryRecordOut
  | SnapshotRecordOut
  | BannerRecordOut
  | SubpageRecordOut;

export function serializeRecords(records: TraceRecord[]): string {
  return records.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

/** Write-then-rename so a crashed crawl never leaves a torn trace file. */
export async function writeTraceAtomic(
  outPath: string,
  records: TraceRecord[],
): Promise<void> {
  const dir = path.dirname(outPath);
  await fs.mkdir(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(outPath)}.${process.pid}.tmp`);
  await fs.writeFile(tmp, serializeRecords(records), "utf-8");
  await fs.rename(tmp, outPath);
}

export function normalizeDomain(domain: string): string {
  return domain.replace(/^\.+/, "").toLowerCase();
}
