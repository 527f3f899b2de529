/**
 * Consent-setter mappings: the one-time manual mapping from a CMP's
 * banner layout to the controls the exerciser needs. Stored in the same
 * line-delimited container as traces, record kind "setter".
 */

import { promises as fs } from "fs";
import { CmpId } from "./trace";

export interface ConsentSetterMapping {
  cmp: CmpId;
  open_menu: string;
  reject_all: string;
  confirm: string;
  toggles: string;
  consent_cookie: string;
  library_path: string;
}

export class SelectorMiss extends Error {}

export function parseSetters(text: string): ConsentSetterMapping[] {
  const setters: ConsentSetterMapping[] = [];
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const record = JSON.parse(trimmed);
    if (record.kind !== "setter") continue;
    for (const field of ["cmp", "open_menu", "reject_all", "consent_cookie"]) {
      if (!(field in record)) {
        throw new Error(`setter record is missing ${field}`);
      }
    }
    setters.push({
      cmp: record.cmp,
      open_menu: record.open_menu,
      reject_all: record.reject_all,
      confirm: record.confirm ?? "",
      toggles: record.toggles ?? "",
      consent_cookie: record.consent_cookie,
      library_path: record.library_path ?? "",
    });
  }
  return setters;
}

export async function loadSetters(path: string): Promise<ConsentSetterMapping[]> {
  return parseSetters(await fs.readFile(path, "utf-8"));
}
