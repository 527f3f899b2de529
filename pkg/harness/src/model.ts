/**
 * Inference against the audit engine's exported forest model file. The
 * featurization here must stay byte-compatible with the engine: same
 * tokenizer, same plural folding, same 17-slot layout. Parity is pinned
 * by tests that compare against the engine's own featurizer.
 */

import { promises as fs } from "fs";
import { Candidate } from "./html";

export const FEATURE_DIM = 17;

interface LeafObj {
  p: number;
}
interface SplitObj {
  f: number;
  t: number;
  l: TreeObj;
  r: TreeObj;
}
type TreeObj = LeafObj | SplitObj;

export interface VocabularyData {
  unigrams: string[];
  bigrams: string[];
  keywords: string[];
  api_tokens: string[];
  token_threshold: number;
}

export interface ForestModelFile {
  format: string;
  version: number;
  seed: number;
  n_trees: number;
  feature_dim: number;
  vocabulary: VocabularyData;
  vocabulary_hash: string;
  trees: TreeObj[];
}

export class ForestModel {
  private unigrams: Set<string>;
  private bigrams: Set<string>;
  private keywords: Set<string>;
  private apiTokens: string[];
  private tokenThreshold: number;

  constructor(private data: ForestModelFile) {
    if (data.format !== "consentaudit-forest") {
      throw new Error(`not a consentaudit forest model: ${data.format}`);
    }
    if (data.feature_dim !== FEATURE_DIM) {
      throw new Error(`unexpected feature_dim ${data.feature_dim}`);
    }
    // the model file ships its vocabulary already stem-folded
    this.unigrams = new Set(data.vocabulary.unigrams);
    this.bigrams = new Set(data.vocabulary.bigrams);
    this.keywords = new Set(data.vocabulary.keywords);
    this.apiTokens = data.vocabulary.api_tokens.map((t) => t.toLowerCase());
    this.tokenThreshold = data.vocabulary.token_threshold;
  }

  static async load(path: string): Promise<ForestModel> {
    const text = await fs.readFile(path, "utf-8");
    return new ForestModel(JSON.parse(text) as ForestModelFile);
  }

  private predictTree(tree: TreeObj, features: number[]): number {
    let node = tree;
    while (!("p" in node)) {
      node = features[node.f] <= node.t ? node.l : node.r;
    }
    return node.p;
  }

  predictProba(features: number[]): number {
    let total = 0;
    for (const tree of this.data.trees) total += this.predictTree(tree, features);
    return total / this.data.trees.length;
  }

  featurize(candidate: Candidate): number[] {
    const values: number[] = [];
    for (const source of ["aria-label", "class", "id", "text"] as const) {
      const text =
        source === "text"
          ? candidate.innerText
          : candidate.attributes[source] || "";
      values.push(...this.ngramCounts(text));
    }
    for (const source of ["aria-label", "text"] as const) {
      const text =
        source === "text"
          ? candidate.innerText
          : candidate.attributes[source] || "";
      values.push(tokenize(text).length > this.tokenThreshold ? 1 : 0);
    }
    const classAndId = `${candidate.attributes["class"] || ""} ${candidate.attributes["id"] || ""}`;
    for (const text of [
      classAndId,
      candidate.attributes["href"] || "",
      candidate.attributes["onclick"] || "",
    ]) {
      const lowered = text.toLowerCase();
      values.push(this.apiTokens.some((t) => lowered.includes(t)) ? 1 : 0);
    }
    if (values.length !== FEATURE_DIM) {
      throw new Error(`featurized to ${values.length} dims`);
    }
    return values;
  }

  private ngramCounts(text: string): [number, number, number] {
    const tokens = tokenize(text).map(stem);
    let unigramHits = 0;
    let bigramHits = 0;
    let keywordHits = 0;
    for (const token of tokens) {
      if (this.unigrams.has(token)) unigramHits += 1;
    }
    for (let i = 0; i + 1 < tokens.length; i++) {
      const pair = `${tokens[i]} ${tokens[i + 1]}`;
      if (this.bigrams.has(pair)) bigramHits += 1;
      if (this.keywords.has(pair)) keywordHits += 1;
    }
    return [unigramHits, bigramHits, keywordHits];
  }

  /** Candidates by predicted probability, ties kept in document order. */
  rank(candidates: Candidate[]): Array<{ candidate: Candidate; probability: number }> {
    const scored = candidates.map((candidate, index) => ({
      candidate,
      probability: this.predictProba(this.featurize(candidate)),
      index,
    }));
    scored.sort((a, b) => b.probability - a.probability || a.index - b.index);
    return scored.map(({ candidate, probability }) => ({ candidate, probability }));
  }
}

export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/[^0-9a-z]+/).filter((t) => t.length > 0);
}

export function stem(token: string): string {
  if (token.length > 3 && token.endsWith("s") && !token.endsWith("ss")) {
    return token.slice(0, -1);
  }
  return token;
}
