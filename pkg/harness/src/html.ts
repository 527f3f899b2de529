/**
 * Small static HTML reader: tag-soup tolerant tree building, candidate
 * button/link extraction with the same leaf-div and visibility rules the
 * audit engine uses, and just enough selector support (#id, .class, tag)
 * to resolve consent-setter mappings.
 */

export interface ElementNode {
  tag: string;
  attrs: Record<string, string>;
  children: ElementNode[];
  texts: string[];
  parent: ElementNode | null;
  siblingIndex: number; // 1-based among same-tag siblings
}

const VOID_TAGS = new Set([
  "area", "base", "br", "col", "embed", "hr", "img", "input", "link",
  "meta", "param", "source", "track", "wbr",
]);

const TAG_RE = /<!--[\s\S]*?-->|<!DOCTYPE[^>]*>|<\/?[a-zA-Z][^>]*>|[^<]+/g;
const ATTR_RE = /([a-zA-Z_:][-a-zA-Z0-9_:.]*)\s*(?:=\s*("([^"]*)"|'([^']*)'|[^\s>]+))?/g;

function parseAttributes(raw: string): Record<string, string> {
  const attrs: Record<string, string> = {};
  for (const match of raw.matchAll(ATTR_RE)) {
    const name = match[1].toLowerCase();
    let value = match[3] ?? match[4] ?? match[2] ?? "";
    if (value.startsWith('"') || value.startsWith("'")) value = value.slice(1, -1);
    attrs[name] = value;
  }
  return attrs;
}

function decodeEntities(text: string): string {
  return text
    .replace(/&amp;/g, "&")
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&#39;/g, "'")
    .replace(/&nbsp;/g, " ");
}

export function parseHtml(html: string): ElementNode {
  const root: ElementNode = {
    tag: "#document", attrs: {}, children: [], texts: [], parent: null, siblingIndex: 1,
  };
  const stack: ElementNode[] = [root];
  for (const match of html.matchAll(TAG_RE)) {
    const token = match[0];
    if (token.startsWith("<!--") || token.startsWith("<!DOCTYPE")) continue;
    if (token.startsWith("</")) {
      const tag = token.slice(2, -1).trim().toLowerCase();
      for (let i = stack.length - 1; i >= 1; i--) {
        if (stack[i].tag === tag) {
          stack.length = i;
          break;
        }
      }
    } else if (token.startsWith("<")) {
      const selfClosing = token.endsWith("/>");
      const inner = token.slice(1, selfClosing ? -2 : -1);
      const spaceAt = inner.search(/[\s/]/);
      const tag = (spaceAt < 0 ? inner : inner.slice(0, spaceAt)).toLowerCase();
      const rawAttrs = spaceAt < 0 ? "" : inner.slice(spaceAt);
      const parent = stack[stack.length - 1];
      const node: ElementNode = {
        tag,
        attrs: parseAttributes(rawAttrs),
        children: [],
        texts: [],
        parent,
        siblingIndex: parent.children.filter((c) => c.tag === tag).length + 1,
      };
      parent.children.push(node);
      if (!selfClosing && !VOID_TAGS.has(tag)) stack.push(node);
    } else {
      const text = decodeEntities(token).trim();
      if (text) stack[stack.length - 1].texts.push(text);
    }
  }
  return root;
}

export function innerText(node: ElementNode): string {
  const parts = [...node.texts];
  for (const child of node.children) parts.push(innerText(child));
  return parts.join(" ").replace(/\s+/g, " ").trim();
}

const HIDDEN_STYLE_RE =
  /display\s*:\s*none|visibility\s*:\s*hidden|width\s*:\s*0(px|%)?\b|height\s*:\s*0(px|%)?\b/;

export function hiddenHere(node: ElementNode): boolean {
  if ("hidden" in node.attrs) return true;
  if ((node.attrs["aria-hidden"] || "").toLowerCase() === "true") return true;
  return HIDDEN_STYLE_RE.test((node.attrs["style"] || "").toLowerCase());
}

export interface Candidate {
  tag: string;
  attributes: Record<string, string>;
  innerText: string;
  isLeaf: boolean;
  visible: boolean;
  locator: string;
  node: ElementNode;
}

const CANDIDATE_TAGS = new Set(["a", "button", "div", "span"]);
const KEPT_ATTRIBUTES = ["aria-label", "class", "id", "href", "onclick"];

export function extractCandidates(html: string, frameIndex = 0): Candidate[] {
  const out: Candidate[] = [];
  const walk = (node: ElementNode, path: string, ancestorsVisible: boolean) => {
    for (const child of node.children) {
      const childPath = `${path}/${child.tag}[${child.siblingIndex}]`;
      const visible = ancestorsVisible && !hiddenHere(child);
      if (CANDIDATE_TAGS.has(child.tag)) {
        const isLeaf = child.children.length === 0;
        if (child.tag !== "div" || isLeaf) {
          const attributes: Record<string, string> = {};
          for (const key of KEPT_ATTRIBUTES) {
            if (key in child.attrs) attributes[key] = child.attrs[key];
          }
          out.push({
            tag: child.tag,
            attributes,
            innerText: innerText(child),
            isLeaf,
            visible,
            locator: `f${frameIndex}:${childPath}`,
            node: child,
          });
        }
      }
      walk(child, childPath, visible);
    }
  };
  walk(parseHtml(html), "", true);
  return out.filter((c) => c.visible);
}

/** Minimal selector support: "#id", ".class", "tag". */
export function selectAll(root: ElementNode, selector: string): ElementNode[] {
  const matches: ElementNode[] = [];
  const test = (node: ElementNode): boolean => {
    if (selector.startsWith("#")) return node.attrs["id"] === selector.slice(1);
    if (selector.startsWith(".")) {
      const classes = (node.attrs["class"] || "").split(/\s+/);
      return classes.includes(selector.slice(1));
    }
    return node.tag === selector.toLowerCase();
  };
  const walk = (node: ElementNode) => {
    for (const child of node.children) {
      if (test(child)) matches.push(child);
      walk(child);
    }
  };
  walk(root);
  return matches;
}

export function selectOne(root: ElementNode, selector: string): ElementNode | null {
  const matches = selectAll(root, selector);
  return matches.length > 0 ? matches[0] : null;
}

export function extractLinks(root: ElementNode): string[] {
  return selectAll(root, "a")
    .map((a) => a.attrs["href"] || "")
    .filter((href) => href.length > 0);
}
