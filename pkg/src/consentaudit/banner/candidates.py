"""Candidate banner-button extraction from captured HTML.

Works on static markup (no layout engine): visibility is judged from
inline style, the hidden/aria-hidden attributes, and zero-size hints, with
hiddenness inherited from ancestors. Buttons and links are a, button, and
span elements; div elements qualify only as leaves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from ..errors import ParseFailure
from ..model import InvariantViolation

CANDIDATE_TAGS = frozenset({"a", "button", "div", "span"})
KEPT_ATTRIBUTES = ("aria-label", "class", "id", "href", "onclick")

_VOID_TAGS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input", "link",
     "meta", "param", "source", "track", "wbr"}
)
_HIDDEN_STYLE_RE = re.compile(
    r"display\s*:\s*none|visibility\s*:\s*hidden|"
    r"width\s*:\s*0(px|%)?\b|height\s*:\s*0(px|%)?\b"
)


@dataclass(frozen=True)
class CandidateElement:
    tag: str
    attributes: dict[str, str]
    inner_text: str
    is_leaf: bool
    visible: bool
    locator: str

    def __post_init__(self):
        if self.tag not in CANDIDATE_TAGS:
            raise InvariantViolation(f"{self.tag!r} is not a candidate tag")
        if self.tag == "div" and not self.is_leaf:
            raise InvariantViolation("only leaf divs are candidates")


@dataclass
class _Node:
    tag: str
    attrs: dict[str, str]
    parent: "_Node | None"
    children: list["_Node"] = field(default_factory=list)
    texts: list[str] = field(default_factory=list)
    sibling_index: int = 1

    def inner_text(self) -> str:
        parts = list(self.texts)
        for child in self.children:
            parts.append(child.inner_text())
        return " ".join(" ".join(parts).split())

    def hidden_here(self) -> bool:
        if "hidden" in self.attrs:
            return True
        if self.attrs.get("aria-hidden", "").lower() == "true":
            return True
        style = self.attrs.get("style", "").lower()
        return bool(_HIDDEN_STYLE_RE.search(style))


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = _Node(tag="#document", attrs={}, parent=None)
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        node = _Node(tag=tag, attrs={k: (v or "") for k, v in attrs}, parent=self.stack[-1])
        same_tag = sum(1 for c in self.stack[-1].children if c.tag == tag)
        node.sibling_index = same_tag + 1
        self.stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in _VOID_TAGS:
            self.stack.pop()

    def handle_endtag(self, tag):
        # tolerate mis-nesting: pop to the nearest open element of this tag
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return

    def handle_data(self, data):
        if data.strip():
            self.stack[-1].texts.append(data.strip())


def _parse_document(html: str) -> _Node:
    try:
        builder = _TreeBuilder()
        builder.feed(html)
        builder.close()
    except Exception as exc:  # html.parser almost never raises; truncation can
        raise ParseFailure(f"unrecoverable HTML input: {exc}") from exc
    return builder.root


def _walk(
    node: _Node,
    path: str,
    ancestors_visible: bool,
    out: list[CandidateElement],
):
    for child in node.children:
        child_path = f"{path}/{child.tag}[{child.sibling_index}]"
        visible = ancestors_visible and not child.hidden_here()
        if child.tag in CANDIDATE_TAGS:
            is_leaf = not any(c for c in child.children)
            if child.tag != "div" or is_leaf:
                out.append(
                    CandidateElement(
                        tag=child.tag,
                        attributes={
                            k: child.attrs[k] for k in KEPT_ATTRIBUTES if k in child.attrs
                        },
                        inner_text=child.inner_text(),
                        is_leaf=is_leaf,
                        visible=visible,
                        locator=child_path,
                    )
                )
        _walk(child, child_path, visible, out)


def extract_candidates(
    html: str, frame_context: list[str] | None = None, include_hidden: bool = False
) -> list[CandidateElement]:
    """All candidate button/link elements of a page and its frames.

    Candidates come back in document order, main document first, each
    locator prefixed with its frame index.
    """
    documents = [html, *(frame_context or [])]
    candidates: list[CandidateElement] = []
    for frame_index, document in enumerate(documents):
        root = _parse_document(document)
        found: list[CandidateElement] = []
        _walk(root, "", True, found)
        for element in found:
            candidates.append(
                CandidateElement(
                    tag=element.tag,
                    attributes=element.attributes,
                    inner_text=element.inner_text,
                    is_leaf=element.is_leaf,
                    visible=element.visible,
                    locator=f"f{frame_index}:{element.locator}",
                )
            )
    if include_hidden:
        return candidates
    return [c for c in candidates if c.visible]
