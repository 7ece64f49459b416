"""AMR graph data model and PENMAN-notation reader/writer.

An AMR is a rooted, directed, labeled graph: variable-bearing nodes carry
concept labels, constant nodes carry literals (numbers, quoted strings,
polarity ``-``/``+``, bare keywords like ``imperative``), and edges carry
``:``-prefixed relation labels.  Variable names are preserved on parse but
carry no meaning; graph equality is isomorphism, never name equality.

Edge order is significant: it is kept exactly as written in the source text
and drives both serialization and linearization downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import AmrkitError

__all__ = [
    "AmrGraph",
    "Node",
    "Edge",
    "Triple",
    "MalformedPenman",
    "parse_penman",
    "serialize_penman",
    "to_triples",
    "read_amr_text",
    "read_amr_file",
    "write_amr_file",
    "graphs_to_text",
]


class MalformedPenman(AmrkitError):
    """The text is not a well-formed PENMAN expression.

    Callers holding model output should route the tokens through
    ``amrkit.repair`` instead of parsing directly.
    """


@dataclass(frozen=True)
class Node:
    """One graph node. Constants hold their literal in ``concept``; their
    ``id`` is internal bookkeeping only and never appears in output."""

    id: str
    concept: str
    constant: bool = False


@dataclass(frozen=True)
class Edge:
    src: str
    label: str
    tgt: str


@dataclass(frozen=True)
class Triple:
    """Smatch-style decomposition unit.

    kind is one of ``instance`` (variable / concept), ``attribute``
    (variable / constant value, including the synthetic TOP), or
    ``relation`` (variable / variable).  Labels carry no ``:`` prefix.
    """

    kind: str
    src: str
    label: str
    tgt: str


@dataclass(frozen=True)
class AmrGraph:
    """Immutable rooted graph. ``nodes`` and ``edges`` preserve construction
    order; ``metadata`` holds ``# ::key value`` fields keyed by name."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    root: str
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {n.id: n for n in self.nodes})
        out: dict[str, list[Edge]] = {}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        object.__setattr__(self, "_out", out)

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    def outgoing(self, node_id: str) -> list[Edge]:
        return self._out.get(node_id, [])

    def var_nodes(self) -> list[Node]:
        return [n for n in self.nodes if not n.constant]

    def check(self) -> "AmrGraph":
        """Validate the structural invariants, returning self.

        Raises ValueError on the first violation; used defensively after
        construction from untrusted sources (parsers, generators).
        """
        if len(self._by_id) != len(self.nodes):
            raise ValueError("duplicate node identifiers")
        if self.root not in self._by_id or self.node(self.root).constant:
            raise ValueError("root must name a variable-bearing node")
        special = set('()/"')
        for n in self.nodes:
            if not n.concept:
                raise ValueError(f"empty concept on node {n.id!r}")
            quoted = len(n.concept) >= 2 and n.concept[0] == '"' and n.concept[-1] == '"'
            if not n.constant and quoted:
                raise ValueError(f"quoted concept on variable node {n.id!r}")
            if not quoted and special & set(n.concept):
                raise ValueError(f"unquoted concept {n.concept!r} embeds structural characters")
        for e in self.edges:
            if not e.label.startswith(":") or len(e.label) < 2 or special & set(e.label):
                raise ValueError(f"invalid edge label {e.label!r}")
            if e.src not in self._by_id or e.tgt not in self._by_id:
                raise ValueError(f"edge {e} names a missing node")
            if self.node(e.src).constant:
                raise ValueError(f"constant node {e.src!r} has an outgoing edge")
        seen = {self.root}
        stack = [self.root]
        while stack:
            for e in self.outgoing(stack.pop()):
                if e.tgt not in seen:
                    seen.add(e.tgt)
                    stack.append(e.tgt)
        if len(seen) != len(self.nodes):
            missing = sorted(set(self._by_id) - seen)
            raise ValueError(f"nodes unreachable from root: {missing}")
        return self


# ---------------------------------------------------------------------------
# Tokenization

_META_FIELD_RE = re.compile(r"::(\S+)")


def _tokenize_penman(text: str) -> list[str]:
    """Split a PENMAN body into tokens: parens, slashes, quoted strings
    (kept whole, backslash escapes honored), and bare atoms."""
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()/":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise MalformedPenman("unterminated string literal")
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()/"':
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _split_metadata(text: str) -> tuple[dict[str, str], str]:
    meta: dict[str, str] = {}
    body_lines: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            rest = stripped.lstrip("#").strip()
            fields = list(_META_FIELD_RE.finditer(rest))
            for k, m in enumerate(fields):
                end = fields[k + 1].start() if k + 1 < len(fields) else len(rest)
                meta[m.group(1)] = rest[m.end() : end].strip()
        else:
            body_lines.append(line)
    return meta, "\n".join(body_lines)


# ---------------------------------------------------------------------------
# Parsing

_QUOTED_RE = re.compile(r'^".*"$', re.S)


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN expression (optionally preceded by ``# ::`` metadata
    lines) into an AmrGraph.

    The parser is strict: unbalanced parentheses, a variable definition with
    no ``/ concept``, duplicate variable definitions, or trailing content all
    raise MalformedPenman.  Re-entrant variable mentions (including forward
    references) become additional edges to the one node.
    """
    meta, body = _split_metadata(text)
    tokens = _tokenize_penman(body)
    if not tokens:
        raise MalformedPenman("empty input")

    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedPenman("unexpected end of input (unbalanced parentheses)")
        tok = tokens[pos]
        pos += 1
        return tok

    concepts: dict[str, str] = {}
    # (src_var, label, raw_target) in textual order
    raw_edges: list[tuple[str, str, str]] = []
    def_order: list[str] = []

    def parse_node() -> str:
        tok = take()
        if tok != "(":
            raise MalformedPenman(f"expected '(' but found {tok!r}")
        var = take()
        if var in "()/" or _QUOTED_RE.match(var):
            raise MalformedPenman(f"expected variable name, found {var!r}")
        if take() != "/":
            raise MalformedPenman(f"missing '/' after variable {var!r}")
        concept = take()
        if concept in "()/" or _QUOTED_RE.match(concept):
            raise MalformedPenman(f"missing concept after '/' for {var!r}")
        if var in concepts:
            raise MalformedPenman(f"duplicate definition of variable {var!r}")
        concepts[var] = concept
        def_order.append(var)
        while True:
            tok = peek()
            if tok == ")":
                take()
                return var
            if tok is None:
                raise MalformedPenman("unexpected end of input (unbalanced parentheses)")
            if not tok.startswith(":") or tok == ":":
                raise MalformedPenman(f"expected relation or ')', found {tok!r}")
            label = take()
            val = peek()
            if val == "(":
                raw_edges.append((var, label, ""))
                slot = len(raw_edges) - 1
                child = parse_node()
                raw_edges[slot] = (var, label, child)
            elif val is None or val == ")" or val == "/" or val.startswith(":"):
                raise MalformedPenman(f"relation {label!r} has no value")
            else:
                raw_edges.append((var, label, take()))
        # unreachable

    root = parse_node()
    if pos != len(tokens):
        raise MalformedPenman(f"trailing content after graph: {tokens[pos]!r}")

    nodes = [Node(v, concepts[v]) for v in def_order]
    taken_ids = set(concepts)
    const_ids: dict[str, str] = {}
    edges = []
    for src, label, tgt in raw_edges:
        if tgt in concepts:
            edges.append(Edge(src, label, tgt))
            continue
        cid = const_ids.get(tgt)
        if cid is None:
            cid = tgt
            while cid in taken_ids:
                cid += "_"
            taken_ids.add(cid)
            const_ids[tgt] = cid
            nodes.append(Node(cid, tgt, constant=True))
        edges.append(Edge(src, label, cid))

    return AmrGraph(tuple(nodes), tuple(edges), root, meta).check()


# ---------------------------------------------------------------------------
# Serialization

def serialize_penman(g: AmrGraph) -> str:
    """Render a graph as a single-line PENMAN string (plus metadata header
    lines when present).  The first mention of a node is expanded; later
    mentions emit the variable only.  Whitespace is normalized."""
    visited: set[str] = set()

    def emit(node_id: str) -> str:
        node = g.node(node_id)
        visited.add(node_id)
        pieces = [f"({node.id} / {node.concept}"]
        for e in g.outgoing(node_id):
            tgt = g.node(e.tgt)
            if tgt.constant:
                val = tgt.concept
            elif e.tgt in visited:
                val = tgt.id
            else:
                val = emit(e.tgt)
            pieces.append(f"{e.label} {val}")
        return " ".join(pieces) + ")"

    body = emit(g.root)
    # constant targets never enter `visited`
    reachable = visited | {e.tgt for e in g.edges if g.node(e.tgt).constant}
    if len(reachable) != len(g.nodes):
        raise ValueError("graph has nodes unreachable from the root")

    header = "".join(f"# ::{k} {v}\n" for k, v in g.metadata.items())
    return header + body


def to_triples(g: AmrGraph) -> list[Triple]:
    """Decompose a graph into instance/attribute/relation triples.

    Exactly one instance triple per variable node, one TOP attribute for the
    root, and one triple per edge, so the total is always
    ``len(var_nodes) + len(edges) + 1``.
    """
    triples = [Triple("instance", n.id, "instance", n.concept) for n in g.var_nodes()]
    triples.append(Triple("attribute", g.root, "TOP", g.node(g.root).concept))
    for e in g.edges:
        tgt = g.node(e.tgt)
        if tgt.constant:
            triples.append(Triple("attribute", e.src, e.label[1:], tgt.concept))
        else:
            triples.append(Triple("relation", e.src, e.label[1:], e.tgt))
    return triples


# ---------------------------------------------------------------------------
# AMR release file format: blank-line separated blocks, each a metadata
# header plus one PENMAN expression.

def iter_amr_blocks(text: str) -> Iterator[str]:
    block: list[str] = []
    for line in text.splitlines():
        if line.strip():
            block.append(line)
        elif block:
            yield "\n".join(block)
            block = []
    if block:
        yield "\n".join(block)


def read_amr_text(text: str) -> list[AmrGraph]:
    return [parse_penman(block) for block in iter_amr_blocks(text)]


def read_amr_file(path: str) -> list[AmrGraph]:
    with open(path, encoding="utf-8") as fh:
        return read_amr_text(fh.read())


def graphs_to_text(graphs: Iterable[AmrGraph]) -> str:
    return "\n\n".join(serialize_penman(g) for g in graphs) + "\n"


def write_amr_file(path: str, graphs: Iterable[AmrGraph]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graphs_to_text(graphs))
