"""Structural repair of model-emitted token sequences.

``repair`` turns an arbitrary token list into a valid linearization that
``delinearize`` accepts.  It is total, idempotent, and leaves valid input
untouched.  Fixes are applied in a fixed order, iterated to a fixpoint:

1. drop unmatched ``)``;
2. drop invalid segments: dangling relations (no following value), stray
   values and subgraphs appearing where the grammar allows none, empty
   groups, junk tokens, and anything outside the first top-level group;
3. insert missing pieces after a ``(``: a fresh variable token when absent,
   the placeholder concept ``amr-unknown`` when absent;
4. append missing ``)``;
5. renumber variable tokens to 0..n-1 in first-visit order (duplicate
   definitions become fresh variables) and drop references to variables
   never defined before the reference point.

Anything still unusable afterwards (for example, no group at all) falls back
to the single-node sequence ``( <V0> amr-empty )`` so downstream scoring is
always defined.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .linearize import (
    CLOSE,
    LIT,
    OPEN,
    REL,
    VAR,
    classify,
    validate_linear,
    var_index,
    var_token,
)

__all__ = ["RepairReport", "repair", "repair_with_report", "repair_pass_report", "FALLBACK"]

FALLBACK = ["(", var_token(0), "amr-empty", ")"]

_MAX_PASSES = 32


@dataclass
class RepairReport:
    """Counts of fixes applied, for pipeline diagnostics."""

    parens_added: int = 0
    parens_dropped: int = 0
    segments_removed: int = 0
    concepts_inserted: int = 0
    vars_renumbered: int = 0
    fell_back: bool = False

    def as_dict(self) -> dict:
        return asdict(self)

    def add(self, other: "RepairReport") -> None:
        self.parens_added += other.parens_added
        self.parens_dropped += other.parens_dropped
        self.segments_removed += other.segments_removed
        self.concepts_inserted += other.concepts_inserted
        self.vars_renumbered += other.vars_renumbered
        self.fell_back = self.fell_back or other.fell_back


def repair(tokens: list[str]) -> list[str]:
    """Repair a token sequence; the result always delinearizes."""
    return repair_with_report(tokens)[0]


def repair_pass_report(tokens: list[str]) -> RepairReport:
    """Run repair and return only the fix-count report."""
    return repair_with_report(tokens)[1]


def repair_with_report(tokens: list[str]) -> tuple[list[str], RepairReport]:
    rep = RepairReport()
    toks = [str(t) for t in tokens]
    for _ in range(_MAX_PASSES):
        new = _drop_unmatched_close(toks, rep)
        new = _drop_invalid_segments(new, rep)
        new = _insert_missing(new, rep)
        new = _close_open_groups(new, rep)
        new = _renumber(new, rep)
        if new == toks:
            break
        toks = new
    if not toks or not validate_linear(toks):
        rep.fell_back = True
        return list(FALLBACK), rep
    return toks, rep


# ---------------------------------------------------------------------------
# pass 1

def _drop_unmatched_close(toks: list[str], rep: RepairReport) -> list[str]:
    out: list[str] = []
    depth = 0
    for t in toks:
        if t == ")":
            if depth == 0:
                rep.parens_dropped += 1
                continue
            depth -= 1
        elif t == "(":
            depth += 1
        out.append(t)
    return out


# ---------------------------------------------------------------------------
# pass 2: a tolerant walk of the group grammar that keeps only tokens with a
# legal position, treating end-of-input as an implicit close.

_SLOT_VAR, _SLOT_CONCEPT, _SLOT_REL = range(3)


def _is_value_start(kls: str) -> bool:
    return kls in (OPEN, VAR, LIT)


def _drop_invalid_segments(toks: list[str], rep: RepairReport) -> list[str]:
    n = len(toks)

    def skip_span(i: int) -> int:
        # consume a balanced subgroup starting at an unwanted '('
        depth = 0
        while i < n:
            if toks[i] == "(":
                depth += 1
            elif toks[i] == ")":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        return n

    def walk(i: int) -> tuple[list[str], int]:
        # toks[i] == '('
        out = ["("]
        i += 1
        slot = _SLOT_VAR
        while i < n:
            tok = toks[i]
            kls = classify(tok)
            if kls == CLOSE:
                if slot == _SLOT_VAR:
                    # nothing inside: the whole group is an invalid segment
                    rep.segments_removed += 1
                    return [], i + 1
                out.append(")")
                return out, i + 1
            if slot == _SLOT_VAR:
                if kls == VAR:
                    out.append(tok)
                    slot = _SLOT_CONCEPT
                    i += 1
                elif kls == LIT and not tok.startswith('"'):
                    out.append(tok)  # concept without variable; pass 3 mints one
                    slot = _SLOT_REL
                    i += 1
                elif kls == REL:
                    slot = _SLOT_REL  # variable and concept missing; reprocess
                else:
                    rep.segments_removed += 1
                    i = skip_span(i) if kls == OPEN else i + 1
            elif slot == _SLOT_CONCEPT:
                if kls == LIT and not tok.startswith('"'):
                    out.append(tok)
                    slot = _SLOT_REL
                    i += 1
                elif kls == REL:
                    slot = _SLOT_REL  # concept missing; pass 3 inserts it
                else:
                    rep.segments_removed += 1
                    i = skip_span(i) if kls == OPEN else i + 1
            else:  # _SLOT_REL: expect relation or close
                if kls == REL:
                    nxt = classify(toks[i + 1]) if i + 1 < n else None
                    if nxt is not None and _is_value_start(nxt):
                        if nxt == OPEN:
                            sub, i = walk(i + 1)
                            if sub:
                                out.append(tok)
                                out.extend(sub)
                            # empty subgroup already counted; relation goes with it
                        else:
                            out.extend([tok, toks[i + 1]])
                            i += 2
                    else:
                        rep.segments_removed += 1  # dangling relation
                        i += 1
                else:
                    rep.segments_removed += 1
                    i = skip_span(i) if kls == OPEN else i + 1
        return out, i  # end of input: group left open for pass 4

    out: list[str] = []
    i = 0
    while i < n and toks[i] != "(":
        i += 1
    if i > 0:
        rep.segments_removed += 1
    if i < n:
        body, i = walk(i)
        out.extend(body)
    if i < n:
        rep.segments_removed += 1  # content after the top-level group
    return out


# ---------------------------------------------------------------------------
# pass 3

def _insert_missing(toks: list[str], rep: RepairReport) -> list[str]:
    fresh = max((var_index(t) for t in toks if classify(t) == VAR), default=-1) + 1
    out: list[str] = []
    i = 0
    n = len(toks)
    while i < n:
        tok = toks[i]
        out.append(tok)
        if tok == "(":
            nxt = toks[i + 1] if i + 1 < n else None
            if nxt is None or classify(nxt) != VAR:
                out.append(var_token(fresh))
                fresh += 1
                if nxt is None or classify(nxt) != LIT:
                    out.append("amr-unknown")
                    rep.concepts_inserted += 1
            else:
                after = toks[i + 2] if i + 2 < n else None
                if after is None or classify(after) != LIT:
                    out.append(nxt)
                    out.append("amr-unknown")
                    rep.concepts_inserted += 1
                    i += 1
        i += 1
    return out


# ---------------------------------------------------------------------------
# pass 4

def _close_open_groups(toks: list[str], rep: RepairReport) -> list[str]:
    depth = 0
    for t in toks:
        if t == "(":
            depth += 1
        elif t == ")":
            depth -= 1
    if depth > 0:
        rep.parens_added += depth
        return toks + [")"] * depth
    return toks


# ---------------------------------------------------------------------------
# pass 5

def _renumber(toks: list[str], rep: RepairReport) -> list[str]:
    out: list[str] = []
    first_def: dict[int, int] = {}
    counter = 0
    for i, tok in enumerate(toks):
        if classify(tok) != VAR:
            out.append(tok)
            continue
        orig = var_index(tok)
        if i > 0 and toks[i - 1] == "(":
            new = counter
            counter += 1
            first_def.setdefault(orig, new)
            if new != orig:
                rep.vars_renumbered += 1
            out.append(var_token(new))
        elif orig in first_def:
            new = first_def[orig]
            if new != orig:
                rep.vars_renumbered += 1
            out.append(var_token(new))
        else:
            rep.segments_removed += 1  # reference to an undefined variable
    return out
