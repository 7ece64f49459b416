"""Score-row rendering: per-language columns plus the two averages.

AVG_X averages the four zero-resource languages (DE, ES, IT, ZH); AVG
averages all five including EN.  Display rounding is half-up to one
decimal, done in decimal arithmetic so ties round predictably.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

__all__ = ["LANGS_X", "LANGS_ALL", "row_averages", "fmt1", "render_score_rows", "score_row_json"]

LANGS_X = ("DE", "ES", "IT", "ZH")
LANGS_ALL = LANGS_X + ("EN",)


def row_averages(scores: Mapping[str, float]) -> tuple[float, float]:
    """(AVG_X, AVG) for a full row of per-language scores."""
    missing = [lang for lang in LANGS_ALL if lang not in scores]
    if missing:
        raise ValueError(f"missing scores for {missing}")
    avg_x = sum(scores[lang] for lang in LANGS_X) / len(LANGS_X)
    avg = sum(scores[lang] for lang in LANGS_ALL) / len(LANGS_ALL)
    return avg_x, avg


def fmt1(value: float) -> str:
    """One-decimal half-up formatting (71.575 -> '71.6')."""
    return str(Decimal(str(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def render_score_rows(rows: Sequence[tuple[str, Mapping[str, float]]]) -> str:
    """Human table with columns DE ES IT ZH EN AVG_X AVG, one row per label."""
    width = max([len("row")] + [len(label) for label, _ in rows])
    cols = LANGS_ALL + ("AVG_X", "AVG")
    lines = [f"{'row':<{width}}  " + "  ".join(f"{c:>6}" for c in cols)]
    for label, scores in rows:
        avg_x, avg = row_averages(scores)
        vals = [scores[lang] for lang in LANGS_ALL] + [avg_x, avg]
        lines.append(f"{label:<{width}}  " + "  ".join(f"{fmt1(v):>6}" for v in vals))
    return "\n".join(lines)


def score_row_json(scores: Mapping[str, float]) -> str:
    avg_x, avg = row_averages(scores)
    payload = {lang: scores[lang] for lang in LANGS_ALL}
    payload["AVG_X"] = float(fmt1(avg_x))
    payload["AVG"] = float(fmt1(avg))
    return json.dumps(payload)
