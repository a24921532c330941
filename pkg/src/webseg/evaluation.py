"""Token and sentence precision/recall/F1 in the CoNLL 2018 span-matching style.

Spans are compared in the whitespace-free character sequence of the
document, so two tokenizations of the same text can be scored against each
other even when their whitespace differs.  A sentence span runs from the
start of its first token to the end of its last token.

Scenarios for gold data with orthographic/syntactic tiers:

* ``ALL``: every gold boundary delimits a gold sentence.
* ``ORTHOGRAPHIC``: only Orthographic and Both boundaries do.
* ``RELAXED``: as ALL, but a system sentence that merges consecutive gold
  sentences is still correct when every boundary it skips is syntactic-only.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .corpus import BoundaryTier, Segmentation, Span, Token, nonspace_offsets
from .exceptions import AlignmentError


class Scenario(enum.Enum):
    ALL = "all"
    ORTHOGRAPHIC = "orthographic"
    RELAXED = "relaxed"


SCENARIO_LABELS = {
    Scenario.ALL: "All boundaries",
    Scenario.ORTHOGRAPHIC: "Orth. boundaries",
    Scenario.RELAXED: "Relaxed boundaries",
}


@dataclass(frozen=True)
class PRF:
    tp: int
    sys_total: int
    gold_total: int

    @property
    def precision(self) -> float:
        return self.tp / self.sys_total if self.sys_total else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.gold_total if self.gold_total else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(self.tp + other.tp, self.sys_total + other.sys_total, self.gold_total + other.gold_total)


ZERO = PRF(0, 0, 0)


def micro_average(scores: Iterable[PRF]) -> PRF:
    total = ZERO
    for s in scores:
        total = total + s
    return total


def _check_alignment(gold: Sequence[Token], system: Sequence[Token]) -> None:
    g = "".join(t.surface for t in gold)
    s = "".join(t.surface for t in system)
    if g != s:
        for i, (a, b) in enumerate(zip(g, s)):
            if a != b:
                raise AlignmentError(
                    f"gold and system texts differ at non-whitespace character {i}: "
                    f"{g[max(0, i - 10):i + 10]!r} vs {s[max(0, i - 10):i + 10]!r}"
                )
        raise AlignmentError(f"gold and system texts differ in length ({len(g)} vs {len(s)})")


def token_f1(gold_tokens: Sequence[Token], system_tokens: Sequence[Token]) -> PRF:
    _check_alignment(gold_tokens, system_tokens)
    gold = set(nonspace_offsets(gold_tokens))
    system = set(nonspace_offsets(system_tokens))
    return PRF(len(gold & system), len(system), len(gold))


def _end_map(tokens: Sequence[Token]) -> Dict[int, int]:
    """Raw token end offset -> end offset in the whitespace-free sequence."""
    return {tok.end: span[1] for tok, span in zip(tokens, nonspace_offsets(tokens))}


def sentence_spans(segmentation: Segmentation, tokens: Sequence[Token], keep=None) -> List[Span]:
    """Whitespace-free spans of the sentences induced by (a tier subset of) the boundaries."""
    seg = segmentation if keep is None else segmentation.filter(keep)
    ns = nonspace_offsets(tokens)
    return [(ns[i][0], ns[j - 1][1]) for i, j in seg.sentences(tokens)]


def sentence_eval(
    gold: Segmentation,
    system: Segmentation,
    scenario: Scenario,
    gold_tokens: Sequence[Token],
    system_tokens: Sequence[Token] = None,
) -> PRF:
    """Score system sentences against tiered gold sentences for one document."""
    if system_tokens is None:
        system_tokens = gold_tokens
    _check_alignment(gold_tokens, system_tokens)
    sys_spans = sentence_spans(system, system_tokens)
    if scenario is Scenario.ORTHOGRAPHIC:
        gold_spans = sentence_spans(gold, gold_tokens, keep=lambda t: t.is_orthographic)
        return PRF(len(set(sys_spans) & set(gold_spans)), len(sys_spans), len(gold_spans))
    gold_spans = sentence_spans(gold, gold_tokens)
    if scenario is Scenario.ALL:
        return PRF(len(set(sys_spans) & set(gold_spans)), len(sys_spans), len(gold_spans))

    # relaxed: edges must be gold segment edges and every gold cut inside syntactic-only
    starts = {s for s, _ in gold_spans}
    ends = {e for _, e in gold_spans}
    emap = _end_map(gold_tokens)
    hard = sorted(emap[b.offset] for b in gold.boundaries if b.tier is not BoundaryTier.SYNTACTIC)
    tp = 0
    for s, e in sys_spans:
        if s not in starts or e not in ends:
            continue
        k = bisect.bisect_right(hard, s)
        if k < len(hard) and hard[k] < e:
            continue
        tp += 1
    return PRF(tp, len(sys_spans), len(gold_spans))


def evaluate_corpus(
    pairs: Iterable[Tuple[Segmentation, Sequence[Token], Segmentation, Sequence[Token]]],
    scenarios: Sequence[Scenario] = tuple(Scenario),
) -> Tuple[Dict[Scenario, PRF], PRF]:
    """Micro-averaged scores over ``(gold_seg, gold_tokens, sys_seg, sys_tokens)`` tuples."""
    totals = {s: ZERO for s in scenarios}
    tokens = ZERO
    for gold, gold_toks, system, sys_toks in pairs:
        tokens = tokens + token_f1(gold_toks, sys_toks)
        for s in scenarios:
            totals[s] = totals[s] + sentence_eval(gold, system, s, gold_toks, sys_toks)
    return totals, tokens


# ---------------------------------------------------------------------------
# report formatting


def format_report_tsv(results: Dict[Scenario, PRF], tokens: PRF = None) -> str:
    lines = ["scenario\tprecision\trecall\tf1\ttp\tsys_total\tgold_total"]
    rows = [(s.value, r) for s, r in results.items()]
    if tokens is not None:
        rows.append(("tokens", tokens))
    for name, r in rows:
        lines.append(
            f"{name}\t{r.precision:.6f}\t{r.recall:.6f}\t{r.f1:.6f}\t{r.tp}\t{r.sys_total}\t{r.gold_total}"
        )
    return "\n".join(lines) + "\n"


def format_report_table(results: Dict[Scenario, PRF], tokens: PRF = None) -> str:
    rows = [(SCENARIO_LABELS[s], r) for s, r in results.items()]
    if tokens is not None:
        rows.append(("Tokenization", tokens))
    width = max([len(name) for name, _ in rows] + [10])
    out = [f"{'':<{width}}  {'Prec':>6}  {'Rec':>6}  {'F1':>6}"]
    for name, r in rows:
        out.append(
            f"{name:<{width}}  {100 * r.precision:6.2f}  {100 * r.recall:6.2f}  {100 * r.f1:6.2f}"
        )
    return "\n".join(out) + "\n"
