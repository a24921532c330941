"""Inter-annotator agreement over tiered boundary annotations and majority aggregation."""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .corpus import (
    AnnotationSet,
    Boundary,
    BoundaryTier,
    Document,
    Segmentation,
    Token,
    paragraph_final_offsets,
)
from .exceptions import CoverageError

Item = Tuple[str, int]


class TierFilter(enum.Enum):
    BINARY = "binary"
    ORTHOGRAPHIC = "orthographic"
    SYNTACTIC = "syntactic"

    def accepts(self, tier: BoundaryTier) -> bool:
        if self is TierFilter.BINARY:
            return True
        if self is TierFilter.ORTHOGRAPHIC:
            return tier.is_orthographic
        return tier.is_syntactic


@dataclass(frozen=True)
class AgreementReport:
    dice_binary: float
    dice_orthographic: float
    dice_syntactic: float
    kappa_binary: float
    kappa_orthographic: float
    kappa_syntactic: float
    n_items: int
    n_annotators: int

    def dice(self, f: TierFilter) -> float:
        return getattr(self, f"dice_{f.value}")

    def kappa(self, f: TierFilter) -> float:
        return getattr(self, f"kappa_{f.value}")


def candidate_positions(document: Document, tokens: Sequence[Token]) -> List[int]:
    """Token ends that could hold a boundary, minus the forced paragraph ends."""
    forced = set(paragraph_final_offsets(document, tokens))
    return [t.end for t in tokens if t.end not in forced]


def _boundary_set(ann: AnnotationSet, tier_filter: TierFilter, items: Optional[Set[Item]] = None) -> Set[Item]:
    out = set()
    for doc_id, seg in ann.segmentations.items():
        for b in seg.boundaries:
            if tier_filter.accepts(b.tier) and (items is None or (doc_id, b.offset) in items):
                out.add((doc_id, b.offset))
    return out


def _item_set(positions) -> Optional[Set[Item]]:
    if positions is None:
        return None
    return {(doc_id, o) for doc_id, offs in positions.items() for o in offs}


def dice(
    annotations: Sequence[AnnotationSet],
    tier_filter: TierFilter = TierFilter.BINARY,
    positions: Optional[Mapping[str, Iterable[int]]] = None,
) -> float:
    """Mean pairwise Dice coefficient of the annotators' boundary sets.

    With ``positions`` (doc id -> candidate offsets) only boundaries at those
    positions are compared.  A pair of empty sets counts as full agreement.
    """
    if len(annotations) < 2:
        raise ValueError("Dice needs at least two annotators")
    items = _item_set(positions)
    sets = [_boundary_set(a, tier_filter, items) for a in annotations]
    scores = []
    for a, b in itertools.combinations(sets, 2):
        denom = len(a) + len(b)
        scores.append(1.0 if denom == 0 else 2 * len(a & b) / denom)
    return sum(scores) / len(scores)


def rating_matrix(
    annotations: Sequence[AnnotationSet],
    tier_filter: TierFilter,
    positions: Mapping[str, Iterable[int]],
) -> List[Tuple[int, int]]:
    """Per item ``(n_boundary, n_no_boundary)`` counts, items ordered by (doc, offset)."""
    for ann in annotations:
        missing = [d for d in positions if d not in ann.segmentations]
        if missing:
            raise CoverageError(
                f"annotator {ann.annotator_id!r} has no annotation for document(s) {', '.join(sorted(missing))}"
            )
    marked = [_boundary_set(a, tier_filter) for a in annotations]
    n = len(annotations)
    rows = []
    for doc_id in sorted(positions):
        for offset in sorted(set(positions[doc_id])):
            yes = sum((doc_id, offset) in m for m in marked)
            rows.append((yes, n - yes))
    return rows


def fleiss_kappa_from_counts(rows: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa from an items x categories count matrix with a constant number of raters."""
    if not rows:
        raise ValueError("Fleiss' kappa needs at least one item")
    n = sum(rows[0])
    if n < 2 or any(sum(r) != n for r in rows):
        raise ValueError("every item needs the same number (>= 2) of ratings")
    n_items = len(rows)
    p_bar = sum(sum(c * (c - 1) for c in r) for r in rows) / (n_items * n * (n - 1))
    k = len(rows[0])
    p_j = [sum(r[j] for r in rows) / (n_items * n) for j in range(k)]
    p_e = sum(p * p for p in p_j)
    if p_e == 1.0:
        return 1.0 if p_bar == 1.0 else 0.0
    return (p_bar - p_e) / (1.0 - p_e)


def fleiss_kappa(
    annotations: Sequence[AnnotationSet],
    tier_filter: TierFilter,
    positions: Mapping[str, Iterable[int]],
) -> float:
    """Fleiss' kappa of boundary present/absent decisions at the candidate positions."""
    if len(annotations) < 2:
        raise ValueError("Fleiss' kappa needs at least two annotators")
    return fleiss_kappa_from_counts(rating_matrix(annotations, tier_filter, positions))


def agreement_report(
    annotations: Sequence[AnnotationSet], positions: Mapping[str, Iterable[int]]
) -> AgreementReport:
    positions = {d: sorted(set(o)) for d, o in positions.items()}
    values = {}
    for f in TierFilter:
        values[f"dice_{f.value}"] = dice(annotations, f, positions)
        values[f"kappa_{f.value}"] = fleiss_kappa(annotations, f, positions)
    return AgreementReport(
        n_items=sum(len(o) for o in positions.values()),
        n_annotators=len(annotations),
        **values,
    )


def fleiss_kappa_variable(rows: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa when items may have different numbers (>= 2) of raters.

    Observed agreement is averaged per item and category proportions are
    pooled over all ratings; with a constant rater count this equals
    :func:`fleiss_kappa_from_counts`.
    """
    if not rows:
        raise ValueError("Fleiss' kappa needs at least one item")
    if any(sum(r) < 2 for r in rows):
        raise ValueError("every item needs at least two ratings")
    p_bar = sum(sum(c * (c - 1) for c in r) / (sum(r) * (sum(r) - 1)) for r in rows) / len(rows)
    total = sum(sum(r) for r in rows)
    p_e = sum((sum(r[j] for r in rows) / total) ** 2 for j in range(len(rows[0])))
    if p_e == 1.0:
        return 1.0 if p_bar == 1.0 else 0.0
    return (p_bar - p_e) / (1.0 - p_e)


def pooled_agreement_report(
    annotations: Sequence[AnnotationSet], positions: Mapping[str, Iterable[int]]
) -> AgreementReport:
    """Agreement over documents annotated by different subsets of annotators.

    Each document is rated by whoever annotated it (documents with fewer
    than two annotators are skipped).  Kappa uses the variable-rater form;
    Dice averages, over annotator pairs sharing at least one document, the
    coefficient on their shared documents.
    """
    positions = {d: sorted(set(o)) for d, o in positions.items()}
    raters = {d: [a for a in annotations if d in a.segmentations] for d in positions}
    docs = sorted(d for d, who in raters.items() if len(who) >= 2)
    if not docs:
        raise CoverageError("no document has two or more annotators")
    values = {}
    for f in TierFilter:
        rows = []
        for d in docs:
            marked = [_boundary_set(a, f) for a in raters[d]]
            for o in positions[d]:
                yes = sum((d, o) in m for m in marked)
                rows.append((yes, len(marked) - yes))
        scores = []
        for a, b in itertools.combinations(annotations, 2):
            shared = [d for d in docs if d in a.segmentations and d in b.segmentations]
            if not shared:
                continue
            items = {(d, o) for d in shared for o in positions[d]}
            sa, sb = _boundary_set(a, f, items), _boundary_set(b, f, items)
            denom = len(sa) + len(sb)
            scores.append(1.0 if denom == 0 else 2 * len(sa & sb) / denom)
        values[f"dice_{f.value}"] = sum(scores) / len(scores)
        values[f"kappa_{f.value}"] = fleiss_kappa_variable(rows) if rows else 1.0
    return AgreementReport(
        n_items=sum(len(positions[d]) for d in docs),
        n_annotators=len({a.annotator_id for d in docs for a in raters[d]}),
        **values,
    )


def format_agreement_tsv(report: AgreementReport) -> str:
    lines = ["boundary\tdice\tfleiss_kappa"]
    for f in TierFilter:
        lines.append(f"{f.value}\t{report.dice(f):.6f}\t{report.kappa(f):.6f}")
    lines.append(f"# items={report.n_items}\tannotators={report.n_annotators}")
    return "\n".join(lines) + "\n"


def format_agreement_table(report: AgreementReport) -> str:
    names = {TierFilter.BINARY: "Binary boundary", TierFilter.ORTHOGRAPHIC: "Orthographic boundary",
             TierFilter.SYNTACTIC: "Syntactic boundary"}
    out = [f"{'':<22}  {'Dice':>6}  {'Fleiss k':>8}"]
    for f in TierFilter:
        out.append(f"{names[f]:<22}  {report.dice(f):6.2f}  {report.kappa(f):8.2f}")
    out.append(f"({report.n_items} items, {report.n_annotators} annotators)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# majority aggregation


def aggregate_majority(
    annotations: Sequence[AnnotationSet], n_required: int, doc_id: Optional[str] = None
) -> Segmentation:
    """Gold boundaries for one document by independent per-tier vote thresholds.

    A Both vote counts for both tiers.  An offset is kept as Both when both
    tiers reach ``n_required`` votes, otherwise as the single tier that does.
    """
    if n_required < 1:
        raise ValueError("n_required must be at least 1")
    if doc_id is None:
        ids = {d for a in annotations for d in a.segmentations}
        if len(ids) != 1:
            raise ValueError("doc_id is required when annotations cover several documents")
        doc_id = ids.pop()
    voters = [a for a in annotations if doc_id in a.segmentations]
    if n_required > len(voters):
        raise ValueError(
            f"n_required={n_required} exceeds the {len(voters)} annotator(s) of document {doc_id!r}"
        )
    ortho: Counter = Counter()
    synt: Counter = Counter()
    for ann in voters:
        for b in ann.segmentations[doc_id].boundaries:
            if b.tier.is_orthographic:
                ortho[b.offset] += 1
            if b.tier.is_syntactic:
                synt[b.offset] += 1
    bounds = []
    for offset in sorted(set(ortho) | set(synt)):
        tier = BoundaryTier.combine(ortho[offset] >= n_required, synt[offset] >= n_required)
        if tier is not None:
            bounds.append(Boundary(offset, tier))
    return Segmentation(doc_id, tuple(bounds))


def aggregate_corpus(
    annotations: Sequence[AnnotationSet], n_required: int
) -> Dict[str, Segmentation]:
    doc_ids = sorted({d for a in annotations for d in a.segmentations})
    return {d: aggregate_majority(annotations, n_required, d) for d in doc_ids}
