"""Fitting staged trees to categorical data: MLE, likelihood, BIC, search.

The maximum-likelihood estimate under a staging has a closed form: for every
stage, pool the edge-traversal counts of its member vertices and divide by
the pooled vertex-visit counts.  BIC uses the Schwarz convention
``d * log(N) - 2 * log-likelihood`` (smaller is better), with d the number
of free parameters of the staging.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    RowDoesNotReachLeaf,
    StagedTreeError,
    UnknownCategory,
    ZeroStageTraffic,
)
from .tree import Atom, ParameterVector, StagedTree, dimensions, log_atom_probability


class AtomTable:
    """Observed counts per atom, aligned with the tree's atom order."""

    def __init__(self, tree: StagedTree, counts: Sequence[int]):
        counts = [int(c) for c in counts]
        if len(counts) != tree.n:
            raise StagedTreeError(f"expected {tree.n} counts, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise StagedTreeError("atom counts must be non-negative")
        self.tree = tree
        self.counts = np.array(counts, dtype=np.int64)

    @property
    def n_obs(self) -> int:
        return int(self.counts.sum())

    def count(self, atom: Atom) -> int:
        return int(self.counts[self.tree.atoms.index(atom)])

    def __repr__(self) -> str:
        return f"AtomTable(n_obs={self.n_obs}, atoms={len(self.counts)})"


def _resolve_step(value: str, kappa: int, levels: Optional[Sequence[str]]) -> int:
    """Map a CSV cell onto a 1-based edge index."""
    if levels is not None:
        if value not in levels:
            raise UnknownCategory(f"category {value!r} not among {list(levels)}")
        return levels.index(value) + 1
    try:
        state = int(value)
    except ValueError:
        raise UnknownCategory(f"category {value!r} is not an integer state") from None
    if not 0 <= state < kappa:
        raise UnknownCategory(f"state {state} out of range 0..{kappa - 1}")
    return state + 1


def ingest_csv(
    source,
    tree: StagedTree,
    levels: Optional[dict[str, Sequence[str]]] = None,
) -> AtomTable:
    """Read observations into an atom table.

    Two CSV layouts are accepted, both with a header row:

    * ``atom_id,count``: direct counts, atom ids 1..n in the deterministic
      atom order;
    * one categorical column per tree level: each row traces a root-to-leaf
      path.  Cells hold 0-based integer states, or category names when a
      ``levels`` mapping (column name -> ordered category list) is given.
      Trailing cells beyond the leaf must be empty.
    """
    if isinstance(source, (str, bytes)):
        with open(source, newline="", encoding="utf-8") as fh:
            return ingest_csv(fh, tree, levels)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise StagedTreeError("empty CSV input") from None
    header = [h.strip() for h in header]
    counts = np.zeros(tree.n, dtype=np.int64)

    if header == ["atom_id", "count"]:
        for row in reader:
            if not row or not any(cell.strip() for cell in row):
                continue
            atom_id, count = int(row[0]), int(row[1])
            if not 1 <= atom_id <= tree.n:
                raise StagedTreeError(f"atom_id {atom_id} out of range 1..{tree.n}")
            counts[atom_id - 1] += count
        return AtomTable(tree, counts)

    atom_index = {x: i for i, x in enumerate(tree.atoms)}
    for row in reader:
        if not row or not any(cell.strip() for cell in row):
            continue
        v = tree.root
        steps = []
        for col, cell in zip(header, row):
            cell = cell.strip()
            if tree.is_leaf(v):
                if cell:
                    raise RowDoesNotReachLeaf(f"row {row} continues past a leaf")
                continue
            if not cell:
                raise RowDoesNotReachLeaf(f"row {row} stops before reaching a leaf")
            j = _resolve_step(cell, tree.out_degree(v), (levels or {}).get(col))
            steps.append((v, j))
            v = tree.child(v, j)
        if not tree.is_leaf(v):
            raise RowDoesNotReachLeaf(f"row {row} stops before reaching a leaf")
        counts[atom_index[Atom(tuple(steps), v)]] += 1
    return AtomTable(tree, counts)


def _stage_traffic(table: AtomTable):
    """Pooled per-stage visit and edge-traversal counts."""
    tree = table.tree
    visits = {s: 0 for s in tree.stage_ids}
    edges = {
        (s, j): 0 for s, kappa in tree.stage_degrees.items() for j in range(1, kappa + 1)
    }
    for atom, c in zip(tree.atoms, table.counts):
        c = int(c)
        if c == 0:
            continue
        for v, j in atom.steps:
            s = tree.stage_of[v]
            visits[s] += c
            edges[(s, j)] += c
    return visits, edges


def mle(tree: StagedTree, table: AtomTable, alpha: float = 0.0) -> ParameterVector:
    """Closed-form maximum-likelihood labels under the staging.

    ``alpha`` adds Laplace smoothing per stage edge; with ``alpha=0`` a stage
    that is never visited raises ZeroStageTraffic, and zero-count edges give
    a boundary estimate (the returned vector then reports ``is_boundary()``).
    """
    visits, edges = _stage_traffic(table)
    vals: dict[tuple[str, int], float] = {}
    for s, kappa in tree.stage_degrees.items():
        denom = visits[s] + alpha * kappa
        if denom == 0:
            raise ZeroStageTraffic(f"stage {s!r} receives no observations")
        for j in range(1, kappa + 1):
            vals[(s, j)] = (edges[(s, j)] + alpha) / denom
    return ParameterVector(vals, allow_boundary=True)


def log_likelihood(tree: StagedTree, theta: ParameterVector, table: AtomTable) -> float:
    """Sum of count-weighted log atom probabilities; 0 * log 0 counts as 0."""
    total = 0.0
    for atom, c in zip(tree.atoms, table.counts):
        c = int(c)
        if c == 0:
            continue
        total += c * log_atom_probability(tree, theta, atom)
    return total


@dataclass(frozen=True)
class FitResult:
    theta: ParameterVector = field(repr=False)
    log_likelihood: float
    d: int
    n_obs: int
    bic: float
    boundary: bool

    def as_dict(self) -> dict:
        return {
            "log_likelihood": self.log_likelihood,
            "d": self.d,
            "n_obs": self.n_obs,
            "bic": self.bic,
            "boundary": self.boundary,
            "theta": {f"{s},{j}": p for (s, j), p in sorted(self.theta.items())},
        }


def bic(tree: StagedTree, table: AtomTable, alpha: float = 0.0) -> FitResult:
    """Fit the staging and score it with d * log(N) - 2 * log-likelihood."""
    theta = mle(tree, table, alpha=alpha)
    ll = log_likelihood(tree, theta, table)
    _, d = dimensions(tree)
    return FitResult(
        theta=theta,
        log_likelihood=ll,
        d=d,
        n_obs=table.n_obs,
        bic=d * math.log(table.n_obs) - 2.0 * ll,
        boundary=theta.is_boundary(),
    )


@dataclass(frozen=True)
class SearchConfig:
    max_merges: Optional[int] = None
    same_depth: bool = True
    alpha: float = 0.0


@dataclass(frozen=True)
class MergeStep:
    kept: str
    absorbed: str
    bic_before: float
    bic_after: float

    @property
    def delta(self) -> float:
        return self.bic_after - self.bic_before


@dataclass(frozen=True)
class SearchResult:
    tree: StagedTree
    fit: FitResult
    trace: tuple[MergeStep, ...]


def _depths(tree: StagedTree) -> dict[str, int]:
    depth = {tree.root: 0}
    for v in tree.vertices:
        for c in tree.children.get(v, ()):
            depth[c] = depth[v] + 1
    return depth


def select_staging(
    tree: StagedTree, table: AtomTable, config: SearchConfig = SearchConfig()
) -> SearchResult:
    """Greedy backward stage merging, scored by BIC.

    Starts from the trivial staging of the given tree graph and repeatedly
    applies the merge with the best (lowest) BIC, until no merge improves
    the score or ``max_merges`` is reached.  Ties break on the
    lexicographically smallest (depth, vertex-index) candidate pair, so the
    search is deterministic.
    """
    current = tree.saturated()
    table = AtomTable(current, table.counts)
    current_fit = bic(current, table, alpha=config.alpha)
    depth = _depths(current)
    trace: list[MergeStep] = []
    limit = config.max_merges if config.max_merges is not None else float("inf")

    while len(trace) < limit:
        best = None  # (bic, sort_key, merged_tree, fit, kept, absorbed)
        stages = current.stage_ids
        members = current.stage_members
        for a_pos, sa in enumerate(stages):
            for sb in stages[a_pos + 1 :]:
                if current.stage_degrees[sa] != current.stage_degrees[sb]:
                    continue
                if current.downward[sa] != current.downward[sb]:
                    continue
                if config.same_depth and depth[members[sa][0]] != depth[members[sb][0]]:
                    continue
                merged_stages = {
                    v: (sa if s == sb else s) for v, s in current.stage_of.items()
                }
                candidate = current.with_staging(merged_stages, downward=current.downward)
                try:
                    fit = bic(candidate, AtomTable(candidate, table.counts), config.alpha)
                except ZeroStageTraffic:
                    continue
                key = (
                    fit.bic,
                    depth[members[sa][0]],
                    current.index[members[sa][0]],
                    current.index[members[sb][0]],
                )
                if best is None or key < best[0]:
                    best = (key, candidate, fit, sa, sb)
        if best is None or best[2].bic >= current_fit.bic - 1e-12:
            break
        _, candidate, fit, kept, absorbed = best
        trace.append(
            MergeStep(kept=kept, absorbed=absorbed, bic_before=current_fit.bic, bic_after=fit.bic)
        )
        current, current_fit = candidate, fit

    return SearchResult(tree=current, fit=current_fit, trace=tuple(trace))


def table_from_rows(tree: StagedTree, rows: Sequence[Sequence[int]]) -> AtomTable:
    """Convenience: build a table from 0-based state rows (testing, notebooks)."""
    text = io.StringIO()
    writer = csv.writer(text)
    depth = max(len(x) for x in tree.atoms)
    writer.writerow([f"c{i}" for i in range(depth)])
    for row in rows:
        writer.writerow(list(row))
    text.seek(0)
    return ingest_csv(text, tree)
