"""Discrete Bayesian networks and their staged-tree representation.

A BN over variables X_1, ..., X_m unfolds into the tree over the product
state space in a chosen topological order.  Two level-i vertices end up in
the same stage exactly when their histories agree on the parents of the
level-i variable, so every conditional-independence statement of the DAG is
encoded in the staging.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from .errors import OrderInconsistentWithDAG, StagedTreeError
from .tree import ParameterVector, StagedTree

CPT_ROW_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteBN:
    """A DAG over finitely-valued variables, with optional CPTs.

    ``cpts[var]`` is a list of rows, one per configuration of the parents of
    ``var`` enumerated in row-major order (parents sorted by their position
    in ``variables``); each row lists the state probabilities of ``var``.
    """

    variables: tuple[str, ...]
    cards: dict[str, int]
    edges: tuple[tuple[str, str], ...]
    cpts: Optional[dict[str, list[list[float]]]] = field(default=None)

    def __post_init__(self):
        known = set(self.variables)
        for name, card in self.cards.items():
            if card < 2:
                raise StagedTreeError(f"variable {name!r} has cardinality {card} < 2")
        for a, b in self.edges:
            if a not in known or b not in known:
                raise StagedTreeError(f"edge ({a!r}, {b!r}) references unknown variable")
        if self._has_cycle():
            raise StagedTreeError("graph over the variables is not acyclic")
        if self.cpts is not None:
            self._validate_cpts()

    def _has_cycle(self) -> bool:
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        g.add_edges_from(self.edges)
        return not nx.is_directed_acyclic_graph(g)

    def _validate_cpts(self) -> None:
        for var in self.variables:
            rows = self.cpts.get(var)
            if rows is None:
                raise StagedTreeError(f"missing CPT for {var!r}")
            n_configs = 1
            for p in self.parents(var):
                n_configs *= self.cards[p]
            if len(rows) != n_configs:
                raise StagedTreeError(
                    f"CPT for {var!r} has {len(rows)} rows, expected {n_configs}"
                )
            for row in rows:
                if len(row) != self.cards[var]:
                    raise StagedTreeError(f"CPT row for {var!r} has wrong width")
                if abs(sum(row) - 1.0) > CPT_ROW_TOL:
                    raise StagedTreeError(f"CPT row for {var!r} sums to {sum(row)}")

    def parents(self, var: str) -> tuple[str, ...]:
        """Parents of var, sorted by position in the variable list."""
        pos = {v: i for i, v in enumerate(self.variables)}
        return tuple(sorted((a for a, b in self.edges if b == var), key=pos.get))

    def topological_orders(self):
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        g.add_edges_from(self.edges)
        return nx.all_topological_sorts(g)

    def default_order(self) -> tuple[str, ...]:
        """The declaration order if topological, else a topological sort."""
        try:
            return validate_order(self, self.variables)
        except OrderInconsistentWithDAG:
            g = nx.DiGraph()
            g.add_nodes_from(self.variables)
            g.add_edges_from(self.edges)
            return tuple(nx.topological_sort(g))

    def cpt_row(self, var: str, assignment: dict[str, int]) -> list[float]:
        """CPT row of var for the parent states in the given assignment."""
        parents = self.parents(var)
        idx = 0
        for p in parents:
            idx = idx * self.cards[p] + assignment[p]
        return self.cpts[var][idx]

    def joint_probability(self, assignment: dict[str, int]) -> float:
        """Product of CPT entries for a full assignment."""
        prob = 1.0
        for var in self.variables:
            prob *= self.cpt_row(var, assignment)[assignment[var]]
        return prob

    @classmethod
    def from_spec(cls, spec: dict) -> "DiscreteBN":
        unknown = set(spec) - {"variables", "edges", "cpts"}
        if unknown:
            raise StagedTreeError(f"unknown BN fields: {sorted(unknown)}")
        variables = tuple(entry["name"] for entry in spec["variables"])
        cards = {entry["name"]: int(entry["card"]) for entry in spec["variables"]}
        edges = tuple((a, b) for a, b in spec.get("edges", []))
        return cls(variables, cards, edges, spec.get("cpts"))

    @classmethod
    def from_json(cls, text: str) -> "DiscreteBN":
        return cls.from_spec(json.loads(text))


def validate_order(bn: DiscreteBN, order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(order)
    if sorted(order) != sorted(bn.variables):
        raise OrderInconsistentWithDAG(f"order {order} is not a permutation of the variables")
    pos = {v: i for i, v in enumerate(order)}
    for a, b in bn.edges:
        if pos[a] > pos[b]:
            raise OrderInconsistentWithDAG(f"edge ({a!r}, {b!r}) goes backwards in {order}")
    return order


def _vertex_name(states: tuple[int, ...]) -> str:
    return "v_" + ".".join(map(str, states)) if states else "v_root"


def bn_to_staged_tree(bn: DiscreteBN, order: Optional[Sequence[str]] = None) -> StagedTree:
    """Unfold a BN into its staged tree in the given topological order.

    Level-i vertices (emitting the states of the i-th variable in the order)
    share a stage iff their histories agree on that variable's parents.
    """
    order = validate_order(bn, order if order is not None else bn.default_order())
    children: dict[str, list[str]] = {}
    stages: dict[str, str] = {}
    for level, var in enumerate(order):
        history = order[:level]
        parents = set(bn.parents(var))
        for states in itertools.product(*(range(bn.cards[w]) for w in history)):
            name = _vertex_name(states)
            children[name] = [_vertex_name(states + (s,)) for s in range(bn.cards[var])]
            config = tuple(
                (w, s) for w, s in zip(history, states) if w in parents
            )
            stages[name] = f"{var}|" + ",".join(f"{w}={s}" for w, s in config)
    return StagedTree(children, stages=stages, root="v_root")


def bn_edge_labels(bn: DiscreteBN, order: Optional[Sequence[str]] = None) -> ParameterVector:
    """Transfer the CPT entries onto the stages of the unfolded tree."""
    if bn.cpts is None:
        raise StagedTreeError("BN has no CPTs to transfer")
    order = validate_order(bn, order if order is not None else bn.default_order())
    vals: dict[tuple[str, int], float] = {}
    for level, var in enumerate(order):
        history = order[:level]
        parents = set(bn.parents(var))
        for states in itertools.product(*(range(bn.cards[w]) for w in history)):
            assignment = dict(zip(history, states))
            config = tuple((w, s) for w, s in assignment.items() if w in parents)
            stage = f"{var}|" + ",".join(f"{w}={s}" for w, s in config)
            row = bn.cpt_row(var, assignment)
            for j, p in enumerate(row, start=1):
                vals[(stage, j)] = p
    return ParameterVector(vals)


def skeleton(bn: DiscreteBN) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(bn.variables)
    g.add_edges_from(bn.edges)
    return g


def has_immorality(bn: DiscreteBN) -> bool:
    """True iff some vertex has two non-adjacent parents (a v-structure)."""
    skel = skeleton(bn)
    for var in bn.variables:
        for a, b in itertools.combinations(bn.parents(var), 2):
            if not skel.has_edge(a, b):
                return True
    return False


def is_decomposable(bn: DiscreteBN) -> bool:
    """No immoralities and a chordal skeleton."""
    return not has_immorality(bn) and nx.is_chordal(skeleton(bn))


def find_simple_ordering(bn: DiscreteBN) -> Optional[tuple[str, ...]]:
    """A topological order where pa(next) is contained in {current} + pa(current).

    Returns None when no topological ordering satisfies the containment.
    Depth-first search over partial orders, pruning as soon as the condition
    fails for the vertex just placed.
    """
    parents = {v: set(bn.parents(v)) for v in bn.variables}
    n = len(bn.variables)

    def extend(placed: list[str], remaining: set[str]) -> Optional[list[str]]:
        if not remaining:
            return placed
        for v in sorted(remaining):
            if parents[v] - set(placed):
                continue  # not yet topologically placeable
            if placed and not parents[v] <= ({placed[-1]} | parents[placed[-1]]):
                continue
            result = extend(placed + [v], remaining - {v})
            if result is not None:
                return result
        return None

    result = extend([], set(bn.variables))
    return tuple(result) if result is not None and len(result) == n else None


@dataclass(frozen=True)
class BNReport:
    decomposable: bool
    simple_ordering: Optional[tuple[str, ...]]
    regular_certified: bool


def classify_bn(bn: DiscreteBN) -> BNReport:
    """Certify regularity of the unfolded tree via decomposability or a simple order."""
    decomposable = is_decomposable(bn)
    simple_ordering = find_simple_ordering(bn)
    return BNReport(
        decomposable=decomposable,
        simple_ordering=simple_ordering,
        regular_certified=decomposable or simple_ordering is not None,
    )
