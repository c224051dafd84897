"""Probability trees and staged trees.

A staged tree is a rooted ordered tree in which every inner vertex carries a
stage id and a designated "downward" outgoing edge.  Vertices in the same
stage share their vector of edge probabilities, so parameters live at the
level of (stage id, edge index) pairs.

Conventions used throughout the package:

* inner vertices are enumerated v_1, ..., v_k breadth-first from the root,
  with the child order as given in the tree description;
* edge indices j are 1-based, following the declared child order;
* atoms (root-to-leaf paths) are enumerated depth-first following the edge
  order, so the path that always takes edge 1 comes first.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping
from functools import cached_property
from typing import Iterable, Optional

from .errors import (
    CycleDetected,
    DownwardEdgeInconsistentWithinStage,
    IndexOutOfRange,
    NontrivialStaging,
    StagedTreeError,
    StageOutDegreeMismatch,
    VertexWithOneChild,
    ZeroMass,
)

SUM_TOL = 1e-12


class Atom:
    """A root-to-leaf path, stored as a tuple of (vertex, edge-index) steps."""

    __slots__ = ("steps", "leaf", "_edge_set", "_vertex_set")

    def __init__(self, steps: tuple[tuple[str, int], ...], leaf: str):
        self.steps = steps
        self.leaf = leaf
        self._edge_set = frozenset(steps)
        self._vertex_set = frozenset(v for v, _ in steps)

    def traverses(self, vertex: str, j: int) -> bool:
        return (vertex, j) in self._edge_set

    def visits(self, vertex: str) -> bool:
        return vertex in self._vertex_set or vertex == self.leaf

    def __len__(self) -> int:
        return len(self.steps)

    def __eq__(self, other) -> bool:
        return isinstance(other, Atom) and self.steps == other.steps

    def __hash__(self) -> int:
        return hash(self.steps)

    def __repr__(self) -> str:
        return "Atom(%s)" % "->".join(f"{v}:{j}" for v, j in self.steps)


class StagedTree:
    """An immutable staged tree.

    Parameters
    ----------
    children:
        mapping from vertex id to its ordered list of children; leaves may be
        omitted or mapped to an empty list.
    stages:
        optional mapping from inner vertex id to stage id; vertices not
        listed form their own singleton stage (stage id = vertex id).
    downward:
        optional mapping from stage id (or inner vertex id) to the 1-based
        index of the downward edge; defaults to the last edge.
    root:
        optional explicit root; inferred as the unique parentless vertex.
    """

    def __init__(
        self,
        children: Mapping[str, Iterable[str]],
        stages: Optional[Mapping[str, str]] = None,
        downward: Optional[Mapping[str, int]] = None,
        root: Optional[str] = None,
    ):
        self.children: dict[str, tuple[str, ...]] = {
            str(v): tuple(str(c) for c in cs) for v, cs in children.items() if cs
        }
        declared = set(self.children)
        mentioned = {c for cs in self.children.values() for c in cs}
        self.root = str(root) if root is not None else self._infer_root(declared, mentioned)
        self._validate_shape()
        self.vertices = self._bfs_order()
        self.inner = tuple(v for v in self.vertices if v in self.children)
        self.leaves = tuple(v for v in self.vertices if v not in self.children)
        self.index = {v: i + 1 for i, v in enumerate(self.inner)}

        stages = stages or {}
        self.stage_of = {v: str(stages.get(v, v)) for v in self.inner}
        self._validate_stages()
        self.downward = self._resolve_downward(downward or {})

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _infer_root(declared: set[str], mentioned: set[str]) -> str:
        candidates = declared - mentioned
        if len(candidates) != 1:
            raise CycleDetected(
                f"expected exactly one parentless vertex, found {sorted(candidates)}"
            )
        return candidates.pop()

    def _validate_shape(self) -> None:
        parent: dict[str, str] = {}
        for v, cs in self.children.items():
            if len(cs) == 1:
                raise VertexWithOneChild(f"vertex {v!r} has exactly one child")
            for c in cs:
                if c in parent:
                    raise CycleDetected(f"vertex {c!r} has two parents: {parent[c]!r}, {v!r}")
                parent[c] = v
        if self.root in parent:
            raise CycleDetected(f"root {self.root!r} has a parent")
        # every declared inner vertex must be reachable from the root
        seen = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise CycleDetected(f"vertex {v!r} reached twice")
            seen.add(v)
            stack.extend(self.children.get(v, ()))
        unreachable = set(self.children) - seen
        if unreachable:
            raise CycleDetected(f"vertices not reachable from root: {sorted(unreachable)}")

    def _bfs_order(self) -> tuple[str, ...]:
        order = []
        queue = [self.root]
        while queue:
            v = queue.pop(0)
            order.append(v)
            queue.extend(self.children.get(v, ()))
        return tuple(order)

    def _validate_stages(self) -> None:
        degree: dict[str, int] = {}
        for v in self.inner:
            s = self.stage_of[v]
            k = self.out_degree(v)
            if degree.setdefault(s, k) != k:
                raise StageOutDegreeMismatch(
                    f"stage {s!r} mixes out-degrees {degree[s]} and {k} (at vertex {v!r})"
                )

    def _resolve_downward(self, spec: Mapping[str, int]) -> dict[str, int]:
        """Return downward edge index per stage id."""
        per_stage: dict[str, int] = {}
        for key, j in spec.items():
            key = str(key)
            stage = self.stage_of.get(key, key if key in self.stage_ids else None)
            if stage is None:
                raise StagedTreeError(f"downward key {key!r} is neither a vertex nor a stage")
            j = int(j)
            if per_stage.setdefault(stage, j) != j:
                raise DownwardEdgeInconsistentWithinStage(
                    f"stage {stage!r}: conflicting downward indices {per_stage[stage]} and {j}"
                )
        for s, kappa in self.stage_degrees.items():
            j = per_stage.setdefault(s, kappa)
            if not 1 <= j <= kappa:
                raise IndexOutOfRange(f"downward index {j} out of range for stage {s!r}")
        return per_stage

    # -- basic accessors ------------------------------------------------------

    @cached_property
    def stage_ids(self) -> tuple[str, ...]:
        """Distinct stage ids, in order of first appearance (BFS)."""
        seen = dict.fromkeys(self.stage_of[v] for v in self.inner)
        return tuple(seen)

    @cached_property
    def stage_degrees(self) -> dict[str, int]:
        return {self.stage_of[v]: self.out_degree(v) for v in self.inner}

    @cached_property
    def stage_members(self) -> dict[str, tuple[str, ...]]:
        members: dict[str, list[str]] = {s: [] for s in self.stage_ids}
        for v in self.inner:
            members[self.stage_of[v]].append(v)
        return {s: tuple(vs) for s, vs in members.items()}

    def out_degree(self, v: str) -> int:
        return len(self.children.get(v, ()))

    def child(self, v: str, j: int) -> str:
        cs = self.children.get(v, ())
        if not 1 <= j <= len(cs):
            raise IndexOutOfRange(f"edge index {j} out of range at vertex {v!r}")
        return cs[j - 1]

    def downward_edge(self, v: str) -> int:
        """1-based index of the designated downward edge at inner vertex v."""
        return self.downward[self.stage_of[v]]

    def is_leaf(self, v: str) -> bool:
        return v not in self.children

    def is_star(self) -> bool:
        return len(self.inner) == 1

    def is_saturated(self) -> bool:
        """True if every inner vertex forms its own stage."""
        return len(self.stage_ids) == len(self.inner)

    @property
    def k(self) -> int:
        return len(self.inner)

    @property
    def n(self) -> int:
        return len(self.leaves)

    # -- atoms ----------------------------------------------------------------

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        """All root-to-leaf paths, depth-first in edge order."""
        out: list[Atom] = []

        def walk(v: str, steps: list[tuple[str, int]]) -> None:
            if self.is_leaf(v):
                out.append(Atom(tuple(steps), v))
                return
            for j, c in enumerate(self.children[v], start=1):
                steps.append((v, j))
                walk(c, steps)
                steps.pop()

        walk(self.root, [])
        return tuple(out)

    def indicator(self, atom: Atom, v: str, j: int) -> int:
        """Edge indicator: 1 iff the atom traverses edge j out of vertex v."""
        self.child(v, j)  # validates indices
        return int(atom.traverses(v, j))

    def indicator_vertex(self, atom: Atom, v: str) -> int:
        """Vertex indicator: 1 iff the atom visits v."""
        if v not in self.vertices:
            raise IndexOutOfRange(f"unknown vertex {v!r}")
        return int(atom.visits(v))

    # -- restaging ------------------------------------------------------------

    def with_staging(
        self,
        stages: Mapping[str, str],
        downward: Optional[Mapping[str, int]] = None,
    ) -> "StagedTree":
        """Same tree graph with a different staging."""
        return StagedTree(self.children, stages=stages, downward=downward, root=self.root)

    def saturated(self) -> "StagedTree":
        """Same tree graph with the trivial (all-singleton) staging."""
        return self.with_staging({})

    # -- serialization --------------------------------------------------------

    _SPEC_FIELDS = {"vertices", "stages", "downward"}

    @classmethod
    def from_spec(cls, spec: Mapping) -> "StagedTree":
        """Build from the JSON tree-description schema.

        ``{"vertices": [{"id": ..., "children": [...]}, ...],
           "stages": {vertex: stage, ...}, "downward": {stage: index, ...}}``
        """
        unknown = set(spec) - cls._SPEC_FIELDS
        if unknown:
            raise StagedTreeError(f"unknown tree-description fields: {sorted(unknown)}")
        try:
            vertices = spec["vertices"]
        except KeyError:
            raise StagedTreeError("tree description lacks 'vertices'") from None
        children = {}
        for entry in vertices:
            bad = set(entry) - {"id", "children"}
            if bad:
                raise StagedTreeError(f"unknown vertex fields: {sorted(bad)}")
            children[entry["id"]] = entry.get("children", [])
        return cls(children, stages=spec.get("stages"), downward=spec.get("downward"))

    def to_spec(self) -> dict:
        spec: dict = {
            "vertices": [
                {"id": v, "children": list(self.children[v])} for v in self.vertices
                if v in self.children
            ],
            "stages": {v: self.stage_of[v] for v in self.inner},
        }
        nondefault = {
            s: j for s, j in self.downward.items() if j != self.stage_degrees[s]
        }
        if nondefault:
            spec["downward"] = nondefault
        return spec

    @classmethod
    def from_json(cls, text: str) -> "StagedTree":
        return cls.from_spec(json.loads(text))

    def __repr__(self) -> str:
        return f"StagedTree(k={self.k}, n={self.n}, stages={len(self.stage_ids)})"


class ParameterVector(Mapping):
    """Edge probabilities keyed by (stage id, edge index).

    Entries are validated to lie strictly in (0, 1) and to sum to one within
    each stage (tolerance 1e-12).  Boundary values are only admitted with
    ``allow_boundary=True``, which the fitting code uses for zero-count
    maximum-likelihood estimates.
    """

    def __init__(
        self,
        values: Mapping[tuple[str, int], float],
        allow_boundary: bool = False,
    ):
        self._values = {(str(s), int(j)): float(p) for (s, j), p in values.items()}
        self.allow_boundary = allow_boundary
        by_stage: dict[str, float] = {}
        for (s, j), p in self._values.items():
            lo_ok = p > 0.0 if not allow_boundary else p >= 0.0
            hi_ok = p < 1.0 if not allow_boundary else p <= 1.0
            if not (lo_ok and hi_ok):
                raise StagedTreeError(f"label theta[{s},{j}]={p} outside the open unit interval")
            by_stage[s] = by_stage.get(s, 0.0) + p
        for s, total in by_stage.items():
            if abs(total - 1.0) > SUM_TOL:
                raise StagedTreeError(f"stage {s!r} labels sum to {total}, not 1")

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def label(self, tree: StagedTree, v: str, j: int) -> float:
        """Label of edge j out of vertex v, resolved through v's stage."""
        return self._values[(tree.stage_of[v], j)]

    def is_boundary(self) -> bool:
        return any(p in (0.0, 1.0) for p in self._values.values())

    @classmethod
    def uniform(cls, tree: StagedTree) -> "ParameterVector":
        vals = {}
        for s, kappa in tree.stage_degrees.items():
            for j in range(1, kappa + 1):
                vals[(s, j)] = 1.0 / kappa
        return cls(vals)

    @classmethod
    def random(cls, tree: StagedTree, rng) -> "ParameterVector":
        """Independent Dirichlet(1,...,1) draw per stage."""
        vals = {}
        for s, kappa in tree.stage_degrees.items():
            probs = rng.dirichlet([1.0] * kappa)
            # keep away from the boundary so downstream logs are finite
            probs = (probs + 1e-9) / (1.0 + kappa * 1e-9)
            for j, p in enumerate(probs, start=1):
                vals[(s, j)] = p
        return cls(vals)

    def validate_for(self, tree: StagedTree) -> None:
        needed = {
            (s, j) for s, kappa in tree.stage_degrees.items() for j in range(1, kappa + 1)
        }
        missing = needed - set(self._values)
        if missing:
            raise StagedTreeError(f"parameter vector lacks labels for {sorted(missing)}")


class AtomDistribution(Mapping):
    """A strictly positive probability distribution over the atoms of a tree."""

    def __init__(self, probs: Mapping[Atom, float], require_positive: bool = True):
        self._probs = dict(probs)
        total = math.fsum(self._probs.values())
        if abs(total - 1.0) > SUM_TOL:
            raise StagedTreeError(f"atom probabilities sum to {total}, not 1")
        if require_positive and any(p <= 0.0 for p in self._probs.values()):
            raise ZeroMass("atom distribution has a non-positive entry")

    def __getitem__(self, atom):
        return self._probs[atom]

    def __iter__(self):
        return iter(self._probs)

    def __len__(self):
        return len(self._probs)

    def as_list(self) -> list[float]:
        return list(self._probs.values())


# -- core operations ----------------------------------------------------------


def log_atom_probability(tree: StagedTree, theta: ParameterVector, atom: Atom) -> float:
    return math.fsum(math.log(theta.label(tree, v, j)) for v, j in atom.steps)


def atom_probability(tree: StagedTree, theta: ParameterVector, atom: Atom) -> float:
    """Product of the traversed edge labels, accumulated in log space."""
    return math.exp(log_atom_probability(tree, theta, atom))


def distribution_from_labels(tree: StagedTree, theta: ParameterVector) -> AtomDistribution:
    theta.validate_for(tree)
    return AtomDistribution({x: atom_probability(tree, theta, x) for x in tree.atoms})


def labels_from_distribution(tree: StagedTree, p: Mapping[Atom, float]) -> ParameterVector:
    """Invert an atom distribution into edge labels on a saturated tree.

    The label of edge j out of vertex v is the conditional probability of
    passing through that edge given that v is reached.
    """
    if not tree.is_saturated():
        raise NontrivialStaging("labels_from_distribution requires the trivial staging")
    if any(p[x] <= 0.0 for x in tree.atoms):
        raise ZeroMass("atom distribution has a zero entry")
    mass: dict[str, float] = {v: 0.0 for v in tree.vertices}
    edge_mass: dict[tuple[str, int], float] = {}
    for x in tree.atoms:
        px = p[x]
        mass[tree.root] += px
        for v, j in x.steps:
            edge_mass[(v, j)] = edge_mass.get((v, j), 0.0) + px
            mass[tree.child(v, j)] += px
    vals = {}
    for v in tree.inner:
        for j in range(1, tree.out_degree(v) + 1):
            vals[(tree.stage_of[v], j)] = edge_mass.get((v, j), 0.0) / mass[v]
    # renormalize away accumulated rounding so the vector validates cleanly
    for v in tree.inner:
        s = tree.stage_of[v]
        kappa = tree.out_degree(v)
        total = math.fsum(vals[(s, j)] for j in range(1, kappa + 1))
        for j in range(1, kappa + 1):
            vals[(s, j)] /= total
    return ParameterVector(vals)


def dimensions(tree: StagedTree) -> tuple[int, int]:
    """(d0, d): free parameters of the saturated and of the staged tree."""
    d0 = sum(tree.out_degree(v) - 1 for v in tree.inner)
    d = sum(kappa - 1 for kappa in tree.stage_degrees.values())
    return d0, d


def star(n: int, prefix: str = "e") -> StagedTree:
    """The star tree with n leaves."""
    return StagedTree({"r": [f"{prefix}{i}" for i in range(1, n + 1)]})


def product_tree(cards: Iterable[int]) -> StagedTree:
    """Saturated tree over the product state space with the given cardinalities.

    Vertices are named by the partial assignment, e.g. ``"v_0.1"`` for the
    vertex reached by states (0, 1).
    """
    cards = list(cards)
    children: dict[str, list[str]] = {}
    for level in range(len(cards)):
        for config in itertools.product(*(range(c) for c in cards[:level])):
            name = "v_" + ".".join(map(str, config)) if config else "v_root"
            children[name] = [
                "v_" + ".".join(map(str, config + (s,))) for s in range(cards[level])
            ]
    return StagedTree(children, root="v_root")
