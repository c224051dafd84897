"""
Probability trees, atoms, and stagings
======================================

A staged tree is a rooted tree whose edges carry conditional probabilities
and whose inner vertices are grouped into *stages*: vertices in the same
stage share one vector of edge labels.  This script builds the binary
three-level event tree for three yes/no variables, stages the two middle
vertices together, and walks through the basic queries.
"""

from stagedtree import ParameterVector, StagedTree, distribution_from_labels

# Vertex v1 is the root; l1..l8 are the leaves (one per root-to-leaf path).
children = {
    "v1": ["v2", "v3"],
    "v2": ["v4", "v5"],
    "v3": ["v6", "v7"],
    "v4": ["l1", "l2"],
    "v5": ["l3", "l4"],
    "v6": ["l5", "l6"],
    "v7": ["l7", "l8"],
}

# Stage the second level: v2 and v3 answer identically no matter how the
# first variable came out.
tree = StagedTree(children, stages={"v2": "cyan", "v3": "cyan"})

print("inner vertices:", list(tree.inner))
print("number of atoms (root-to-leaf paths):", tree.n)
print("stage of v3:", tree.stage_of["v3"])

# Edge labels are keyed by (stage, edge index); one vector serves both
# members of the cyan stage.
theta = ParameterVector(
    {
        ("v1", 1): 0.3, ("v1", 2): 0.7,
        ("cyan", 1): 0.6, ("cyan", 2): 0.4,
        ("v4", 1): 0.5, ("v4", 2): 0.5,
        ("v5", 1): 0.2, ("v5", 2): 0.8,
        ("v6", 1): 0.9, ("v6", 2): 0.1,
        ("v7", 1): 0.5, ("v7", 2): 0.5,
    }
)

dist = distribution_from_labels(tree, theta)
print("\natom probabilities (each is the product along its path):")
for atom, p in dist.items():
    path = " -> ".join(f"{v}[{j}]" for v, j in atom.steps)
    print(f"  {path}: {p:.4f}")
print("total mass:", sum(dist.values()))
