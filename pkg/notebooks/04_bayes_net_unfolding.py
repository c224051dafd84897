"""
Unfolding discrete Bayesian networks into staged trees
======================================================

Any discrete Bayesian network, read in a topological variable order,
unfolds into a staged tree: one level per variable, and vertices with the
same parent configuration share a stage.  Decomposable networks (chordal
skeleton, no immoralities) always unfold to regular trees; the collider
X -> Z <- Y is the smallest network that does not.
"""

from stagedtree import (
    DiscreteBN,
    bn_edge_labels,
    bn_to_staged_tree,
    classify,
    classify_bn,
    distribution_from_labels,
    find_simple_ordering,
)

collider = DiscreteBN(
    variables=("X", "Y", "Z"),
    cards={"X": 2, "Y": 2, "Z": 2},
    edges=(("X", "Z"), ("Y", "Z")),
)
chain = DiscreteBN(
    variables=("X", "Y", "Z"),
    cards={"X": 2, "Y": 2, "Z": 2},
    edges=(("X", "Y"), ("Y", "Z")),
    cpts={
        "X": [[0.4, 0.6]],
        "Y": [[0.3, 0.7], [0.8, 0.2]],
        "Z": [[0.5, 0.5], [0.1, 0.9]],
    },
)

for name, bn in [("collider", collider), ("chain", chain)]:
    report = classify_bn(bn)
    tree = bn_to_staged_tree(bn)
    print(f"{name}: decomposable={report.decomposable}, "
          f"simple ordering={find_simple_ordering(bn)}, "
          f"tree classification={classify(tree)}")

# With CPTs attached, the unfolded tree reproduces the joint distribution.
tree = bn_to_staged_tree(chain)
theta = bn_edge_labels(chain)
dist = distribution_from_labels(tree, theta)
order = chain.default_order()
print("\nchain joint distribution via the tree:")
for atom, p in dist.items():
    assignment = {order[lvl]: j - 1 for lvl, (_, j) in enumerate(atom.steps)}
    direct = chain.joint_probability(assignment)
    print(f"  {assignment} tree={p:.6f} factorization={direct:.6f}")
