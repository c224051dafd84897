"""
The exponential-family form of a staged tree
============================================

Every staged tree density can be written as p(x) = exp(eta . T(x) - psi):
T(x) collects indicators of the non-reference edges along the path x, eta
holds one log-odds-like coordinate per such edge, and psi is the cumulant.
This script computes the form numerically, checks it against the plain
product of edge labels, and prints the closed-form label expressions.
"""

import math

from stagedtree import (
    ParameterVector,
    StagedTree,
    atom_probability,
    density_expform,
    natural_parameters,
    render_formulas,
    sufficient_statistic,
)

tree = StagedTree(
    {
        "v1": ["v2", "v3"],
        "v2": ["v4", "v5"],
        "v3": ["v6", "v7"],
        "v4": ["l1", "l2"],
        "v5": ["l3", "l4"],
        "v6": ["l5", "l6"],
        "v7": ["l7", "l8"],
    }
)

theta = ParameterVector.uniform(tree)
form = natural_parameters(tree, theta)

print("natural parameters at the uniform labeling (all zero):")
for (v, j), val in form.eta.items():
    print(f"  eta[{v},{j}] = {val:+.3f}")
print(f"cumulant psi = {form.psi:.6f}  (log 8 = {math.log(8):.6f})")

# The exponential form reproduces the product-of-labels density exactly.
x = tree.atoms[0]
print("\nfirst atom:", [f"{v}[{j}]" for v, j in x.steps])
print("T(x) =", sufficient_statistic(tree, x))
print("product form:", atom_probability(tree, theta, x))
print("exp form:    ", density_expform(tree, theta, x))

# Symbolic expressions for each coordinate, with t_i the probability of
# edge 1 out of vertex i.
print("\nclosed-form expressions:")
for key, formula in render_formulas(tree).items():
    print(f"  {key} = {formula}")
