"""Building toric Fano models and reading off their valuation invariants.

A model is a set of primitive fan rays whose half-spaces cut out a
reflexive polytope, plus a Minkowski decomposition of that polytope.  Every
invariant of a cocharacter valuation reduces to support values and
centroids of the pieces.
"""

from fractions import Fraction as F

from ckstab import (ExactPolytope, TOTAL, MonomialIdealSeq, build_model,
                    log_discrepancy, monomial_lct, s_invariant,
                    t_invariant, theta_twist)

# The blowup of the plane in one point: four rays, anticanonical polytope
# split into two half-sized copies.
p = ExactPolytope.from_vertices([(-1, 2), (2, -1), (-1, 0), (0, -1)])
model = build_model([[1, 0], [0, 1], [-1, -1], [1, 1]],
                    [p.scale(F(1, 2)), p.scale(F(1, 2))],
                    name="bl1p2_halves")
print("summand barycenters:", [tuple(map(str, b)) for b in model.barycenters])
print("coupled barycenter: ", tuple(map(str, model.barycenter(TOTAL))))

# Log discrepancy is one on each primitive ray and linear on fan cones.
for eta in [(1, 0), (1, 1), (2, 2), (-1, -1), (3, 1)]:
    print(f"A{eta} =", log_discrepancy(model, eta))

# Expectation and maximal slopes of the total polarization.
eta = (1, 1)
print("\nalong eta =", eta)
print("  S =", s_invariant(model, TOTAL, eta), " T =",
      t_invariant(model, TOTAL, eta))

# The twist correction term ties all of these together: twisting the
# valuation direction shifts S by the barycenter pairing plus theta.
xi = (0, -1)
th = theta_twist(model, TOTAL, eta, xi)
print("  theta along xi =", xi, "is", th)
lhs = s_invariant(model, TOTAL, (1, 0))
rhs = (s_invariant(model, TOTAL, eta)
       + sum(b * x for b, x in zip(model.barycenter(TOTAL), xi)) + th)
assert lhs == rhs
print("  twist identity for S checked exactly")

# Thresholds of equivariant monomial ideal data come with a witness ray.
seq = MonomialIdealSeq.valuation_levels(eta, level=F(1, 2))
res = monomial_lct(model, seq)
print("\nlct of the level-1/2 valuation ideals:", res.value,
      "witness", res.witness)
print("assumption recorded:", res.assumptions[0][:40], "...")
