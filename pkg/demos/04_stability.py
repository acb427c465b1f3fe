"""The stability layer end to end: coupled Futaki vectors, thresholds,
Ding invariants, destabilizers, reduced thresholds, and the identity suite.
"""

from fractions import Fraction as F

from ckstab import (SubtorusSpec, coupled_delta, coupled_ding,
                    coupled_futaki, find_destabilizer, identity_suite,
                    j_twist, load_model, reduced_coupled_delta,
                    reduced_coupled_j, semistable_verdict,
                    twisted_ratio_profile, valuation_family)
from ckstab.cli import resolve_model_path

for name in ("p2_halves", "p1xp1_symmetric", "bl1p2_halves"):
    model = load_model(resolve_model_path(name + ".json"))
    fut = coupled_futaki(model)
    d = coupled_delta(model)
    print(f"{name}: futaki={tuple(map(str, fut.total))} "
          f"delta={d.value} witness={d.witness}")

bl = load_model(resolve_model_path("bl1p2_halves.json"))

# The threshold below one comes with a destabilizing valuation family whose
# coupled Ding invariant is negative.
res = find_destabilizer(bl)
print("\ndestabilizer direction:", res.eta, " Ding value:", res.ding.value)
print("verdict:", "semistable" if semistable_verdict(bl).semistable
      else "not semistable")

# Twisting the family moves the Ding invariant by the barycenter pairing.
fam = valuation_family(bl, (1, 1), m_max=4)
base = coupled_ding(fam).value
print("Ding of the (1,1) family:", base,
      " after probe twist:", coupled_ding(fam).probe_value)

# J norms of twisted trivial configurations, and their reduced infimum,
# which vanishes over the full torus at the cancelling twist.
print("\nJ norm of the (2,-1) twist:", j_twist(bl, "total", (2, -1)))
red = reduced_coupled_j(bl, (F(2), F(-1)))
print("reduced J over the full torus:", red.value, "at",
      tuple(map(str, red.argmin)))

# Reduced thresholds: +inf at the full torus (nothing survives twisting),
# the plain threshold at the trivial subtorus.
print("\nreduced delta, full torus:",
      reduced_coupled_delta(bl, SubtorusSpec.full(2)).value or "+inf")
print("reduced delta, trivial subtorus:",
      reduced_coupled_delta(bl, SubtorusSpec.trivial()).value)

pp = load_model(resolve_model_path("p1xp1_symmetric.json"))
print("reduced delta, product first factor:",
      reduced_coupled_delta(pp, SubtorusSpec(((1, 0),))).value)

# Ratios along twisted rays: orthogonal to the coupled barycenter they rise
# to one; otherwise they settle at the exact ray value.
prof = twisted_ratio_profile(bl, (1, 0), (1, -1), (1, 2, 4, 8, 16))
print("\nratios along the orthogonal twist:",
      [f"e={e}: {r}" for e, r in prof.ratios], "->", prof.limit)
prof2 = twisted_ratio_profile(bl, (1, 0), (1, 1), (1, 2, 4, 8, 16))
print("ratios along (1,1):",
      [f"e={e}: {r}" for e, r in prof2.ratios], "->", prof2.limit)

# And the exact identity suite ties the whole algebra together.
rep = identity_suite(bl, samples=25, seed=1)
print(f"\nidentity suite: {rep.passed} exact checks, {rep.failed} failures")
