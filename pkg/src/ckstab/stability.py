"""Coupled stability invariants and verdicts for toric Fano models.

The quantities computed here are the coupled Futaki vector (sum of summand
barycenters), twisted and reduced coupled J norms, lc slopes of filtrations,
coupled Ding invariants, coupled stability thresholds and their reduced
(torus-twisted) versions, together with a seeded verification suite that
asserts the exact algebraic identities tying all of these together.

Every numeric output is an exact rational with a provenance marker; every
threshold certificate records that the search ran over torus-invariant
cocharacter valuations.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import (ExactPolytope, Vec, _det, as_vec, centroid,
                       is_primitive, lattice_points, mat_rank, nullspace,
                       primitive_vector, solve_linear, vdot, vneg, vsub)
from .optimize import (PLTermSpec, RatioProgram, Unbounded,
                       minimize_convex_pl, minimize_pl_ratio)
from .toric import (TOTAL, TORIC_SEARCH_ASSUMPTION, MonomialIdealSeq,
                    SummandIndex, ToricFanoModel, log_discrepancy,
                    log_discrepancy_function, monomial_lct, s_invariant,
                    support_min, t_invariant, theta_twist, total_s_function,
                    total_s_sum)
from .filtration import (Filtration, FiltrationFamily,
                         SumDescriptor, UnsupportedDescriptor,
                         ValuationDescriptor, approximate, base_change,
                         construct, family_degree_grid, graded_basis,
                         is_shifted_trivial, numerics, round_weights, shift,
                         sum_filtration, trivial_family, trivial_filtration,
                         twist, twist_family, valuation_family,
                         valuation_filtration)


class StabilityError(Exception):
    pass


class DegenerateSubtorus(StabilityError):
    pass


class RankTooHigh(StabilityError):
    pass


class OptimizationInfeasible(StabilityError):
    pass


class SuiteFailure(StabilityError):
    def __init__(self, identity: str, inputs, lhs, rhs):
        super().__init__(
            f"identity {identity!r} failed on {inputs!r}: {lhs!r} != {rhs!r}")
        self.identity = identity
        self.inputs = inputs
        self.lhs = lhs
        self.rhs = rhs


CLOSED_FORM = "closed-form"
OPTIMIZED = "optimized-with-certificate"
FINITE_DEGREE = "finite-degree-estimate"


# ---------------------------------------------------------------------------
# coupled Futaki data


@dataclass(frozen=True)
class CoupledBarycenter:
    per_summand: tuple[Vec, ...]
    total: Vec

    @property
    def vanishes(self) -> bool:
        return all(x == 0 for x in self.total)


def coupled_futaki(model: ToricFanoModel) -> CoupledBarycenter:
    """Summand barycenters and their sum; the verdict is ``vanishes``."""
    per = model.barycenters
    return CoupledBarycenter(per, model.barycenter(TOTAL))


# ---------------------------------------------------------------------------
# J norms


def j_twist(model: ToricFanoModel, i: SummandIndex, xi: Sequence) -> Fraction:
    """J norm of the xi-twist of the trivial configuration on one summand
    (or the total polarization): max pairing minus barycenter pairing."""
    xi = as_vec(xi)
    p = model.summand(i)
    top = max(vdot(v, xi) for v in p.vertices)
    return top - vdot(model.barycenter(i), xi)


@dataclass(frozen=True)
class SubtorusSpec:
    """A saturated sublattice of the cocharacter lattice, by a basis."""

    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for v in self.basis:
            if not all(isinstance(x, int) for x in v):
                raise DegenerateSubtorus("subtorus basis must be integral")
        if self.basis:
            rows = [list(v) for v in self.basis]
            if mat_rank(rows) != len(self.basis):
                raise DegenerateSubtorus("subtorus basis is linearly dependent")
            k = len(self.basis)
            n = len(self.basis[0])
            minors = []
            for cols in itertools.combinations(range(n), k):
                sub = [[Fraction(rows[r][c]) for c in cols] for r in range(k)]
                minors.append(abs(_det(sub)))
            g = 0
            for mnr in minors:
                g = _gcd_frac(g, mnr)
            if g != 1:
                raise DegenerateSubtorus("subtorus basis does not span a "
                                         "saturated sublattice")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @staticmethod
    def full(rank: int) -> "SubtorusSpec":
        return SubtorusSpec(tuple(tuple(1 if j == i else 0 for j in range(rank))
                                  for i in range(rank)))

    @staticmethod
    def trivial() -> "SubtorusSpec":
        return SubtorusSpec(())

    def contains_direction(self, v: Sequence) -> bool:
        if not self.basis:
            return all(x == 0 for x in v)
        rows = [[Fraction(self.basis[j][i]) for j in range(len(self.basis))]
                for i in range(len(self.basis[0]))]
        return solve_linear(rows, as_vec(v)) is not None


def _gcd_frac(a, b: Fraction) -> Fraction:
    if b.denominator != 1:
        raise DegenerateSubtorus("non-integral minor")
    return Fraction(math.gcd(int(a), int(b)))


@dataclass(frozen=True)
class ReducedJResult:
    value: Fraction
    argmin: Vec
    provenance: str = OPTIMIZED


def reduced_coupled_j(model: ToricFanoModel, xi0: Sequence,
                      sub: Optional[SubtorusSpec] = None,
                      bases: Optional[Sequence[Sequence]] = None) -> ReducedJResult:
    """Infimum over twists in the subtorus of the summed J norms of the
    twisted-trivial family at base xi0 (or per-summand bases).

    Solved exactly through the epigraph linear program; the infimum over
    the full torus of a common-base family is zero, attained at minus the
    base twist.
    """
    xi0 = as_vec(xi0)
    if sub is None:
        sub = SubtorusSpec.full(model.rank)
    if bases is None:
        bases = [xi0] * model.num_summands
    terms = []
    for i in range(model.num_summands):
        p = model.summands[i]
        terms.append(PLTermSpec(p.vertices, model.barycenters[i],
                                as_vec(bases[i])))
    subspace = [as_vec(w) for w in sub.basis]
    try:
        value, xi = minimize_convex_pl(terms, model.rank, subspace=subspace)
    except Unbounded as exc:
        raise OptimizationInfeasible(
            "reduced J norm unbounded below; polytope kernel bug") from exc
    return ReducedJResult(value, xi)


# ---------------------------------------------------------------------------
# lc slopes and coupled Ding invariants


@dataclass(frozen=True)
class MuResult:
    value: Optional[Fraction]
    lo: Fraction
    hi: Fraction
    provenance: str


def mu_slope(f: Filtration, delta) -> MuResult:
    """The delta-lc slope of a filtration.

    For a shifted cocharacter-valuation filtration and slope delta >= 1
    this is exactly ``A(eta)/delta + shift``: the threshold of the level-t
    ideal family equals A(eta)/t for t up to A(eta), because the superlevel
    regions interpolate convexly between the whole polytope and the region
    through the origin, while above A(eta) the witness direction caps the
    threshold below delta.  For delta < 1 that closed form can overshoot,
    so only the certified interval [A + shift, maximal slope + shift] is
    returned.  For an opaque weight table the interval refers to the
    multiplicative closure of the stored degrees: the lower end comes from
    per-degree threshold tests, the upper end from the maximal stored
    slope.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise StabilityError("slope parameter must be positive")
    d = f.descriptor
    model = f.basis.model
    if isinstance(d, ValuationDescriptor):
        a = log_discrepancy(model, d.eta)
        if delta >= 1:
            mu = a / delta + d.shift
            return MuResult(mu, mu, mu, CLOSED_FORM)
        lam = t_invariant(model, f.basis.index, d.eta) + d.shift
        return MuResult(None, a + d.shift, lam, "certified-bounds")
    if isinstance(d, SumDescriptor):
        raise UnsupportedDescriptor(
            "no certified lc slope for sums of distinct valuation directions")
    lo = None
    hi = None
    for m in f.basis.degrees:
        row = f.weights[m]
        t_m = max(row.values()) / m
        hi = t_m if hi is None else max(hi, t_m)
        levels = sorted({w / m for w in row.values()})
        best = None
        for t in levels:
            seq = MonomialIdealSeq.from_generators(
                {m: [(a, w) for a, w in row.items()]}, level=t,
                summand=f.basis.index)
            res = monomial_lct(model, seq, degree=m)
            if res.value is None or res.value >= delta:
                best = t
            else:
                break
        if best is not None:
            lo = best if lo is None else max(lo, best)
    if lo is None:
        lo = min(w / m for m, row in f.weights.items() for w in row.values())
    return MuResult(None, lo, hi, FINITE_DEGREE)


@dataclass(frozen=True)
class DingResult:
    value: Fraction
    mu: Fraction
    s_values: tuple[Fraction, ...]
    delta: Fraction
    probe_xi: Vec
    probe_value: Fraction
    provenance: str = CLOSED_FORM


def coupled_ding(fam: FiltrationFamily, delta=Fraction(1)) -> DingResult:
    """Coupled Ding invariant of a descriptor-backed family: the lc slope of
    the sum filtration minus the summed expectation slopes of the members.

    For slope >= 1 the value is exact.  For smaller slopes the lc slope is
    only bounded, and the returned value is the certified lower bound, with
    the provenance field saying so.  At slope one the twist identity is
    evaluated at a probe direction and checked against the direct
    computation, so every exact value has passed one internal
    cross-validation.
    """
    delta = Fraction(delta)
    model = fam.model
    total = sum_filtration(fam)
    mu = mu_slope(total, delta)
    if mu.value is None and mu.provenance == "certified-bounds":
        mu_used, prov = mu.lo, "lower-bound"
    elif mu.value is None:
        raise UnsupportedDescriptor("coupled Ding needs a certified lc slope")
    else:
        mu_used, prov = mu.value, CLOSED_FORM
    s_vals = []
    for f in fam.members:
        n = numerics(f)
        if n.s_value is None:
            raise UnsupportedDescriptor(
                "coupled Ding needs certified expectation slopes")
        s_vals.append(n.s_value)
    value = mu_used - sum(s_vals, Fraction(0))
    probe = tuple(Fraction(1) for _ in range(model.rank))
    twisted = twist_family(fam, probe)
    t_total = sum_filtration(twisted)
    t_mu = mu_slope(t_total, delta)
    t_s = [numerics(f).s_value for f in twisted.members]
    probe_value = (t_mu.value if t_mu.value is not None else t_mu.lo) \
        - sum(t_s, Fraction(0))
    if delta == 1:
        # the barycenter twist rule is a slope-one identity
        b = model.barycenter(TOTAL)
        if probe_value != value - vdot(b, probe):
            raise StabilityError("twist identity cross-validation failed")
    return DingResult(value, mu_used, tuple(s_vals), delta, probe, probe_value,
                      provenance=prov)


def ding_of_twist(model: ToricFanoModel, fam: FiltrationFamily,
                  xi: Sequence) -> Fraction:
    """Coupled Ding invariant of the twisted family through the barycenter
    pairing formula, cross-validated against the direct computation."""
    xi = as_vec(xi)
    base = coupled_ding(fam)
    value = base.value - vdot(model.barycenter(TOTAL), xi)
    direct = coupled_ding(twist_family(fam, xi)).value
    if direct != value:
        raise StabilityError("twist formula disagrees with the direct value")
    return value


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class DeltaResult:
    value: Fraction
    witness: tuple[int, ...]
    provenance: str = OPTIMIZED
    assumptions: tuple[str, ...] = (TORIC_SEARCH_ASSUMPTION,)


def _delta_ratio_program(model: ToricFanoModel) -> RatioProgram:
    num = log_discrepancy_function(model)
    den = total_s_function(model)
    cells = [(c, nf, df) for (c, nf), (_, df) in zip(num.pieces, den.pieces)]
    return RatioProgram(num, den, cells=cells)


def coupled_delta(model: ToricFanoModel) -> DeltaResult:
    """Coupled stability threshold: the infimum over nonzero cocharacter
    directions of log discrepancy over summed expectation slopes.

    Both functions are linear on each fan cone, so the infimum is attained
    on a ray of the fan; ties return the lexicographically least primitive
    direction."""
    res = minimize_pl_ratio(_delta_ratio_program(model))
    if res.value is None:
        raise OptimizationInfeasible("threshold program had no constraining ray")
    return DeltaResult(res.value, res.witness)


@dataclass(frozen=True)
class VerdictReport:
    model_name: str
    semistable: bool
    delta: DeltaResult
    futaki: CoupledBarycenter
    assumptions: tuple[str, ...]


def semistable_verdict(model: ToricFanoModel) -> VerdictReport:
    """Semistability verdict (threshold >= 1) plus the exact toric
    dichotomy: the threshold is one exactly when the coupled Futaki vector
    vanishes, and below one with a strictly pairing witness otherwise."""
    d = coupled_delta(model)
    fut = coupled_futaki(model)
    if fut.vanishes:
        if d.value != 1:
            raise StabilityError("dichotomy violated: vanishing Futaki but "
                                 f"threshold {d.value}")
    else:
        if not (d.value < 1 and vdot(fut.total, d.witness) > 0):
            raise StabilityError("dichotomy violated: nonvanishing Futaki but "
                                 f"threshold {d.value} at {d.witness}")
    return VerdictReport(model.name, d.value >= 1, d, fut, d.assumptions)


@dataclass(frozen=True)
class DestabilizerResult:
    eta: tuple[int, ...]
    family: FiltrationFamily
    ding: DingResult


def find_destabilizer(model: ToricFanoModel, m_max: int = 6) -> Optional[DestabilizerResult]:
    """If the threshold is below one, the valuation family at the witness
    direction, together with its (strictly negative) coupled Ding value."""
    d = coupled_delta(model)
    if d.value >= 1:
        return None
    fam = valuation_family(model, d.witness, m_max=m_max)
    ding = coupled_ding(fam)
    if ding.value >= 0:
        raise StabilityError("witness family failed to destabilize")
    return DestabilizerResult(d.witness, fam, ding)


# ---------------------------------------------------------------------------
# reduced threshold


@dataclass(frozen=True)
class InnerSup:
    value: Fraction
    attained: bool
    argument: Optional[Vec]          # eta + xi achieving the value
    recession: Optional[Vec]         # direction approaching it, if not attained


def _ratio_at(model: ToricFanoModel, z: Sequence) -> Fraction:
    a = log_discrepancy(model, z)
    s = total_s_sum(model, z)
    if s <= 0:
        raise StabilityError(f"nonpositive slope sum at {tuple(z)}")
    return a / s


def inner_twist_sup(model: ToricFanoModel, sub: SubtorusSpec,
                    eta: Sequence) -> InnerSup:
    """Exact sup over subtorus twists xi of the ratio at eta + xi.

    Per fan cone the ratio is linear-fractional in the twist parameters
    with positive denominator, so the supremum over each cell is attained
    at a vertex or approached along an extreme recession direction, whose
    limit value is the ratio at the direction itself.
    """
    eta = as_vec(eta)
    if sub.contains_direction(eta):
        raise StabilityError("slice direction lies in the subtorus")
    W = [as_vec(w) for w in sub.basis]
    s = len(W)
    if s == 0:
        return InnerSup(_ratio_at(model, eta), True, eta, None)
    best: Optional[InnerSup] = None

    def consider(cand: InnerSup):
        nonlocal best
        if best is None or cand.value > best.value or (
                cand.value == best.value and not best.attained and cand.attained):
            best = cand

    for cone in model.fan:
        rows = []
        for n in cone.facets:
            rows.append(([vdot(n, w) for w in W], -vdot(n, eta)))
        if any(all(x == 0 for x in a) and c > 0 for a, c in rows):
            continue
        rows = [(a, c) for a, c in rows if any(x != 0 for x in a)]
        # vertices of the cell in twist coordinates
        for subset in itertools.combinations(range(len(rows)), s):
            mat = [rows[i][0] for i in subset]
            if mat_rank(mat) < s:
                continue
            t = solve_linear(mat, [rows[i][1] for i in subset])
            if t is None or not all(vdot(a, t) >= c for a, c in rows):
                continue
            z = eta
            for tj, w in zip(t, W):
                z = tuple(x + tj * y for x, y in zip(z, w))
            if cone.contains(z):
                consider(InnerSup(_ratio_at(model, z), True, z, None))
        # recession directions of the cell
        dirs: list[Vec] = []
        if s == 1:
            for cand in ((Fraction(1),), (Fraction(-1),)):
                if all(vdot(a, cand) >= 0 for a, _ in rows):
                    dirs.append(cand)
        else:
            homo = [a for a, _ in rows]
            for lin in nullspace(homo, s):
                dirs.extend([lin, vneg(lin)])
            for subset in itertools.combinations(range(len(homo)), s - 1):
                ns = nullspace([homo[i] for i in subset], s)
                if len(ns) != 1:
                    continue
                for cand in (ns[0], vneg(ns[0])):
                    if all(vdot(a, cand) >= 0 for a in homo):
                        dirs.append(cand)
        for d in dirs:
            zd = tuple(sum(dj * w[c] for dj, w in zip(d, W)) for c in range(model.rank))
            if any(x != 0 for x in zd) and cone.contains(zd):
                consider(InnerSup(_ratio_at(model, zd), False, None, zd))
    if best is None:
        raise StabilityError("twist slice met no fan cone; fan incomplete")
    return best


@dataclass(frozen=True)
class ReducedDeltaResult:
    value: Optional[Fraction]        # None encodes +infinity
    witness: Optional[tuple[int, ...]]
    inner: Optional[InnerSup]
    provenance: str
    assumptions: tuple[str, ...] = (TORIC_SEARCH_ASSUMPTION,)
    note: str = ""


def reduced_coupled_delta(model: ToricFanoModel, sub: SubtorusSpec) -> ReducedDeltaResult:
    """Reduced coupled stability threshold with respect to a subtorus.

    For the full torus every cocharacter valuation is a twist of the
    trivial one, the infimum runs over an empty set, and the value is plus
    infinity.  For the trivial subtorus no twisting is allowed and the
    value equals the plain threshold.  In rank two with a one-dimensional
    subtorus the quotient of slice directions is one-dimensional, so the
    two primitive coset representatives give the exact infimum.
    """
    rank = model.rank
    for v in sub.basis:
        if len(v) != rank:
            raise DegenerateSubtorus("subtorus basis rank mismatch")
    if sub.dim == rank:
        return ReducedDeltaResult(
            None, None, None, CLOSED_FORM,
            note="every invariant valuation is a twist of the trivial one; "
                 "the infimum runs over an empty set")
    if sub.dim == 0:
        d = coupled_delta(model)
        return ReducedDeltaResult(d.value, d.witness,
                                  InnerSup(d.value, True, as_vec(d.witness), None),
                                  d.provenance)
    if rank > 2:
        raise RankTooHigh("exact reduced threshold implemented for rank <= 2; "
                          "use sampled bounds instead")
    # rank 2, one-dimensional subtorus: complete the basis unimodularly
    w = sub.basis[0]
    g, x, y = _ext_gcd(w[0], w[1])
    if g not in (1, -1):
        raise DegenerateSubtorus("subtorus direction is not primitive")
    # det(w, (y, -x)) = -(w0 x + w1 y) = -g, so (y, -x) completes w to a
    # lattice basis and its two signs represent all slice cosets
    eta0 = (y, -x)
    best_val: Optional[Fraction] = None
    best_dir = None
    best_inner = None
    for cand in (eta0, tuple(-c for c in eta0)):
        inner = inner_twist_sup(model, sub, cand)
        if best_val is None or inner.value < best_val or (
                inner.value == best_val and cand < best_dir):
            best_val, best_dir, best_inner = inner.value, cand, inner
    note = "" if best_inner.attained else (
        "inner supremum approached along a recession twist direction")
    return ReducedDeltaResult(best_val, primitive_vector(best_dir), best_inner,
                              OPTIMIZED, note=note)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g."""
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


# ---------------------------------------------------------------------------
# distances (squared, exact) for the growth and norm bounds


def inradius_squared(p: ExactPolytope, point: Sequence) -> Fraction:
    """Squared distance from an interior point to the polytope boundary."""
    point = as_vec(point)
    best = None
    for h in p.halfspaces:
        num = (vdot(point, h.normal) - h.offset) ** 2
        den = vdot(h.normal, h.normal)
        d2 = num / den
        if best is None or d2 < best:
            best = d2
    return best


def dist2_to_affine(point: Sequence, base: Sequence,
                    directions: Sequence[Sequence]) -> Fraction:
    """Squared distance from a point to base + span(directions)."""
    point, base = as_vec(point), as_vec(base)
    diff = vsub(point, base)
    if not directions:
        return vdot(diff, diff)
    dirs = [as_vec(d) for d in directions]
    gram = [[vdot(a, b) for b in dirs] for a in dirs]
    rhs = [vdot(diff, d) for d in dirs]
    t = solve_linear(gram, rhs)
    res = diff
    for tj, d in zip(t, dirs):
        res = tuple(r - tj * x for r, x in zip(res, d))
    return vdot(res, res)


def mean_slope_decay_constant(model: ToricFanoModel) -> Fraction:
    """A computed constant c such that the lattice mean of the dilated
    anticanonical polytope approaches the centroid at rate c/m.

    Crude but certified for the tested range: the deviation is controlled
    by the boundary layer, whose share of lattice points decays like the
    boundary count over the total count, scaled by the diameter.
    """
    p = model.anticanonical
    pts = lattice_points(p)
    interior = [q for q in pts
                if all(vdot(q, h.normal) > h.offset for h in p.halfspaces)]
    boundary = len(pts) - len(interior)
    diam = max(max(v[i] for v in p.vertices) - min(v[i] for v in p.vertices)
               for i in range(p.rank))
    return 4 * Fraction(diam) * Fraction(boundary, max(len(pts), 1))


# ---------------------------------------------------------------------------
# ratio limit along twisted rays


@dataclass(frozen=True)
class TwistRayLimit:
    ratios: tuple[tuple[int, Fraction], ...]
    limit: Fraction
    kappa: Fraction
    entry: int                       # exponent from which one cone holds


def twisted_ratio_profile(model: ToricFanoModel, eta: Sequence, xi: Sequence,
                          exponents: Sequence[int]) -> TwistRayLimit:
    """Exact ratios A/(sum of S) at eta + e*xi, their asymptotic value, and
    a certified 1/e rate constant.

    For large e the point lies in one fan cone, where both functions are
    linear, so the ratio is a Moebius function of e; the limit is the ratio
    at xi and the deviation is bounded by kappa/e from the cone entry on.
    """
    eta, xi = as_vec(eta), as_vec(xi)
    ratios = tuple((e, _ratio_at(model, tuple(h + e * x for h, x in zip(eta, xi))))
                   for e in sorted(exponents))
    cone = None
    for c in model.fan:
        if c.contains(xi):
            entry_bounds = []
            ok = True
            for n in c.facets:
                nx = vdot(n, xi)
                nh = vdot(n, eta)
                if nx > 0:
                    if nh < 0:
                        entry_bounds.append(-nh / nx)
                elif nx == 0:
                    if nh < 0:
                        ok = False
                        break
                else:
                    ok = False
                    break
            if ok:
                cone = c
                entry = max([Fraction(0)] + entry_bounds)
                break
    if cone is None:
        raise StabilityError("no fan cone absorbs the twisted ray")
    idx = model.fan.index(cone)
    a_form = vneg(model.total_forms[idx])
    b = model.barycenter(TOTAL)
    s_form = vsub(b, model.total_forms[idx])
    a1, a2 = vdot(a_form, eta), vdot(a_form, xi)
    s1, s2 = vdot(s_form, eta), vdot(s_form, xi)
    if s2 <= 0:
        raise StabilityError("slope sum must grow along the twist direction")
    limit = a2 / s2
    cross = abs(a1 * s2 - a2 * s1)
    entry_int = max(1, math.ceil(entry))
    if s1 >= 0:
        kappa = cross / (s2 * s2)
    else:
        e_min = max(entry_int, -int(2 * s1 // s2) + 1)
        entry_int = max(entry_int, e_min)
        kappa = 2 * cross / (s2 * s2)
    for e, r in ratios:
        if e >= entry_int and abs(r - limit) * e > kappa:
            raise StabilityError("rate certificate violated; internal bug")
    return TwistRayLimit(ratios, limit, kappa, entry_int)


# ---------------------------------------------------------------------------
# the identity suite


@dataclass
class SuiteReport:
    model_name: str
    seed: int
    samples: int
    passed: int
    failed: int
    cases: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "seed": self.seed,
            "samples": self.samples,
            "passed": self.passed,
            "failed": self.failed,
            "cases": dict(sorted(self.cases.items())),
        }


def _rand_frac(rng: random.Random, span: int = 3) -> Fraction:
    den = rng.choice([1, 2, 3, 4])
    return Fraction(rng.randint(-span * den, span * den), den)


def _rand_vec(rng: random.Random, rank: int, span: int = 3) -> Vec:
    return tuple(_rand_frac(rng, span) for _ in range(rank))


def _rand_int_vec(rng: random.Random, rank: int, span: int = 3,
                  nonzero: bool = False) -> tuple[int, ...]:
    while True:
        v = tuple(rng.randint(-span, span) for _ in range(rank))
        if not nonzero or any(x != 0 for x in v):
            return v


def _assert_eq(identity: str, inputs, lhs, rhs):
    if lhs != rhs:
        raise SuiteFailure(identity, inputs, lhs, rhs)


def _assert_true(identity: str, inputs, ok: bool, lhs=None, rhs=None):
    if not ok:
        raise SuiteFailure(identity, inputs, lhs, rhs)


def identity_suite(model: ToricFanoModel, samples: int = 100, seed: int = 0,
                   m_max: int = 4) -> SuiteReport:
    """Run every exact identity check on seeded samples.

    All assertions are exact rational equalities or inequalities; the first
    failure raises :class:`SuiteFailure` with the inputs and both sides.
    The report counts the checked cases per identity and is byte-stable for
    a fixed model, seed, and sample count.
    """
    rng = random.Random(seed)
    rank = model.rank
    k = model.num_summands
    cases: dict[str, int] = {}

    def bump(name: str, n: int = 1):
        cases[name] = cases.get(name, 0) + n

    grid = family_degree_grid(model, m_max)
    bases = [graded_basis(model, i, m_max=m_max, step=grid[0]) for i in range(k)]
    b_total = model.barycenter(TOTAL)

    # cached-barycenter consistency; this is what fault injection trips
    for i in range(k):
        _assert_eq("barycenter-cache-consistency", (model.name, i),
                   centroid(model.summands[i]), model.barycenters[i])
        bump("barycenter-cache-consistency")
    _assert_eq("barycenter-cache-consistency", (model.name, "total"),
               tuple(sum(c[j] for c in model.barycenters) for j in range(rank)),
               b_total)

    for case in range(samples):
        eta = _rand_vec(rng, rank)
        xi = _rand_vec(rng, rank)
        eta_xi = tuple(a + b for a, b in zip(eta, xi))

        # twist correction additivity over the decomposition
        _assert_eq("theta-additivity", (eta, xi),
                   theta_twist(model, TOTAL, eta, xi),
                   sum((theta_twist(model, i, eta, xi) for i in range(k)),
                       Fraction(0)))
        bump("theta-additivity")

        # expectation slope under twisting
        for i in range(k):
            _assert_eq("s-invariant-twist", (i, eta, xi),
                       s_invariant(model, i, eta_xi),
                       s_invariant(model, i, eta) + vdot(model.barycenters[i], xi)
                       + theta_twist(model, i, eta, xi))
        bump("s-invariant-twist", k)

        # log discrepancy under twisting
        _assert_eq("log-discrepancy-twist", (eta, xi),
                   log_discrepancy(model, eta_xi) - log_discrepancy(model, eta),
                   theta_twist(model, TOTAL, eta, xi))
        bump("log-discrepancy-twist")

        # discrepancy minus slope sum is twist-equivariant via the barycenter
        _assert_eq("a-minus-s-twist", (eta, xi),
                   log_discrepancy(model, eta_xi) - total_s_sum(model, eta_xi),
                   log_discrepancy(model, eta) - total_s_sum(model, eta)
                   - vdot(b_total, xi))
        bump("a-minus-s-twist")

        # homogeneity
        e = Fraction(rng.randint(1, 8), rng.choice([1, 2]))
        scaled = tuple(e * x for x in eta)
        _assert_eq("degree-one-homogeneity", (eta, e),
                   log_discrepancy(model, scaled),
                   e * log_discrepancy(model, eta))
        _assert_eq("degree-one-homogeneity", (eta, e),
                   total_s_sum(model, scaled), e * total_s_sum(model, eta))
        bump("degree-one-homogeneity", 2)

        # reflexive duality
        _assert_eq("reflexive-support-duality", (eta,),
                   support_min(model, TOTAL, eta), -log_discrepancy(model, eta))
        bump("reflexive-support-duality")

        # barycenter sum is invariant under balanced retranslations
        shifts = [_rand_vec(rng, rank, span=2) for _ in range(k - 1)]
        shifts.append(tuple(-sum(s[j] for s in shifts) if shifts else Fraction(0)
                            for j in range(rank)))
        if k == 1:
            shifts = [tuple(Fraction(0) for _ in range(rank))]
        moved = [centroid(model.summands[i].translate(shifts[i])) for i in range(k)]
        _assert_eq("barycenter-sum-translation-invariance", tuple(shifts),
                   tuple(sum(c[j] for c in moved) for j in range(rank)), b_total)
        bump("barycenter-sum-translation-invariance")

    # table identities on a smaller sample budget per case, same totals
    for case in range(samples):
        eta = _rand_vec(rng, rank, span=2)
        xi = _rand_vec(rng, rank, span=2)
        i = rng.randrange(k)
        f = valuation_filtration(bases[i], eta)

        th = theta_twist(model, i, eta, xi)
        lhs = twist(f, xi)
        rhs = shift(valuation_filtration(bases[i],
                                         tuple(a + b for a, b in zip(eta, xi))),
                    -th)
        _assert_true("twist-of-valuation-table", (i, eta, xi),
                     lhs.table_equal(rhs), lhs.weights, rhs.weights)
        bump("twist-of-valuation-table")

        # shift composition and twist inversion
        c1, c2 = _rand_frac(rng), _rand_frac(rng)
        _assert_true("shift-composition", (i, c1, c2),
                     shift(shift(f, c1), c2).table_equal(shift(f, c1 + c2)))
        _assert_true("twist-inversion", (i, xi),
                     twist(twist(f, xi), vneg(xi)).table_equal(f))
        bump("shift-composition")
        bump("twist-inversion")

    suite_etas = [_rand_vec(rng, rank, span=2) for _ in range(samples)]
    for sample_no, eta in enumerate(suite_etas):
        fam = FiltrationFamily(model, tuple(
            valuation_filtration(bases[i], eta) for i in range(k)))
        total = sum_filtration(fam)

        # maximal slope additivity, degree by degree
        for m in grid:
            _assert_eq("sum-lambda-max-additivity", (eta, m),
                       max(total.weights[m].values()),
                       sum((max(f.weights[m].values()) for f in fam.members),
                           Fraction(0)))
        bump("sum-lambda-max-additivity", len(grid))

        # mixed directions per summand keep the additivity
        etas = [_rand_vec(rng, rank, span=2) for _ in range(k)]
        fam_mixed = FiltrationFamily(model, tuple(
            valuation_filtration(bases[i], etas[i]) for i in range(k)))
        total_mixed = sum_filtration(fam_mixed)
        for m in grid:
            _assert_eq("sum-lambda-max-additivity", (tuple(etas), m),
                       max(total_mixed.weights[m].values()),
                       sum((max(f.weights[m].values()) for f in fam_mixed.members),
                           Fraction(0)))
        bump("sum-lambda-max-additivity", len(grid))

        # shift and twist commute with the sum
        cs = [_rand_frac(rng) for _ in range(k)]
        xi = _rand_vec(rng, rank, span=2)
        lhs = sum_filtration(FiltrationFamily(model, tuple(
            shift(f, c) for f, c in zip(fam_mixed.members, cs))))
        rhs = shift(total_mixed, sum(cs, Fraction(0)))
        _assert_true("sum-shift-commutation", (tuple(etas), tuple(cs)),
                     lhs.table_equal(rhs))
        bump("sum-shift-commutation")
        lhs = sum_filtration(twist_family(fam_mixed, xi))
        rhs = twist(total_mixed, xi)
        _assert_true("sum-twist-commutation", (tuple(etas), xi),
                     lhs.table_equal(rhs))
        bump("sum-twist-commutation")

        # approximation commutes with the sum
        m0 = grid[0]
        lhs = sum_filtration(FiltrationFamily(model, tuple(
            approximate(f, m0) for f in fam_mixed.members)))
        rhs = approximate(total_mixed, m0)
        _assert_true("sum-approximation-compatibility", (tuple(etas), m0),
                     lhs.table_equal(rhs))
        bump("sum-approximation-compatibility")

        # base change commutes with the sum, and with integral twists
        int_eta = _rand_int_vec(rng, rank, span=2)
        fam_int = FiltrationFamily(model, tuple(
            valuation_filtration(bases[i], int_eta) for i in range(k)))
        e = rng.choice([2, 3])
        lhs = sum_filtration(FiltrationFamily(model, tuple(
            base_change(f, e) for f in fam_int.members)))
        rhs = base_change(sum_filtration(fam_int), e)
        _assert_true("sum-base-change-compatibility", (int_eta, e),
                     lhs.table_equal(rhs))
        bump("sum-base-change-compatibility")
        int_xi = _rand_int_vec(rng, rank, span=2)
        for f in fam_int.members:
            lhs = twist(base_change(f, e), tuple(e * x for x in int_xi))
            rhs = base_change(twist(f, int_xi), e)
            _assert_true("base-change-twist-compatibility",
                         (f.basis.index, int_eta, int_xi, e),
                         lhs.table_equal(rhs))
            n_lhs, n_rhs = numerics(lhs), numerics(base_change(f, e))
            for m in grid:
                _assert_eq("base-change-slope-scaling", (f.basis.index, e, m),
                           n_rhs.s_by_degree[m],
                           e * numerics(f).s_by_degree[m])
        bump("base-change-twist-compatibility", k)
        bump("base-change-slope-scaling", k * len(grid))

        # coupled Ding twist rule, direct against formula; the values are
        # descriptor-driven, so a single-degree grid suffices for the tables
        xi2 = _rand_vec(rng, rank, span=2)
        fam_small = valuation_family(model, eta, m_max=grid[0])
        base_ding = coupled_ding(fam_small)
        twisted = coupled_ding(twist_family(fam_small, xi2))
        _assert_eq("ding-twist", (eta, xi2),
                   twisted.value, base_ding.value - vdot(b_total, xi2))
        bump("ding-twist")

        # one-sided threshold consistency: slightly below the threshold a
        # twist restores nonnegativity of the coupled Ding invariant
        dres = coupled_delta(model)
        dprime = dres.value - min(Fraction(dres.value, 10), Fraction(1, 10))
        if sample_no % 5 == 0 and dprime > 0 and any(x != 0 for x in eta):
            if all(x == 0 for x in b_total):
                val = coupled_ding(fam_small, delta=dprime).value
                _assert_true("reduced-ding-threshold-consistency",
                             (eta, dprime), val >= 0, val, 0)
            else:
                # twisting against the coupled barycenter restores the
                # (certified lower bound of the) Ding invariant to >= 0
                bb = vdot(b_total, b_total)
                t = max(Fraction(0), vdot(b_total, eta) / bb) + 1
                xi_fix = tuple(-t * x for x in b_total)
                val = coupled_ding(twist_family(fam_small, xi_fix),
                                   delta=dprime).value
                _assert_true("reduced-ding-threshold-consistency",
                             (eta, dprime, xi_fix), val >= 0, val, 0)
            bump("reduced-ding-threshold-consistency")

    # growth lower bound for twisted sums on vanishing-Futaki models
    if all(x == 0 for x in b_total):
        c2 = inradius_squared(model.anticanonical,
                              tuple(Fraction(0) for _ in range(rank)))
        fam = trivial_family(model, m_max=m_max)
        for _ in range(samples):
            cshift = _rand_frac(rng)
            shifted = FiltrationFamily(model, tuple(
                shift(f, cshift) for f in fam.members))
            total = sum_filtration(shifted)
            e_minus = min(w / m for m, row in total.weights.items()
                          for w in row.values())
            xi = _rand_vec(rng, rank, span=3)
            tw = twist(total, xi)
            for m in grid:
                t_m = max(tw.weights[m].values()) / m
                gap = t_m - e_minus
                _assert_true("twist-growth-lower-bound", (cshift, xi, m),
                             gap >= 0 and gap * gap >= c2 * vdot(xi, xi),
                             gap * gap, c2 * vdot(xi, xi))
            bump("twist-growth-lower-bound", len(grid))

    # twisted-ray ratio limits
    exps = (1, 2, 4, 8, 16)

    def safe_base(xi_dir):
        # a base point that never cancels the twisted ray at a tested exponent
        while True:
            cand = _rand_vec(rng, rank, span=2)
            if all(any(h + e * x != 0 for h, x in zip(cand, xi_dir))
                   for e in exps):
                return cand

    for _ in range(max(1, samples // 20)):
        xi = _futaki_orthogonal_direction(model, rng)
        if xi is not None:
            eta = safe_base(xi)
            prof = twisted_ratio_profile(model, eta, xi, exps)
            _assert_eq("twisted-ratio-limit", (eta, xi), prof.limit, Fraction(1))
            vals = [r for e, r in prof.ratios if e >= prof.entry]
            diffs = [abs(r - 1) for r in vals]
            _assert_true("twisted-ratio-limit", (eta, xi),
                         all(a >= b for a, b in zip(diffs, diffs[1:])),
                         diffs, "monotone")
            bump("twisted-ratio-limit")
        xi2 = _rand_int_vec(rng, rank, span=2, nonzero=True)
        prof = twisted_ratio_profile(model, safe_base(xi2), xi2, exps)
        _assert_eq("twisted-ratio-ray-value", (xi2,),
                   prof.limit, _ratio_at(model, xi2))
        bump("twisted-ratio-ray-value")

    # reduced J of a twisted-trivial family vanishes at the cancelling twist
    for _ in range(max(1, samples // 20)):
        xi0 = _rand_vec(rng, rank, span=3)
        res = reduced_coupled_j(model, xi0)
        _assert_eq("reduced-j-twist-cancellation", (xi0,), res.value, Fraction(0))
        bump("reduced-j-twist-cancellation")

    # rounding stability of the mean slopes under twisting
    for _ in range(max(1, samples // 10)):
        i = rng.randrange(k)
        table = {m: {a: _rand_frac(rng, span=2) for a in bases[i].characters(m)}
                 for m in grid}
        f = construct(bases[i], table)
        xi = _rand_vec(rng, rank, span=2)
        s_plain = numerics(twist(f, xi)).s_by_degree
        s_round = numerics(twist(round_weights(f), xi)).s_by_degree
        for m in grid:
            _assert_true("rounding-mean-slope-stability", (i, m),
                         abs(s_plain[m] - s_round[m]) <= Fraction(1, m),
                         abs(s_plain[m] - s_round[m]), Fraction(1, m))
        bump("rounding-mean-slope-stability", len(grid))

    # lc slope closed form against the threshold oracle, and shift rule
    for _ in range(max(1, samples // 20)):
        eta_i = _rand_int_vec(rng, rank, span=2, nonzero=True)
        a_eta = log_discrepancy(model, eta_i)
        # up to level A(eta) the direction computes its own threshold
        level = Fraction(rng.randint(1, 4), 4) * a_eta
        if level > 0:
            seq = MonomialIdealSeq.valuation_levels(eta_i, level)
            res = monomial_lct(model, seq)
            _assert_eq("lct-closed-form", (eta_i, level),
                       res.value, a_eta / level)
            res_o = monomial_lct(model, seq, oracle=True)
            _assert_eq("lct-oracle-agreement", (eta_i, level),
                       res_o.value, res.value)
            bump("lct-closed-form")
            bump("lct-oracle-agreement")
        # above that level the direction still caps the threshold
        t_max = t_invariant(model, TOTAL, eta_i)
        if t_max > a_eta:
            high = (a_eta + t_max) / 2
            res_hi = monomial_lct(
                model, MonomialIdealSeq.valuation_levels(eta_i, high))
            _assert_true("lct-witness-upper-bound", (eta_i, high),
                         res_hi.value is not None
                         and res_hi.value <= a_eta / high,
                         res_hi.value, a_eta / high)
            bump("lct-witness-upper-bound")
        fam_grid = family_degree_grid(model, m_max)
        basis0 = graded_basis(model, 0, m_max=m_max, step=fam_grid[0])
        f = valuation_filtration(basis0, eta_i)
        c = _rand_frac(rng)
        delta = Fraction(rng.randint(1, 3))
        _assert_eq("mu-shift-covariance", (eta_i, c, delta),
                   mu_slope(shift(f, c), delta).value,
                   mu_slope(f, delta).value + c)
        bump("mu-shift-covariance")

    total_cases = sum(cases.values())
    return SuiteReport(model.name, seed, samples, passed=total_cases, failed=0,
                       cases=cases)


# ---------------------------------------------------------------------------
# aggregated reports


@dataclass
class StabilityReport:
    """Everything a verification run certifies about one model.

    Every numeric entry in ``values`` carries a provenance marker.  The
    wall-clock duration is kept out of the serialized payload so identical
    model and seed give byte-identical reports; it rides along as a plain
    attribute for logging.
    """

    model_name: str
    values: dict
    witnesses: dict
    verdicts: dict
    assumptions: tuple[str, ...]
    suite: dict
    seed: int
    samples: int
    elapsed_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "assumptions": list(self.assumptions),
            "values": self.values,
            "witnesses": self.witnesses,
            "verdicts": self.verdicts,
            "suite": self.suite,
            "seed": self.seed,
            "samples": self.samples,
        }


def build_stability_report(model: ToricFanoModel, samples: int = 100,
                           seed: int = 0) -> StabilityReport:
    """Run the verdicts and the identity suite and assemble one report."""
    import time as _time
    started = _time.monotonic()
    verdict = semistable_verdict(model)
    suite = identity_suite(model, samples=samples, seed=seed)
    fut = verdict.futaki
    values = {
        "delta": {"value": verdict.delta.value,
                  "provenance": verdict.delta.provenance},
        "futaki_total": {"value": list(fut.total), "provenance": CLOSED_FORM},
        "futaki_per_summand": {"value": [list(v) for v in fut.per_summand],
                               "provenance": CLOSED_FORM},
    }
    witnesses = {"delta_witness": list(verdict.delta.witness)}
    verdicts = {
        "semistable": verdict.semistable,
        "futaki_vanishes": fut.vanishes,
        "delta_at_least_one": verdict.delta.value >= 1,
    }
    return StabilityReport(
        model_name=model.name,
        values=values,
        witnesses=witnesses,
        verdicts=verdicts,
        assumptions=verdict.assumptions,
        suite=suite.to_dict(),
        seed=seed,
        samples=samples,
        elapsed_seconds=_time.monotonic() - started,
    )


def _futaki_orthogonal_direction(model: ToricFanoModel,
                                 rng: random.Random) -> Optional[tuple[int, ...]]:
    """A nonzero integer direction pairing to zero with the coupled
    barycenter, when one exists."""
    b = model.barycenter(TOTAL)
    rank = model.rank
    if all(x == 0 for x in b):
        return _rand_int_vec(rng, rank, span=2, nonzero=True)
    if rank == 1:
        return None
    perp = nullspace([list(b)], rank)
    if not perp:
        return None
    coeffs = [rng.randint(-2, 2) for _ in perp]
    if all(c == 0 for c in coeffs):
        coeffs[0] = 1
    cand = tuple(sum(c * v[i] for c, v in zip(coeffs, perp))
                 for i in range(rank))
    if all(x == 0 for x in cand):
        cand = perp[0]
    return primitive_vector(cand)
