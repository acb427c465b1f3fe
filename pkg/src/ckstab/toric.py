"""Toric log Fano models with a polytope decomposition of the anticanonical
class, and the exact invariants of their one-parameter (cocharacter)
valuations.

A model is a reflexive anticanonical polytope together with rational
polytopes whose Minkowski sum reproduces it exactly.  All invariants reduce
to support values and centroids of these polytopes:

* log discrepancy of the valuation attached to eta: the piecewise-linear
  function equal to one on each primitive fan ray, which agrees with minus
  the support minimum over the anticanonical polytope;
* expected and maximal vanishing slopes of a summand along eta:
  ``<barycenter, eta> - min`` and ``max - min`` of the support pairing;
* the twist correction: a difference of support minima.

Log canonical thresholds of equivariant monomial ideal data are computed by
exact fractional programming over the fan; the reduction of the search to
cocharacter valuations is recorded as an assumption in every certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .geometry import (Cone, DimensionMismatch, ExactPolytope, HalfSpace,
                       PLFunc, Vec, as_vec, centroid, check_complete_fan_rank2,
                       is_primitive, lattice_points, mat_rank, minkowski_sum,
                       min_support_function, restrict_min_support,
                       support_value, vdot, vneg, vsub)
from .optimize import RatioProgram, dinkelbach_ratio_min, minimize_pl_ratio

TOTAL = "total"
SummandIndex = Union[int, str]


class ToricError(Exception):
    pass


class NotReflexive(ToricError):
    pass


class DecompositionMismatch(ToricError):
    pass


class RankMismatch(ToricError):
    pass


class IndexOutOfRange(ToricError):
    pass


class NonIntegralScaling(ToricError):
    pass


class ZeroIdeal(ToricError):
    pass


TORIC_SEARCH_ASSUMPTION = (
    "search space restricted to torus-invariant cocharacter valuations; "
    "exactness on toric models relies on equivariant reduction"
)


@dataclass(frozen=True)
class ToricFanoModel:
    """Immutable toric Fano model: fan rays, anticanonical polytope, and a
    Minkowski decomposition into summand polytopes, with cached barycenters
    and per-cone support forms."""

    name: str
    rank: int
    rays: tuple[tuple[int, ...], ...]
    anticanonical: ExactPolytope
    summands: tuple[ExactPolytope, ...]
    barycenters: tuple[Vec, ...]
    fan: tuple[Cone, ...]
    support_forms: tuple[tuple[Vec, ...], ...]   # [cone][summand] argmin vertex
    total_forms: tuple[Vec, ...]                 # [cone] argmin vertex of P^L

    @property
    def num_summands(self) -> int:
        return len(self.summands)

    def summand(self, i: SummandIndex) -> ExactPolytope:
        if i == TOTAL:
            return self.anticanonical
        if not isinstance(i, int) or not 0 <= i < len(self.summands):
            raise IndexOutOfRange(f"summand index {i!r}")
        return self.summands[i]

    def barycenter(self, i: SummandIndex) -> Vec:
        if i == TOTAL:
            total = [Fraction(0)] * self.rank
            for b in self.barycenters:
                for j, x in enumerate(b):
                    total[j] += x
            return tuple(total)
        if not isinstance(i, int) or not 0 <= i < len(self.summands):
            raise IndexOutOfRange(f"summand index {i!r}")
        return self.barycenters[i]


def build_model(rays: Sequence[Sequence[int]],
                decomposition: Sequence[ExactPolytope],
                name: str = "") -> ToricFanoModel:
    """Validate and assemble a model.

    Checks, in order: rays are primitive and span; the ray half-spaces cut
    out a reflexive (lattice, canonically faceted) polytope; the Minkowski
    sum of the decomposition equals that polytope exactly.  Caches the
    normal fan and the per-cone support minimizers of every summand.
    """
    ray_list = []
    rank = None
    for r in rays:
        t = tuple(int(x) for x in r)
        if rank is None:
            rank = len(t)
        elif len(t) != rank:
            raise RankMismatch("rays of mixed rank")
        if not is_primitive(t):
            raise NotReflexive(f"ray {t} is not primitive")
        ray_list.append(t)
    ray_tuple = tuple(sorted(set(ray_list)))
    if rank is None or mat_rank([list(r) for r in ray_tuple]) < rank:
        raise RankMismatch("rays do not span the cocharacter space")

    halfspaces = [HalfSpace(r, Fraction(-1)) for r in ray_tuple]
    try:
        antican = ExactPolytope.from_halfspaces(halfspaces, rank)
    except Exception as exc:
        raise NotReflexive(f"ray half-spaces do not bound a polytope: {exc}") from exc
    if antican.dim != rank:
        raise NotReflexive("anticanonical polytope is not full-dimensional")
    for v in antican.vertices:
        if any(x.denominator != 1 for x in v):
            raise NotReflexive(f"anticanonical polytope has non-lattice vertex {v}")
    facet_normals = {h.normal for h in antican.halfspaces}
    if facet_normals != set(ray_tuple):
        raise NotReflexive("rays do not match the facets of the anticanonical polytope")
    if any(h.offset != -1 for h in antican.halfspaces):
        raise NotReflexive("anticanonical facets not at level -1")

    summands = tuple(decomposition)
    if not summands:
        raise DecompositionMismatch("empty decomposition")
    for p in summands:
        if p.rank != rank:
            raise RankMismatch("summand rank differs from the model rank")
    total = minkowski_sum(list(summands))
    if total != antican:
        raise DecompositionMismatch(
            f"Minkowski sum of the decomposition is {total.vertices}, "
            f"expected {antican.vertices}")

    fan_pieces = min_support_function(antican).pieces
    if rank == 2 and not check_complete_fan_rank2([c for c, _ in fan_pieces]):
        raise NotReflexive("normal fan is not complete")
    cones = tuple(c for c, _ in fan_pieces)
    total_forms = tuple(f for _, f in fan_pieces)
    support_forms = []
    for cone, _ in fan_pieces:
        probe = cone.interior_point()
        row = []
        for p in summands:
            _, vtx = support_value(p, probe, "min")
            for g in cone.generators:
                if vdot(vtx, g) != support_value(p, g, "min")[0]:
                    raise ToricError("summand support not linear on a fan cone")
            row.append(vtx)
        support_forms.append(tuple(row))

    return ToricFanoModel(
        name=name,
        rank=rank,
        rays=ray_tuple,
        anticanonical=antican,
        summands=summands,
        barycenters=tuple(centroid(p) for p in summands),
        fan=cones,
        support_forms=tuple(support_forms),
        total_forms=total_forms,
    )


# ---------------------------------------------------------------------------
# support minima and the basic invariants


def support_min(model: ToricFanoModel, i: SummandIndex, eta: Sequence) -> Fraction:
    """min over the chosen polytope of <alpha, eta>; linear on each fan cone."""
    p = model.summand(i)
    return support_value(p, as_vec(eta), "min")[0]


def log_discrepancy(model: ToricFanoModel, eta: Sequence) -> Fraction:
    """Log discrepancy of the cocharacter valuation at eta.

    Evaluated through the fan (value one on each primitive ray, linear on
    cones); equals minus the support minimum over the anticanonical
    polytope, which tests cross-check.
    """
    eta = as_vec(eta)
    if len(eta) != model.rank:
        raise DimensionMismatch("direction rank mismatch")
    if all(x == 0 for x in eta):
        return Fraction(0)
    for cone, form in zip(model.fan, model.total_forms):
        if cone.contains(eta):
            return -vdot(form, eta)
    raise ToricError("fan lookup failed; fan incomplete")


def s_invariant(model: ToricFanoModel, i: SummandIndex, eta: Sequence) -> Fraction:
    """Expected vanishing slope of the summand along eta:
    <barycenter, eta> - min <., eta>."""
    eta = as_vec(eta)
    return vdot(model.barycenter(i), eta) - support_min(model, i, eta)


def t_invariant(model: ToricFanoModel, i: SummandIndex, eta: Sequence) -> Fraction:
    """Maximal vanishing slope: max <., eta> - min <., eta> over the summand."""
    eta = as_vec(eta)
    p = model.summand(i)
    return support_value(p, eta, "max")[0] - support_value(p, eta, "min")[0]


def theta_twist(model: ToricFanoModel, i: SummandIndex, eta: Sequence,
                xi: Sequence) -> Fraction:
    """Twist correction term: min<., eta> - min<., eta + xi> on the summand."""
    eta, xi = as_vec(eta), as_vec(xi)
    if len(eta) != len(xi):
        raise DimensionMismatch("eta and xi rank mismatch")
    shifted = tuple(a + b for a, b in zip(eta, xi))
    return support_min(model, i, eta) - support_min(model, i, shifted)


def total_s_sum(model: ToricFanoModel, eta: Sequence) -> Fraction:
    return sum((s_invariant(model, i, eta) for i in range(model.num_summands)),
               Fraction(0))


def integrality_step(model: ToricFanoModel, i: SummandIndex) -> int:
    """Least m such that m times the summand polytope is a lattice polytope."""
    p = model.summand(i)
    dens = [x.denominator for v in p.vertices for x in v]
    return math.lcm(*dens) if dens else 1


def section_basis(model: ToricFanoModel, i: SummandIndex, m: int) -> list[tuple[int, ...]]:
    """Characters of the degree-m sections of the summand: the lattice
    points of the m-fold dilate, in canonical order."""
    if m < 1:
        raise ToricError("degree must be positive")
    p = model.summand(i)
    scaled = p.scale(m)
    for v in scaled.vertices:
        if any(x.denominator != 1 for x in v):
            raise NonIntegralScaling(
                f"degree {m} does not clear the denominators of summand {i!r}")
    return lattice_points(scaled)


# ---------------------------------------------------------------------------
# piecewise-linear functions for the optimizers


def log_discrepancy_function(model: ToricFanoModel) -> PLFunc:
    return PLFunc(tuple((c, vneg(f)) for c, f in zip(model.fan, model.total_forms)))


def total_s_function(model: ToricFanoModel) -> PLFunc:
    b = model.barycenter(TOTAL)
    return PLFunc(tuple((c, vsub(b, f)) for c, f in zip(model.fan, model.total_forms)))


# ---------------------------------------------------------------------------
# monomial ideal data and log canonical thresholds


@dataclass(frozen=True)
class ToricValuation:
    zeta: Vec

    @property
    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.zeta)


@dataclass(frozen=True)
class MonomialIdealSeq:
    """Equivariant monomial ideal data on a model.

    Either a closed-form family (sections whose vanishing slope along
    ``eta`` is at least ``level``), or explicit per-degree generators
    ``(character, order)``; the usable ideal at degree m is generated by the
    characters whose order reaches ``level * m``.
    """

    summand: SummandIndex
    level: Fraction
    eta: Optional[Vec] = None
    degrees: Optional[dict[int, tuple[tuple[tuple[int, ...], Fraction], ...]]] = None

    @staticmethod
    def valuation_levels(eta: Sequence, level, summand: SummandIndex = TOTAL) -> "MonomialIdealSeq":
        return MonomialIdealSeq(summand=summand, level=Fraction(level),
                                eta=as_vec(eta))

    @staticmethod
    def from_generators(degrees: dict[int, Sequence[tuple[Sequence[int], Fraction]]],
                        level, summand: SummandIndex = TOTAL) -> "MonomialIdealSeq":
        table = {}
        for m, gens in degrees.items():
            table[int(m)] = tuple(sorted(
                (tuple(int(c) for c in ch), Fraction(o)) for ch, o in gens))
        return MonomialIdealSeq(summand=summand, level=Fraction(level),
                                degrees=table)


@dataclass(frozen=True)
class LctResult:
    value: Optional[Fraction]          # None means +infinity (unit ideal)
    witness: Optional[tuple[int, ...]]
    provenance: str
    assumptions: tuple[str, ...] = (TORIC_SEARCH_ASSUMPTION,)


def _region_of_ideal(model: ToricFanoModel, ideal: MonomialIdealSeq,
                     degree: Optional[int] = None) -> ExactPolytope:
    """Normalized Newton region of the ideal data inside the summand polytope."""
    p = model.summand(ideal.summand)
    if ideal.eta is not None:
        lam = support_min(model, ideal.summand, ideal.eta)
        cut = HalfSpace.make(ideal.eta, ideal.level + lam)
        try:
            return ExactPolytope.from_halfspaces(list(p.halfspaces) + [cut], p.rank)
        except Exception as exc:
            raise ZeroIdeal(
                f"no sections reach slope {ideal.level} along {tuple(ideal.eta)}"
            ) from exc
    assert ideal.degrees is not None
    if degree is None:
        degree = min(ideal.degrees)
    gens = [ch for ch, order in ideal.degrees.get(degree, ())
            if order >= ideal.level * degree]
    if not gens:
        raise ZeroIdeal(f"no generators at degree {degree} reach the level")
    pts = [tuple(Fraction(c, degree) for c in ch) for ch in gens]
    for pt in pts:
        if not p.contains(pt):
            raise ToricError(f"generator {pt} outside the summand polytope")
    return ExactPolytope.from_vertices(pts)


def monomial_lct(model: ToricFanoModel, ideal: MonomialIdealSeq,
                 scale: Fraction = Fraction(1),
                 degree: Optional[int] = None,
                 oracle: bool = False) -> LctResult:
    """Log canonical threshold of the (scaled) monomial ideal data.

    Computed as the infimum over cocharacter valuations of
    ``A(eta) / (scale * vanishing order of the ideal along eta)`` by exact
    per-cone fractional programming.  Returns +infinity (value None) when
    no direction constrains, which is the unit-ideal case.  With
    ``oracle=True`` the Dinkelbach iteration is used instead; both routes
    agree exactly and tests exercise that.
    """
    scale = Fraction(scale)
    if scale <= 0:
        raise ToricError("ideal scale must be positive")
    region = _region_of_ideal(model, ideal, degree)
    numerator = log_discrepancy_function(model)

    # The vanishing order of the ideal along eta is
    #   min over the region of <., eta>  -  min over the summand of <., eta>.
    # The summand support is linear on every fan cone already; only the
    # region support needs a subdivision, which also covers degenerate
    # (point or segment) Newton regions.
    if ideal.summand == TOTAL:
        summand_forms = list(model.total_forms)
    else:
        idx = ideal.summand
        summand_forms = [row[idx] for row in model.support_forms]
    cells = []
    den_pieces = []
    for cone, a_form, p_form in zip(model.fan,
                                    (vneg(f) for f in model.total_forms),
                                    summand_forms):
        for sub, v in restrict_min_support(cone, region):
            den_form = tuple(scale * (a - b) for a, b in zip(v, p_form))
            cells.append((sub, a_form, den_form))
            den_pieces.append((sub, den_form))
    denominator = PLFunc(tuple(den_pieces))
    rp = RatioProgram(numerator, denominator, cells=cells)
    solver = dinkelbach_ratio_min if oracle else minimize_pl_ratio
    res = solver(rp, allow_zero_denominator=True)
    provenance = "optimized-with-certificate"
    if res.value is None:
        return LctResult(None, None, provenance)
    return LctResult(res.value, res.witness, provenance)
