"""Finite exact engine for equivariant filtrations on truncated graded
section rings of a toric model.

On a toric model every graded piece decomposes into one-dimensional
character spaces, so a filtration is a rational weight table on the lattice
points of the dilated summand polytopes, and span sums become maxima over
character decompositions.  That monomial reduction is the load-bearing
simplification of this module and is enforced by construction: bases only
come from :func:`ckstab.toric.section_basis`.

All tables live on degrees up to a cap; operations never extrapolate beyond
stored degrees except through closed-form descriptors (trivial, cocharacter
valuation with shift, and sums of those), which carry certified asymptotic
invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .geometry import Vec, as_vec, vdot
from .toric import (TOTAL, RankMismatch, SummandIndex, ToricFanoModel,
                    integrality_step, log_discrepancy, s_invariant,
                    section_basis, support_min, t_invariant, theta_twist)

Char = tuple[int, ...]
WeightTable = dict[int, dict[Char, Fraction]]


class FiltrationError(Exception):
    pass


class UnboundedWeights(FiltrationError):
    pass


class MissingCharacter(FiltrationError):
    pass


class GridMismatch(FiltrationError):
    pass


class EmptyDecomposition(FiltrationError):
    pass


class NotIntegerValued(FiltrationError):
    pass


class UnsupportedDescriptor(FiltrationError):
    pass


# ---------------------------------------------------------------------------
# graded bases


@dataclass(frozen=True)
class GradedBasis:
    """Characters of the stored degrees of one summand (or the total ring)."""

    model: ToricFanoModel
    index: SummandIndex
    degrees: tuple[int, ...]
    chars: dict[int, tuple[Char, ...]]

    def characters(self, m: int) -> tuple[Char, ...]:
        if m not in self.chars:
            raise GridMismatch(f"degree {m} not stored")
        return self.chars[m]

    def restrict(self, degrees: Sequence[int]) -> "GradedBasis":
        degs = tuple(sorted(degrees))
        if any(d not in self.chars for d in degs):
            raise GridMismatch("restriction outside the stored grid")
        return GradedBasis(self.model, self.index, degs,
                           {d: self.chars[d] for d in degs})


_BASIS_CACHE: dict = {}


def graded_basis(model: ToricFanoModel, i: SummandIndex, m_max: int = 12,
                 step: Optional[int] = None) -> GradedBasis:
    """Basis on all degrees that are multiples of the summand's integrality
    step, up to m_max.  Results are cached per model instance; lattice-point
    enumeration dominates otherwise."""
    if step is None:
        step = integrality_step(model, i)
    key = (id(model), i, m_max, step)
    hit = _BASIS_CACHE.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    degrees = tuple(range(step, m_max + 1, step))
    if not degrees:
        raise GridMismatch(f"degree cap {m_max} below the integrality step {step}")
    chars = {m: tuple(section_basis(model, i, m)) for m in degrees}
    basis = GradedBasis(model, i, degrees, chars)
    _BASIS_CACHE[key] = (model, basis)
    return basis


# ---------------------------------------------------------------------------
# descriptors: the closed forms behind certified asymptotics


@dataclass(frozen=True)
class ValuationDescriptor:
    """Weights <alpha, eta> - m * min(eta) + shift * m on the carrying basis.

    eta = 0 with zero shift is the trivial filtration; shifts and twists of
    cocharacter-valuation filtrations stay in this class.
    """

    eta: Vec
    shift: Fraction = Fraction(0)

    @property
    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.eta) and self.shift == 0


@dataclass(frozen=True)
class SumDescriptor:
    parts: tuple[ValuationDescriptor, ...]


Descriptor = Union[ValuationDescriptor, SumDescriptor, None]


# ---------------------------------------------------------------------------
# filtrations


class Filtration:
    """An immutable per-degree weight table on a graded basis.

    ``weights[m][alpha]`` is the largest level at which the degree-m section
    of character alpha survives.  Linear boundedness is checked at
    construction; multiplicativity is a sampling diagnostic, see
    :meth:`check_multiplicative`.
    """

    __slots__ = ("basis", "weights", "descriptor")

    def __init__(self, basis: GradedBasis, weights: WeightTable,
                 descriptor: Descriptor = None):
        for m in basis.degrees:
            row = weights.get(m)
            if row is None:
                raise MissingCharacter(f"no weights for degree {m}")
            for alpha in basis.characters(m):
                if alpha not in row:
                    raise MissingCharacter(f"degree {m} lacks character {alpha}")
                w = row[alpha]
                if not isinstance(w, Fraction):
                    raise UnboundedWeights(f"weight at {alpha} is not rational: {w!r}")
        self.basis = basis
        self.weights = {m: dict(weights[m]) for m in basis.degrees}
        self.descriptor = descriptor

    # -- bounds -------------------------------------------------------------

    def slope_bounds(self) -> tuple[Fraction, Fraction]:
        """(e_minus, e_plus) with e_minus * m <= w_m <= e_plus * m stored."""
        lo = min(w / m for m, row in self.weights.items() for w in row.values())
        hi = max(w / m for m, row in self.weights.items() for w in row.values())
        return lo, hi

    def weight(self, m: int, alpha: Char) -> Fraction:
        try:
            return self.weights[m][alpha]
        except KeyError as exc:
            raise MissingCharacter(f"degree {m}, character {alpha}") from exc

    def check_multiplicative(self, samples: int, rng) -> int:
        """Sampled superadditivity check
        w_{m+m'}(a+a') >= w_m(a) + w_{m'}(a'); returns the number of triples
        actually tested (triples leaving the stored grid are skipped)."""
        degrees = self.basis.degrees
        tested = 0
        for _ in range(samples):
            m1 = rng.choice(degrees)
            m2 = rng.choice(degrees)
            if m1 + m2 not in self.weights:
                continue
            a1 = rng.choice(self.basis.characters(m1))
            a2 = rng.choice(self.basis.characters(m2))
            s = tuple(x + y for x, y in zip(a1, a2))
            if s not in self.weights[m1 + m2]:
                raise EmptyDecomposition(
                    f"character sum {s} missing at degree {m1 + m2}")
            if self.weights[m1 + m2][s] < self.weights[m1][a1] + self.weights[m2][a2]:
                raise FiltrationError(
                    f"multiplicativity fails at {a1}+{a2}, degrees {m1}+{m2}")
            tested += 1
        return tested

    def table_equal(self, other: "Filtration") -> bool:
        return (self.basis.degrees == other.basis.degrees
                and self.basis.index == other.basis.index
                and self.weights == other.weights)

    def __repr__(self):
        return (f"Filtration(index={self.basis.index!r}, "
                f"degrees={self.basis.degrees}, descriptor={self.descriptor!r})")


def construct(basis: GradedBasis, spec) -> Filtration:
    """Build a filtration from "trivial", ("toric_valuation", eta), or a
    weight table {m: {alpha: weight}}."""
    if spec == "trivial":
        return trivial_filtration(basis)
    if isinstance(spec, tuple) and len(spec) == 2 and spec[0] == "toric_valuation":
        return valuation_filtration(basis, spec[1])
    if isinstance(spec, dict):
        weights: WeightTable = {}
        for m in basis.degrees:
            if m not in spec:
                raise MissingCharacter(f"table lacks degree {m}")
            row = {}
            for alpha in basis.characters(m):
                if alpha not in spec[m]:
                    raise MissingCharacter(f"table lacks {alpha} at degree {m}")
                w = spec[m][alpha]
                if w is None or (isinstance(w, float) and math.isinf(w)):
                    raise UnboundedWeights(f"infinite weight at {alpha}")
                if isinstance(w, float):
                    raise FiltrationError(
                        f"floating point weight at {alpha}; weights must be rational")
                row[alpha] = Fraction(w)
            weights[m] = row
        return Filtration(basis, weights, descriptor=None)
    raise FiltrationError(f"unrecognized filtration spec {spec!r}")


def trivial_filtration(basis: GradedBasis) -> Filtration:
    zero = Fraction(0)
    weights = {m: {a: zero for a in basis.characters(m)} for m in basis.degrees}
    eta0 = tuple(Fraction(0) for _ in range(basis.model.rank))
    return Filtration(basis, weights, ValuationDescriptor(eta0))


def valuation_filtration(basis: GradedBasis, eta: Sequence) -> Filtration:
    """Weights <alpha, eta> - m * min over the summand of <., eta>.

    This normalization makes every weight nonnegative with minimum zero,
    i.e. the section through the support minimizer is the last to vanish.
    """
    eta = as_vec(eta)
    lam = support_min(basis.model, basis.index, eta)
    weights = {m: {a: vdot(a, eta) - m * lam for a in basis.characters(m)}
               for m in basis.degrees}
    return Filtration(basis, weights, ValuationDescriptor(eta))


# ---------------------------------------------------------------------------
# the operations


def shift(f: Filtration, c) -> Filtration:
    c = Fraction(c)
    weights = {m: {a: w + c * m for a, w in row.items()}
               for m, row in f.weights.items()}
    return Filtration(f.basis, weights, _shift_descriptor(f.descriptor, c))


def _shift_descriptor(d: Descriptor, c: Fraction) -> Descriptor:
    if isinstance(d, ValuationDescriptor):
        return replace(d, shift=d.shift + c)
    if isinstance(d, SumDescriptor):
        first = replace(d.parts[0], shift=d.parts[0].shift + c)
        return SumDescriptor((first,) + d.parts[1:])
    return None


def twist(f: Filtration, xi: Sequence) -> Filtration:
    """Add <alpha, xi> to every weight.  For a valuation descriptor this is
    again a shifted valuation descriptor at eta + xi."""
    xi = as_vec(xi)
    if len(xi) != f.basis.model.rank:
        raise RankMismatch("twist rank differs from the torus rank")
    weights = {m: {a: w + vdot(a, xi) for a, w in row.items()}
               for m, row in f.weights.items()}
    return Filtration(f.basis, weights, _twist_descriptor(f, xi))


def _twist_descriptor(f: Filtration, xi: Vec) -> Descriptor:
    d = f.descriptor
    if isinstance(d, ValuationDescriptor):
        theta = theta_twist(f.basis.model, f.basis.index, d.eta, xi)
        return ValuationDescriptor(tuple(a + b for a, b in zip(d.eta, xi)),
                                   d.shift - theta)
    return None


def round_weights(f: Filtration) -> Filtration:
    """Round every weight down to an integer, the largest integer level at
    which each section persists.  Idempotent."""
    weights = {m: {a: Fraction(math.floor(w)) for a, w in row.items()}
               for m, row in f.weights.items()}
    d = f.descriptor
    if isinstance(d, ValuationDescriptor) and all(
            w.denominator == 1 for row in f.weights.values() for w in row.values()):
        keep = d
    else:
        keep = None
    return Filtration(f.basis, weights, keep)


def base_change(f: Filtration, e: int) -> Filtration:
    """Multiply integer weights by e (the weight table of the e-fold base
    change); expectation and maximal slopes scale by e exactly."""
    if e < 1:
        raise FiltrationError("base change exponent must be a positive integer")
    for row in f.weights.values():
        for w in row.values():
            if w.denominator != 1:
                raise NotIntegerValued("round the filtration before base change")
    weights = {m: {a: w * e for a, w in row.items()}
               for m, row in f.weights.items()}
    d = f.descriptor
    if isinstance(d, ValuationDescriptor):
        keep: Descriptor = ValuationDescriptor(tuple(x * e for x in d.eta),
                                               d.shift * e)
    else:
        keep = None
    return Filtration(f.basis, weights, keep)


# ---------------------------------------------------------------------------
# families and the sum filtration


@dataclass(frozen=True)
class FiltrationFamily:
    """One filtration per summand, on aligned degree grids."""

    model: ToricFanoModel
    members: tuple[Filtration, ...]

    def __post_init__(self):
        if len(self.members) != self.model.num_summands:
            raise GridMismatch("family size differs from the number of summands")
        degrees = {f.basis.degrees for f in self.members}
        if len(degrees) != 1:
            raise GridMismatch("family members on different degree grids")
        for i, f in enumerate(self.members):
            if f.basis.index != i or f.basis.model is not self.model:
                raise GridMismatch("family member bound to the wrong summand")

    @property
    def degrees(self) -> tuple[int, ...]:
        return self.members[0].basis.degrees


def family_degree_grid(model: ToricFanoModel, m_max: int) -> tuple[int, ...]:
    step = math.lcm(*(integrality_step(model, i)
                      for i in range(model.num_summands)))
    grid = tuple(range(step, m_max + 1, step))
    if not grid:
        raise GridMismatch(f"degree cap {m_max} below the family step {step}")
    return grid


def valuation_family(model: ToricFanoModel, eta: Sequence, m_max: int = 6,
                     shifts: Optional[Sequence] = None) -> FiltrationFamily:
    grid = family_degree_grid(model, m_max)
    members = []
    for i in range(model.num_summands):
        basis = graded_basis(model, i, m_max=m_max, step=grid[0])
        f = valuation_filtration(basis, eta)
        if shifts is not None:
            f = shift(f, shifts[i])
        members.append(f)
    return FiltrationFamily(model, tuple(members))


def trivial_family(model: ToricFanoModel, m_max: int = 6) -> FiltrationFamily:
    zero = tuple(Fraction(0) for _ in range(model.rank))
    return valuation_family(model, zero, m_max=m_max)


def twist_family(fam: FiltrationFamily, xi: Sequence) -> FiltrationFamily:
    return FiltrationFamily(fam.model, tuple(twist(f, xi) for f in fam.members))


def _maxplus_pair(wa: dict[Char, Fraction], wb: dict[Char, Fraction]) -> dict[Char, Fraction]:
    out: dict[Char, Fraction] = {}
    for a, x in wa.items():
        for b, y in wb.items():
            s = tuple(p + q for p, q in zip(a, b))
            v = x + y
            cur = out.get(s)
            if cur is None or v > cur:
                out[s] = v
    return out


def sum_filtration(fam: FiltrationFamily) -> Filtration:
    """The induced filtration on the total ring: the weight of a character
    is the best total weight over its decompositions into summand
    characters.  Every total character must decompose (the summand bases
    generate the total basis); a gap raises EmptyDecomposition."""
    model = fam.model
    grid = fam.degrees
    total_basis = graded_basis(model, TOTAL, m_max=grid[-1], step=grid[0])
    total_basis = total_basis.restrict(grid)
    weights: WeightTable = {}
    for m in grid:
        acc = fam.members[0].weights[m]
        for f in fam.members[1:]:
            acc = _maxplus_pair(acc, f.weights[m])
        row = {}
        for alpha in total_basis.characters(m):
            if alpha not in acc:
                raise EmptyDecomposition(
                    f"character {alpha} at degree {m} admits no decomposition")
            row[alpha] = acc[alpha]
        weights[m] = row
    return Filtration(total_basis, weights, _sum_descriptor(fam))


def _sum_descriptor(fam: FiltrationFamily) -> Descriptor:
    parts = []
    for f in fam.members:
        if not isinstance(f.descriptor, ValuationDescriptor):
            return None
        parts.append(f.descriptor)
    etas = {p.eta for p in parts}
    if len(etas) == 1:
        total_shift = sum((p.shift for p in parts), Fraction(0))
        return ValuationDescriptor(parts[0].eta, total_shift)
    return SumDescriptor(tuple(parts))


def approximate(f: Filtration, m0: int) -> Filtration:
    """The degree-m0 approximation: weights generated by s-fold products of
    the degree-m0 piece.  Only multiples of m0 are materialized; other
    degrees are deliberately left undefined."""
    if m0 not in f.basis.degrees:
        raise GridMismatch(f"degree {m0} not stored")
    target = [m for m in f.basis.degrees if m % m0 == 0]
    basis = f.basis.restrict(target)
    base_row = f.weights[m0]
    weights: WeightTable = {}
    power = dict(base_row)
    cur = m0
    powers = {m0: power}
    while cur + m0 <= target[-1]:
        power = _maxplus_pair(power, base_row)
        cur += m0
        powers[cur] = power
    for m in target:
        row = {}
        for alpha in basis.characters(m):
            if alpha not in powers[m]:
                raise EmptyDecomposition(
                    f"character {alpha} at degree {m} admits no s-fold decomposition")
            row[alpha] = powers[m][alpha]
        weights[m] = row
    # keep the closed form only when degree-m0 products really regenerate
    # the original table (true for valuation filtrations on these bases,
    # but checked rather than assumed)
    descriptor = None
    if isinstance(f.descriptor, ValuationDescriptor):
        if all(weights[m] == f.weights[m] for m in target):
            descriptor = f.descriptor
    return Filtration(basis, weights, descriptor)


# ---------------------------------------------------------------------------
# numerics


@dataclass(frozen=True)
class FiltrationNumerics:
    t_by_degree: dict[int, Fraction]
    s_by_degree: dict[int, Fraction]
    lambda_max: Optional[Fraction]
    s_value: Optional[Fraction]
    j_value: Optional[Fraction]
    provenance: str
    s_gaps: dict[int, Fraction]


def numerics(f: Filtration) -> FiltrationNumerics:
    """Per-degree maximal and mean slopes, with certified asymptotics when
    the descriptor provides closed forms.

    For an opaque table only the finite-degree sequences are returned,
    together with the successive gaps of the mean slopes as a convergence
    diagnostic; no limit is claimed.
    """
    t_by, s_by = {}, {}
    for m, row in f.weights.items():
        vals = list(row.values())
        t_by[m] = max(vals) / m
        s_by[m] = sum(vals, Fraction(0)) / (m * len(vals))
    model = f.basis.model
    i = f.basis.index
    d = f.descriptor
    if isinstance(d, ValuationDescriptor):
        lam = t_invariant(model, i, d.eta) + d.shift
        s_val = s_invariant(model, i, d.eta) + d.shift
        prov = "closed-form"
        j_val = lam - s_val
    elif isinstance(d, SumDescriptor):
        lam = sum((t_invariant(model, k, p.eta) + p.shift
                   for k, p in enumerate(d.parts)), Fraction(0))
        s_val = None
        j_val = None
        prov = "closed-form-lambda-only"
    else:
        lam = s_val = j_val = None
        prov = "finite-degree-estimate"
    degs = sorted(s_by)
    gaps = {m2: abs(s_by[m2] - s_by[m1]) for m1, m2 in zip(degs, degs[1:])}
    return FiltrationNumerics(t_by, s_by, lam, s_val, j_val, prov, gaps)


def is_shifted_trivial(f: Filtration) -> tuple[bool, Optional[Fraction]]:
    """True iff the weights are C*m for one constant C; returns C."""
    c: Optional[Fraction] = None
    for m, row in f.weights.items():
        for w in row.values():
            slope = w / m
            if c is None:
                c = slope
            elif slope != c:
                return False, None
    return True, c
