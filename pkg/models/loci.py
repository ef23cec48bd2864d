"""
loci.py - Subsets of Spec R and the eight module loci.

A locus is reported as a SpecSubset in one of four normal forms: Open(a) = D(a),
Closed(a) = V(a), a union of locally closed pieces V(a) minus V(b), or a pointwise-only
membership procedure. Each LocusReport also records how it was obtained:

* closed-form: an ideal-theoretic formula that is exact,
* candidate-enumerated: the complement is the closure of the violating primes found in
  a finite candidate family; exact on every candidate, coverage gaps listed in caveats,
* pointwise: verdicts at the sample primes only.
"""

import logging
import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

from models.groebner import Ideal, PrimeIdeal, ResourceLimitError, ideal_quotient, intersect
from models.invariants import (
    DecompositionUnavailableError,
    PrimeCatalog,
    bass_numbers,
    bass_window,
    dim_R_local,
    ext_annihilators_S,
    fiber_dimension,
    height_in_S,
    in_support,
    is_regular_local,
    local_depth,
    local_dim,
    module_annihilator,
    ring_is_cm_at,
    ring_module,
)
from models.modres import AffineRing, ModulePresentation, fitting_ideal, syzygy_module
from models.qpoly import Polynomial
from models.schemas import LocusPiece, LocusReportModel

logger = logging.getLogger("loci_logger")

INCONCLUSIVE = "inconclusive"
Membership = Union[bool, str]

LOCUS_KINDS = ("supp", "free", "cm", "mcm", "sn", "tn", "fid", "gor")

OPEN_TEXT = "Open{ideal} complement: V{ideal}"
CLOSED_TEXT = "Closed{ideal} = V{ideal}, complement: Open{ideal}"


class NotCertifiedGorensteinError(Exception):
    """The Gorenstein fast path was requested over a ring without a certificate."""


#
## Subsets of Spec R
@dataclass(frozen=True)
class SpecSubset:
    """A subset of Spec R in one of the normal forms."""

    ring: AffineRing
    form: Literal["open", "closed", "pieces", "pointwise"]
    ideal: Optional[Ideal] = None
    pieces: Tuple[Tuple[Ideal, Ideal], ...] = ()
    member_fn: Optional[Callable[[PrimeIdeal], Membership]] = field(default=None, compare=False)

    @classmethod
    def open(cls, ring: AffineRing, a: Ideal) -> "SpecSubset":
        return cls(ring, "open", a)

    @classmethod
    def closed(cls, ring: AffineRing, a: Ideal) -> "SpecSubset":
        return cls(ring, "closed", a)

    @classmethod
    def whole(cls, ring: AffineRing) -> "SpecSubset":
        return cls(ring, "open", Ideal.unit(ring.variables, ring.order))

    @classmethod
    def union_of_pieces(cls, ring: AffineRing, pieces: Sequence[Tuple[Ideal, Ideal]]):
        return cls(ring, "pieces", None, tuple(pieces))

    @classmethod
    def pointwise(cls, ring: AffineRing, member_fn: Callable[[PrimeIdeal], Membership]):
        return cls(ring, "pointwise", member_fn=member_fn)

    def complement(self) -> "SpecSubset":
        if self.form == "open":
            return SpecSubset.closed(self.ring, self.ideal)
        if self.form == "closed":
            return SpecSubset.open(self.ring, self.ideal)
        raise ValueError(f"no complement normal form for {self.form} subsets")

    def has_open_form(self) -> bool:
        return self.form == "open"

    def __str__(self):
        if self.form == "open":
            return OPEN_TEXT.format(ideal=self.ideal)
        if self.form == "closed":
            return CLOSED_TEXT.format(ideal=self.ideal)
        if self.form == "pieces":
            return " ∪ ".join(f"(V{a} minus V{b})" for a, b in self.pieces) or "empty"
        return "PointwiseOnly"


def subset_member(X: SpecSubset, p: PrimeIdeal) -> Membership:
    """Is p in X? Decided by ideal containment except for pointwise subsets."""
    if X.form == "open":
        return not p.contains_ideal(X.ideal)
    if X.form == "closed":
        return p.contains_ideal(X.ideal)
    if X.form == "pieces":
        return any(p.contains_ideal(a) and not p.contains_ideal(b) for a, b in X.pieces)
    return X.member_fn(p)


def _generator_outside(I: Ideal, p: PrimeIdeal) -> Optional[Polynomial]:
    for g in I.generators:
        if not p.contains(g):
            return g
    return None


def nonempty_open_inside(X: SpecSubset, p: PrimeIdeal) -> Optional[Polynomial]:
    """f not in p with D(f) ∩ V(p) ⊆ X, read off the normal form; None if not found."""
    one = Polynomial.constant(1, p.variables)
    if X.form == "open":
        return _generator_outside(X.ideal, p)
    if X.form == "closed":
        return one if p.contains_ideal(X.ideal) else None
    if X.form == "pieces":
        for a, b in X.pieces:
            if p.contains_ideal(a):
                f = _generator_outside(b, p)
                if f is not None:
                    return f
        return None
    return None


def nonempty_open_inside_poset(
    member: Callable[[PrimeIdeal], Membership], p: PrimeIdeal, poset: Sequence[PrimeIdeal]
) -> Optional[Polynomial]:
    """Poset fallback: f vanishing on every sample prime above p outside the subset."""
    if member(p) is not True:
        return None
    f = Polynomial.constant(1, p.variables)
    for r in poset:
        if r == p or not p <= r or member(r) is True:
            continue
        g = _generator_outside(r.ideal, p)
        if g is None:
            return None
        f = f * g
    return f


#
## Reports
@dataclass
class LocusReport:
    """A computed locus with provenance."""

    kind: str
    subset: SpecSubset
    mode: Literal["closed-form", "candidate-enumerated", "pointwise"]
    caveats: List[str] = field(default_factory=list)
    sample_verdicts: Dict[str, Membership] = field(default_factory=dict)
    module: str = ""

    def member(self, p: PrimeIdeal) -> Membership:
        return subset_member(self.subset, p)

    def to_model(self) -> LocusReportModel:
        subset = self.subset
        data = dict(
            module=self.module,
            kind=self.kind,
            mode=self.mode,
            form=subset.form,
            caveats=sorted(set(self.caveats)),
            sample_verdicts=dict(sorted(self.sample_verdicts.items())),
        )
        if subset.form in ("open", "closed"):
            data["complement_ideal"] = [str(g) for g in subset.ideal.generators] or ["0"]
        elif subset.form == "pieces":
            data["pieces"] = [
                LocusPiece(closed=[str(g) for g in a.generators] or ["0"],
                           open=[str(g) for g in b.generators] or ["0"])
                for a, b in subset.pieces
            ]
        return LocusReportModel(**data)

    def describe(self) -> str:
        unit = self.subset.form in ("open", "closed") and self.subset.ideal.is_unit()
        if unit and self.kind == "supp" and self.subset.form == "closed":
            # the zero module: printed in the open form of the unit ideal
            unit_ideal = Ideal.unit(self.subset.ring.variables, self.subset.ring.order)
            return OPEN_TEXT.format(ideal=unit_ideal) + " — empty support"
        text = str(self.subset)
        if unit and self.subset.form == "closed":
            text += " — empty"
        elif unit:
            text += " — all of Spec"
        return text


def parse_kind(text: str) -> Tuple[str, Optional[int]]:
    """'sn:2' -> ('sn', 2)."""
    base, _, arg = text.partition(":")
    if base not in LOCUS_KINDS:
        raise ValueError(f"unknown locus {text!r}")
    if base in ("sn", "tn"):
        if not arg.isdigit():
            raise ValueError(f"locus {base} needs :n, e.g. {base}:2")
        return base, int(arg)
    if arg:
        raise ValueError(f"locus {base} takes no argument")
    return base, None


#
## Locus computations
class LocusContext:
    """Ring, prime catalog and caches shared by the locus computations of one fixture."""

    def __init__(self, ring: AffineRing, catalog: PrimeCatalog):
        self.ring = ring
        self.catalog = catalog
        self.poset = [p for p in catalog.primes if p.contains_ideal(ring.relations)]
        self._cache: Dict[tuple, LocusReport] = {}
        self._lock = threading.Lock()

    def labels(self) -> List[str]:
        return [p.label for p in self.poset]

    def compute(self, kind: str, M: ModulePresentation, **options) -> LocusReport:
        """Compute (and cache) one locus; `kind` like 'cm' or 'sn:2'."""
        key = (kind, M, tuple(sorted(options.items())))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        base, n = parse_kind(kind)
        if base == "supp":
            report = supp_locus(M, self)
        elif base == "free":
            report = free_locus(M, self)
        elif base == "cm":
            report = cm_locus(M, self)
        elif base == "mcm":
            report = mcm_locus(M, self)
        elif base == "sn":
            report = sn_locus(M, n, self)
        elif base == "tn":
            report = tn_locus(M, n, self)
        elif base == "fid":
            report = fid_locus(M, self, **options)
        else:
            report = gor_locus(M, self, **options)
        report.kind = kind
        report.module = M.label
        with self._lock:
            self._cache[key] = report
        return report

    def pointwise(self, kind: str, M: ModulePresentation) -> LocusReport:
        """The PointwiseOnly report of a locus, evaluated on the sample primes."""
        base, n = parse_kind(kind)
        rule = pointwise_rule(base, M, self, n)
        subset = SpecSubset.pointwise(self.ring, rule)
        caveats = []
        if base in ("sn", "tn"):
            caveats.append(
                f"quantifier over primes below p covers the {len(self.poset)} sample primes only"
            )
        report = LocusReport(kind, subset, "pointwise", caveats, module=M.label)
        report.sample_verdicts = {p.label: rule(p) for p in self.poset}
        return report

    def sample(self, report: LocusReport) -> LocusReport:
        report.sample_verdicts = {p.label: report.member(p) for p in self.poset}
        return report


#
## Pointwise rules
def _module_over(M: ModulePresentation, ring: AffineRing) -> ModulePresentation:
    return ModulePresentation(ring, M.generators, M.columns, M.label)


def free_at(M: ModulePresentation, p: PrimeIdeal) -> bool:
    """M_p free: Fitt_{r-1} vanishes in R_p where r is the fiber dimension."""
    r = fiber_dimension(M, p)
    if r == 0:
        return True
    J = M.ring.relations
    return not p.contains_ideal(ideal_quotient(J, fitting_ideal(M, r - 1)))


def fid_at(M: ModulePresentation, p: PrimeIdeal, ctx: LocusContext) -> Membership:
    """M_p has finite injective dimension: exact shortcuts, then the Bass window."""
    if not in_support(M, p):
        return True
    ring = M.ring
    if is_regular_local(ring, p, ctx.catalog):
        return True
    if not ring_is_cm_at(ring, p, ctx.catalog):
        return False
    d = dim_R_local(ring, p, ctx.catalog)
    try:
        mu = bass_numbers(p, M, max(bass_window(ring), d + 1))
    except ResourceLimitError as e:
        logger.info("fid at %s inconclusive: %s", p.label, e)
        return INCONCLUSIVE
    return all(v == 0 for v in mu[d + 1 :])


def _local_ok(base: str, M: ModulePresentation, q: PrimeIdeal, ctx: LocusContext, n) -> Membership:
    """The defining condition at q alone (no quantifier over smaller primes)."""
    if base == "fid":
        return fid_at(M, q, ctx)
    if not in_support(M, q):
        return True
    depth = local_depth(M, q)
    if base == "cm":
        return depth == local_dim(M, q, ctx.catalog)
    if base == "mcm":
        return depth == dim_R_local(M.ring, q, ctx.catalog)
    if base == "sn":
        return depth >= min(n, dim_R_local(M.ring, q, ctx.catalog))
    if base == "tn":
        return depth >= min(n, local_dim(M, q, ctx.catalog))
    raise ValueError(base)


def pointwise_rule(base: str, M: ModulePresentation, ctx: LocusContext, n=None):
    """Membership procedure evaluated from local profiles."""

    def rule(p: PrimeIdeal) -> Membership:
        if base == "supp":
            return fiber_dimension(M, p) > 0
        if base == "free":
            return free_at(M, p)
        if base in ("sn", "tn"):
            below = [q for q in ctx.poset if q <= p]
            if p not in below:
                below.append(p)
            return all(_local_ok(base, M, q, ctx, n) is True for q in below)
        if base == "gor":
            fid = fid_at(M, p, ctx)
            if fid == INCONCLUSIVE:
                return INCONCLUSIVE
            return fid and _local_ok("mcm", M, p, ctx, n)
        return _local_ok(base, M, p, ctx, n)

    return rule


#
## Candidate enumeration
def _candidate_family(M: ModulePresentation, ctx: LocusContext) -> List[Ideal]:
    ring = ctx.ring
    family = [ring.relations, module_annihilator(M)]
    family += list(ext_annihilators_S(M))
    family += list(ext_annihilators_S(ring_module(ring)))
    unique: List[Ideal] = []
    for I in family:
        if not I.is_unit() and I not in unique:
            unique.append(I)
    for I, K in combinations(list(unique), 2):
        total = I + K
        if not total.is_unit() and total not in unique:
            unique.append(total)
    return unique


def candidate_primes(M: ModulePresentation, ctx: LocusContext) -> Tuple[List[PrimeIdeal], List[str]]:
    """Minimal primes of the candidate family plus the sample primes, with coverage notes."""
    caveats = []
    found: List[PrimeIdeal] = []
    for I in _candidate_family(M, ctx):
        try:
            primes = ctx.catalog.minimal_primes(I)
        except DecompositionUnavailableError as e:
            caveats.append(f"candidate coverage: {e}")
            logger.info("Candidate family gap: %s", e)
            continue
        for p in primes:
            if p not in found:
                found.append(p)
    for p in ctx.poset:
        if p not in found:
            found.append(p)
    found = [p for p in found if p.contains_ideal(ctx.ring.relations)]
    return sorted(found, key=lambda p: (height_in_S(p), p.label)), caveats


def _enumerate(base: str, M: ModulePresentation, ctx: LocusContext, n=None) -> LocusReport:
    """Complement = closure of the violating candidates."""
    candidates, caveats = candidate_primes(M, ctx)
    violators: List[PrimeIdeal] = []
    for q in candidates:
        if any(v <= q for v in violators):
            continue
        verdict = _local_ok(base, M, q, ctx, n)
        if verdict == INCONCLUSIVE:
            caveats.append(f"inconclusive at candidate {q.label}")
        elif verdict is False:
            violators.append(q)
    complement = Ideal.unit(ctx.ring.variables, ctx.ring.order)
    for v in violators:
        complement = v.ideal if complement.is_unit() else complement * v.ideal
    caveats.append(f"{len(candidates)} candidate primes, {len(violators)} minimal violators")
    subset = SpecSubset.open(ctx.ring, complement)
    return ctx.sample(LocusReport(base, subset, "candidate-enumerated", caveats))


#
## The eight loci
def supp_locus(M: ModulePresentation, ctx: LocusContext) -> LocusReport:
    """Supp M = V(Ann M)."""
    subset = SpecSubset.closed(ctx.ring, module_annihilator(M))
    return ctx.sample(LocusReport("supp", subset, "closed-form"))


def free_locus_subset(M: ModulePresentation) -> SpecSubset:
    """D(sum_r Fitt_r * (J : Fitt_{r-1})), Fitt_{-1} = 0."""
    ring = M.ring
    J = ring.relations
    total = Ideal.zero(ring.variables, ring.order)
    previous = Ideal.zero(ring.variables, ring.order)
    for r in range(M.generators + 1):
        current = fitting_ideal(M, r)
        vanishing = ideal_quotient(J, previous)
        total = total + current * vanishing
        previous = current
    return SpecSubset.open(ring, Ideal(total.canonical(), ring.variables, ring.order))


def free_locus(M: ModulePresentation, ctx: LocusContext) -> LocusReport:
    return ctx.sample(LocusReport("free", free_locus_subset(M), "closed-form"))


def generator_strata(M: ModulePresentation) -> Dict[int, SpecSubset]:
    """r -> the locally closed set where M_p needs exactly r generators."""
    ring = M.ring
    out = {}
    previous = Ideal.zero(ring.variables, ring.order)
    for r in range(M.generators + 1):
        current = fitting_ideal(M, r)
        out[r] = SpecSubset.union_of_pieces(ring, [(previous, current)])
        previous = current
    return out


def _equidimensional_codim(M: ModulePresentation, ctx: LocusContext) -> Optional[int]:
    primes = ctx.catalog.minimal_primes(module_annihilator(M))
    heights = {height_in_S(q) for q in primes}
    return heights.pop() if len(heights) == 1 else None


def cm_locus(M: ModulePresentation, ctx: LocusContext) -> LocusReport:
    """Closed form over an equidimensional support, candidate enumeration otherwise."""
    ring = ctx.ring
    if module_annihilator(M).is_unit():
        return ctx.sample(LocusReport("cm", SpecSubset.whole(ring), "closed-form"))
    try:
        c = _equidimensional_codim(M, ctx)
    except DecompositionUnavailableError as e:
        logger.info("cm locus falls back to candidates: %s", e)
        c = None
    if c is None:
        return _enumerate("cm", M, ctx)
    a = Ideal.unit(ring.variables, ring.order)
    for j, ann in enumerate(ext_annihilators_S(M)):
        if j == c or ann.is_unit():
            continue
        a = ann if a.is_unit() else intersect(a, ann)
    caveats = [f"support equidimensional of codimension {c}"]
    return ctx.sample(LocusReport("cm", SpecSubset.open(ring, a), "closed-form", caveats))


def mcm_locus(M: ModulePresentation, ctx: LocusContext) -> LocusReport:
    return _enumerate("mcm", M, ctx)


def sn_locus(M: ModulePresentation, n: int, ctx: LocusContext) -> LocusReport:
    """Serre's (S_n) locus; violations at q spread to every p containing q."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return ctx.sample(LocusReport(f"sn:{n}", SpecSubset.whole(ctx.ring), "closed-form"))
    return _enumerate("sn", M, ctx, n)


def tn_locus(M: ModulePresentation, n: int, ctx: LocusContext) -> LocusReport:
    """(T_n) of M is (S_n) of M over R/Ann M."""
    if n < 0:
        raise ValueError("n must be non-negative")
    ann = module_annihilator(M)
    if n == 0 or ann.is_unit():
        return ctx.sample(LocusReport(f"tn:{n}", SpecSubset.whole(ctx.ring), "closed-form"))
    support_ring = AffineRing(ctx.ring.variables, ann.generators, ctx.ring.order,
                              name=f"{ctx.ring.name}/Ann")
    inner = LocusContext(support_ring, ctx.catalog)
    report = _enumerate("sn", _module_over(M, support_ring), inner, n)
    report.subset = SpecSubset.open(ctx.ring, report.subset.ideal)
    report.caveats.append("computed as (S_n) over R/Ann M")
    return ctx.sample(report)


def fid_locus(
    M: ModulePresentation, ctx: LocusContext, gorenstein_fast_path: Optional[bool] = None
) -> LocusReport:
    """Free locus of the dim R-th syzygy over Gorenstein rings; Bass window otherwise."""
    ring = ctx.ring
    if gorenstein_fast_path and not ring.gorenstein_certified:
        raise NotCertifiedGorensteinError(f"{ring} carries no Gorenstein certificate")
    if gorenstein_fast_path is None:
        gorenstein_fast_path = ring.gorenstein_certified
    if gorenstein_fast_path:
        N = max(ring.dim, 0)
        omega = syzygy_module(M, N)
        caveats = [f"Gorenstein fast path: free locus of syzygy {N}"]
        return ctx.sample(LocusReport("fid", free_locus_subset(omega), "closed-form", caveats))
    report = _enumerate("fid", M, ctx)
    report.caveats.append("Bass window semi-decision where no exact shortcut applies")
    return report


def gor_locus(
    M: ModulePresentation, ctx: LocusContext, gorenstein_fast_path: Optional[bool] = None
) -> LocusReport:
    """fid ∩ mcm."""
    fid = ctx.compute("fid", M, gorenstein_fast_path=gorenstein_fast_path)
    mcm = ctx.compute("mcm", M)
    a, b = fid.subset.ideal, mcm.subset.ideal
    if a.is_unit():
        ideal = b
    elif b.is_unit():
        ideal = a
    else:
        ideal = a * b
    mode = "closed-form" if fid.mode == mcm.mode == "closed-form" else "candidate-enumerated"
    caveats = fid.caveats + mcm.caveats
    return ctx.sample(LocusReport("gor", SpecSubset.open(ctx.ring, ideal), mode, caveats))
