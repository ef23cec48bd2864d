"""
verify.py - The theorem harness.

Each `[[check]]` block of a fixture runs one statement about loci against the fixture's
ring, modules and sample primes and yields a CheckResult. A fail always carries a
witness that is replayed before the result is reported; exhausting a budget (Groebner
steps, the Bass window, the witness search, catalog coverage) yields inconclusive.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import config
from models.fixtures import Fixture
from models.groebner import (
    Ideal,
    PrimeIdeal,
    ResourceLimitError,
    radical_member,
    saturate,
)
from models.invariants import (
    DecompositionUnavailableError,
    PrimeCatalog,
    dim_R_local,
    fiber_dimension,
    gorenstein_type,
    in_support,
    is_regular_sequence,
    local_depth,
    module_annihilator,
    ring_module,
)
from models.loci import (
    INCONCLUSIVE,
    LocusContext,
    LocusReport,
    free_locus_subset,
    generator_strata,
    nonempty_open_inside,
    nonempty_open_inside_poset,
    parse_kind,
    pointwise_rule,
    subset_member,
)
from models.modres import (
    AffineRing,
    ModulePresentation,
    ext_module,
    fitting_ideal,
    free_resolution,
    ideal_times_module,
    kernel_modulo,
    prune_presentation,
    quotient_module,
    span_contains,
    subquotient,
    submodule_quotient,
    verify_exactness,
)
from models.qpoly import Polynomial, parse_many
from models.schemas import CheckBlock, CheckResult, LocusReportModel, VerifyReport

logger = logging.getLogger("loci_logger")

ORACLE_KINDS = ("supp", "free", "cm", "mcm", "sn:1", "sn:2", "tn:1", "tn:2", "fid", "gor")
NC_KINDS = ("fid", "gor", "cm", "mcm", "sn:2", "tn:2")
FILTRATION_LIMIT = 6

REFS = {
    "locus": "locus normal form, complementarity and generalization stability",
    "oracle": "normal-form membership agrees with local profiles",
    "topological_nagata": "open iff generalization-stable with an open piece of each V(p)",
    "gor_fid_mcm": "gor = fid ∩ mcm",
    "filtration_depth": "depth of R/I equals depth of an R/I-free filtered module",
    "nc_star": "Nagata criterion (NC)* for the locus",
    "mcm_implies_sn_open": "open mcm locus gives an open (S_n) locus",
    "gor_equivalence": "fid locus dense near V(p) iff gor(R/p) has a dense open",
    "constructive_localization": "localizing at one f outside p",
    "ext": "Ext generators and annihilator",
    "resolution": "free resolution ranks and exactness",
    "fitting_invariance": "Fitting ideals independent of the presentation",
    "gorenstein_type": "type of a Gorenstein module as its top Bass number",
    "fid_quotient_open": "fid locus of every R/I is open",
    "polynomial_extension": "local verdicts unchanged along R -> R[t]",
}


class HypothesisNotCertifiedError(Exception):
    """A hypothesis the fixture relies on could not be re-verified."""


class HypothesisFailedError(Exception):
    """The prime does not satisfy the hypothesis of the statement."""


class WitnessNotFoundError(Exception):
    """No witness within the search budget."""


@dataclass
class Outcome:
    """What a check handler found; turned into a CheckResult by run_check."""

    verdict: str = "pass"
    witness: Dict = field(default_factory=dict)
    caveats: List[str] = field(default_factory=list)
    loci: List[LocusReportModel] = field(default_factory=list)

    def fail(self, **witness) -> "Outcome":
        self.verdict = "fail"
        self.witness.update(witness)
        return self

    def inconclusive(self, budget: str, **witness) -> "Outcome":
        if self.verdict != "fail":
            self.verdict = "inconclusive"
            self.witness.update(budget=budget, **witness)
        return self


#
## Sample poset
class SamplePoset:
    """Finitely many primes ordered by inclusion, with subsets as bitmasks."""

    def __init__(self, primes: Sequence[PrimeIdeal]):
        self.primes = list(primes)
        n = len(self.primes)
        self.above = [0] * n
        self.below = [0] * n
        for i, p in enumerate(self.primes):
            for j, q in enumerate(self.primes):
                if p <= q:
                    self.above[i] |= 1 << j
                    self.below[j] |= 1 << i
        self.full = (1 << n) - 1
        self._separators: Dict[Tuple[int, int], Optional[Polynomial]] = {}

    def __len__(self):
        return len(self.primes)

    def mask(self, flags: Iterable[bool]) -> int:
        return sum(1 << i for i, flag in enumerate(flags) if flag is True)

    def members(self, mask: int) -> List[int]:
        return [i for i in range(len(self.primes)) if mask >> i & 1]

    def labels(self, mask: int) -> List[str]:
        return [self.primes[i].label for i in self.members(mask)]

    def is_open(self, mask: int) -> bool:
        """The complement is a union of closures V(p) met with the poset."""
        rest = self.full & ~mask
        closure = 0
        for i in self.members(rest):
            closure |= self.above[i]
        return closure == rest

    def unstable_pair(self, mask: int, upward: bool = False) -> Optional[Tuple[int, int]]:
        """(q, p) with p in the subset and q below p outside it (above for upward)."""
        for i in self.members(mask):
            reach = self.above[i] if upward else self.below[i]
            outside = reach & ~mask
            if outside:
                return self.members(outside)[0], i
        return None

    def separator(self, i: int, j: int) -> Optional[Polynomial]:
        """A generator of primes[j] outside primes[i]."""
        key = (i, j)
        if key not in self._separators:
            p = self.primes[i]
            self._separators[key] = next(
                (g for g in self.primes[j].ideal.generators if not p.contains(g)), None
            )
        return self._separators[key]

    def open_piece(self, i: int, mask: int) -> Optional[Polynomial]:
        """f outside primes[i] with D(f) ∩ V(primes[i]) inside the subset on the poset."""
        if not mask >> i & 1:
            return None
        f = Polynomial.constant(1, self.primes[i].variables)
        for j in self.members(self.above[i] & ~mask):
            g = self.separator(i, j)
            if g is None:
                return None
            f = f * g
        return f

    def nagata_side(self, mask: int) -> bool:
        if self.unstable_pair(mask) is not None:
            return False
        return all(self._has_piece(i, mask) for i in self.members(mask))

    def _has_piece(self, i: int, mask: int) -> bool:
        return all(self.separator(i, j) is not None for j in self.members(self.above[i] & ~mask))


def check_topological_nagata(poset: SamplePoset, subsets: Optional[Sequence[int]] = None) -> Outcome:
    """Both sides of the topological Nagata criterion on every given subset.

    With no subsets given, all subsets are enumerated when the poset is small enough.
    """
    out = Outcome()
    if subsets is None:
        if len(poset) > config.POSET_EXHAUSTIVE_LIMIT:
            out.caveats.append(
                f"poset of {len(poset)} primes exceeds POSET_EXHAUSTIVE_LIMIT; not enumerated"
            )
            return out
        subsets = range(poset.full + 1)
        out.caveats.append(f"exhaustive over {poset.full + 1} subsets")
    for mask in subsets:
        is_open = poset.is_open(mask)
        criterion = poset.nagata_side(mask)
        if is_open != criterion:
            return out.fail(subset=poset.labels(mask), open=is_open, criterion=criterion)
    return out


#
## Helpers
def _same_closed_set(ring: AffineRing, a: Ideal, b: Ideal) -> bool:
    """V(a) = V(b) inside Spec R."""
    left, right = ring.ideal(a.generators), ring.ideal(b.generators)
    return all(radical_member(g, right) for g in left.generators) and all(
        radical_member(g, left) for g in right.generators
    )


def _flag(value) -> Optional[bool]:
    if value is None:
        return None
    return str(value).strip().lower() in ("true", "1", "yes")


def _poset_verdicts(report: LocusReport, poset: SamplePoset):
    return [report.member(p) for p in poset.primes]


def _locus_poset_checks(report: LocusReport, poset: SamplePoset, out: Outcome) -> Outcome:
    """Complementarity, stability, the openness meta-check and the zero-module convention."""
    base, _ = parse_kind(report.kind)
    verdicts = _poset_verdicts(report, poset)
    if INCONCLUSIVE in verdicts:
        bad = [p.label for p, v in zip(poset.primes, verdicts) if v == INCONCLUSIVE]
        return out.inconclusive("BASS_WINDOW", kind=report.kind, primes=bad)
    mask = poset.mask(verdicts)
    subset = report.subset
    if subset.form in ("open", "closed"):
        other = subset.complement()
        for p, v in zip(poset.primes, verdicts):
            if v == subset_member(other, p):
                return out.fail(kind=report.kind, prime=p.label, complementarity=v)
    upward = base == "supp"
    pair = poset.unstable_pair(mask, upward=upward)
    if pair is not None:
        q, p = pair
        return out.fail(
            kind=report.kind,
            member=poset.primes[p].label,
            non_member=poset.primes[q].label,
            stability="specialization" if upward else "generalization",
        )
    open_mask = poset.full & ~mask if upward else mask
    if not poset.is_open(open_mask) or not poset.nagata_side(open_mask):
        return out.fail(kind=report.kind, not_open_on_poset=poset.labels(open_mask))
    return out


def _search_witness(
    pool: Sequence[Polynomial],
    p: Optional[PrimeIdeal],
    accept: Callable[[Polynomial], bool],
    what: str,
) -> Polynomial:
    """Products of at most WITNESS_MAX_FACTORS pool elements and pairwise differences."""
    candidates: List[Polynomial] = []
    for g in pool:
        if not g.is_zero() and g not in candidates:
            candidates.append(g)
    for g, h in combinations(list(candidates), 2):
        d = g - h
        if not d.is_zero() and not d.is_constant() and d not in candidates:
            candidates.append(d)
    candidates = [g for g in candidates if p is None or not p.contains(g)]
    for size in range(1, config.WITNESS_MAX_FACTORS + 1):
        for combo in combinations_with_replacement(candidates, size):
            f = combo[0]
            for g in combo[1:]:
                f = f * g
            if accept(f):
                return f
    logger.info("No witness for %s among %d candidates", what, len(candidates))
    raise WitnessNotFoundError(f"no witness for {what} within {config.WITNESS_MAX_FACTORS} factors")


def _kills_after_inverting(f: Polynomial, I: Ideal) -> bool:
    """I becomes the unit ideal once f is inverted: sat(I, f) = (1)."""
    return saturate(I, Ideal([f], I.variables, I.order)).is_unit()


def _module_zero_after(I: Ideal):
    return lambda f: radical_member(f, I)


def _filtration_length(M: ModulePresentation, I: Ideal) -> Optional[int]:
    """Smallest r <= FILTRATION_LIMIT with I^r M = 0."""
    for r in range(1, FILTRATION_LIMIT + 1):
        cols = ideal_times_module(M, I.power(r))
        if all(span_contains(M.ring, M.columns, M.generators, c) for c in cols):
            return r
    return None


def filtration_factors(M: ModulePresentation, I: Ideal, r: int) -> List[ModulePresentation]:
    """I^{i-1}M / I^iM for i = 1..r, each as a module over R/I."""
    ring = M.ring
    target = ring.quotient(I)
    factors = []
    for i in range(1, r + 1):
        if i == 1:
            outer = [M.unit_vector(k) for k in range(M.generators)]
        else:
            outer = ideal_times_module(M, I.power(i - 1))
        inner = ideal_times_module(M, I.power(i))
        factor = submodule_quotient(M, inner, outer, f"{M.label} factor {i}")
        cols = tuple(tuple(p.extend(target.variables) for p in col) for col in factor.columns)
        factors.append(ModulePresentation(target, factor.generators, cols, factor.name))
    return factors


def _is_free(N: ModulePresentation) -> bool:
    """Fitt_k = (1) and Fitt_{k-1} = 0 for the first k with a unit Fitting ideal."""
    k = next(k for k in range(N.generators + 1) if fitting_ideal(N, k).is_unit())
    return k == 0 or N.ring.relations.contains_ideal(fitting_ideal(N, k - 1))


def _extended_context(fx: Fixture) -> Tuple[AffineRing, LocusContext, Dict[str, PrimeIdeal]]:
    ring_t = fx.ring.polynomial_extension()
    lift = {
        name: PrimeIdeal(p.ideal.extend(ring_t.variables, ring_t.order), p.provenance,
                         f"{p.label}[t]")
        for name, p in fx.primes.items()
    }
    declared = {
        I.extend(ring_t.variables, ring_t.order): [lift[p.name] for p in primes]
        for I, primes in fx.catalog.declared.items()
    }
    catalog = PrimeCatalog(list(lift.values()), declared)
    return ring_t, LocusContext(ring_t, catalog), lift


#
## Statement checks
def verify_gor_fid_mcm(M: ModulePresentation, fx: Fixture) -> Outcome:
    """gor = fid ∩ mcm at every sample prime, for the normal forms and the pointwise rules."""
    ctx = fx.context
    out = Outcome()
    gor, fid, mcm = (ctx.compute(k, M) for k in ("gor", "fid", "mcm"))
    rules = {k: pointwise_rule(k, M, ctx) for k in ("gor", "fid", "mcm")}
    for p in ctx.poset:
        if fid.member(p) == INCONCLUSIVE or rules["fid"](p) == INCONCLUSIVE:
            return out.inconclusive("BASS_WINDOW", prime=p.label)
        if gor.member(p) != (fid.member(p) and mcm.member(p)):
            return out.fail(prime=p.label, gor=gor.member(p), fid=fid.member(p),
                            mcm=mcm.member(p))
        if rules["gor"](p) != (rules["fid"](p) and rules["mcm"](p)):
            return out.fail(prime=p.label, mode="pointwise")
    out.loci += [gor.to_model(), fid.to_model(), mcm.to_model()]
    return out


def verify_filtration_depth(
    M: ModulePresentation, I: Ideal, fx: Fixture, sequences: Sequence[Sequence[Polynomial]] = ()
) -> Outcome:
    """depth (R/I)_p = depth M_p when I^r M = 0 with R/I-free filtration quotients."""
    ring = M.ring
    I = ring.ideal(I.generators)
    r = _filtration_length(M, I)
    if r is None:
        raise HypothesisNotCertifiedError(f"I^r M != 0 for r <= {FILTRATION_LIMIT}")
    for i, factor in enumerate(filtration_factors(M, I, r), start=1):
        if not _is_free(factor):
            raise HypothesisNotCertifiedError(f"filtration factor {i} is not free over R/I")
    out = Outcome(caveats=[f"I^{r} M = 0, all {r} factors free over R/I"])
    RI = ModulePresentation.cyclic(ring, I.generators, "R/I")
    depths = {}
    for p in fx.context.poset:
        if not p.contains_ideal(I):
            continue
        left, right = local_depth(RI, p), local_depth(M, p)
        depths[p.label] = left
        if left != right:
            return out.fail(prime=p.label, depth_R_mod_I=str(left), depth_M=str(right))
    for xs in sequences:
        left, right = is_regular_sequence(xs, RI), is_regular_sequence(xs, M)
        if left != right:
            return out.fail(sequence=[str(x) for x in xs], regular_on_R_mod_I=left,
                            regular_on_M=right)
    out.witness["depths"] = {k: str(v) for k, v in sorted(depths.items())}
    return out


def verify_nc_star(M: ModulePresentation, kind: str, fx: Fixture) -> Outcome:
    """For p in Supp M find f with D(f) ⊆ locus of M/pM over R/p, then check openness."""
    out = Outcome()
    ctx = fx.context
    pieces = {}
    for p in ctx.poset:
        if not in_support(M, p):
            continue
        Mp = quotient_module(M, p.ideal, f"{M.label}/{p.label}")
        ctx_p = LocusContext(Mp.ring, fx.catalog)
        report = ctx_p.compute(kind, Mp)
        member = report.member(p)
        if member == INCONCLUSIVE:
            return out.inconclusive("BASS_WINDOW", prime=p.label, stage="R/p")
        f = nonempty_open_inside(report.subset, p)
        if f is None:
            f = nonempty_open_inside_poset(report.member, p, ctx_p.poset)
        if f is None:
            return out.fail(prime=p.label, stage="R/p", kind=kind, form=report.subset.form)
        pieces[p.label] = str(f)
    report = ctx.compute(kind, M)
    out = _locus_poset_checks(report, SamplePoset(ctx.poset), out)
    if out.verdict != "pass":
        return out
    if report.subset.form != "open":
        return out.fail(kind=kind, form=report.subset.form)
    out.witness.update(open_pieces=pieces, complement=[str(g) for g in report.subset.ideal.generators])
    out.loci.append(report.to_model())
    return out


def verify_mcm_implies_sn_open(M: ModulePresentation, n: int, fx: Fixture) -> Outcome:
    """Inside Supp M ∩ (S_n), primes with dim R_p < n are MCM points; both loci open."""
    ctx = fx.context
    out = Outcome()
    sn = ctx.compute(f"sn:{n}", M)
    mcm = ctx.compute("mcm", M)
    for p in ctx.poset:
        if not in_support(M, p) or sn.member(p) is not True:
            continue
        if dim_R_local(M.ring, p, fx.catalog) < n and mcm.member(p) is not True:
            return out.fail(prime=p.label, step="dim R_p < n but not MCM")
    poset = SamplePoset(ctx.poset)
    for report in (mcm, sn):
        out = _locus_poset_checks(report, poset, out)
        if out.verdict != "pass":
            return out
    if mcm.subset.form == "open" and sn.subset.form != "open":
        return out.fail(sn_form=sn.subset.form)
    out.loci += [mcm.to_model(), sn.to_model()]
    return out


def verify_theorem_gor_equivalence(
    M: ModulePresentation, p: PrimeIdeal, fx: Fixture
) -> Tuple[Optional[Polynomial], Optional[Polynomial]]:
    """Both sides for p in Supp ∩ fid ∩ mcm: (f for the fid locus near V(p), g for gor(R/p))."""
    ctx = fx.context
    fid_rule = pointwise_rule("fid", M, ctx)
    mcm_rule = pointwise_rule("mcm", M, ctx)
    if not in_support(M, p) or fid_rule(p) is not True or mcm_rule(p) is not True:
        raise HypothesisFailedError(f"{p.label} is not in Supp ∩ fid ∩ mcm of {M.label}")
    fid = ctx.compute("fid", M)
    left = nonempty_open_inside(fid.subset, p)
    if left is None:
        left = nonempty_open_inside_poset(fid.member, p, ctx.poset)
    ring_p = M.ring.quotient(p.ideal, f"{M.ring.name}/{p.label}")
    ctx_p = LocusContext(ring_p, fx.catalog)
    gor = ctx_p.compute("gor", ring_module(ring_p))
    right = nonempty_open_inside(gor.subset, p)
    if right is None:
        right = nonempty_open_inside_poset(gor.member, p, ctx_p.poset)
    return left, right


def verify_constructive_localization(
    M: ModulePresentation, fx: Fixture, block: CheckBlock
) -> Outcome:
    """Exhibit the localizing element for each requested item and re-verify it."""
    out = Outcome()
    items = block.items or [2, 3, 4, 5, 6]
    targets = [fx.prime(block.prime)] if block.prime else list(fx.context.poset)
    found: Dict[str, Dict[str, str]] = {}
    for item in items:
        handler = _LOCALIZATION_ITEMS.get(item)
        if handler is None:
            raise ValueError(f"no localization item {item}")
        found[f"item{item}"] = handler(M, fx, block, targets, out)
    out.witness.update(found)
    return out


def _item_vanishing(M, fx, block, targets, out) -> Dict[str, str]:
    """M_p = 0 gives f outside p with M_f = 0."""
    ann = module_annihilator(M)
    found = {}
    for p in targets:
        if in_support(M, p):
            continue
        f = _search_witness(ann.generators, p, _module_zero_after(ann), f"M_f = 0 at {p.label}")
        if not _kills_after_inverting(f, ann):
            raise WitnessNotFoundError(f"{f} does not kill {M.label} after inverting")
        found[p.label] = str(f)
    return found


def _kernel_annihilators(M: ModulePresentation, xs: Sequence[Polynomial]) -> List[Ideal]:
    """Ann of ((x_1..x_{i-1})M : x_i)/(x_1..x_{i-1})M for each i."""
    ring, g = M.ring, M.generators
    relations = list(M.columns)
    out = []
    for x in xs:
        x = ring.reduce(x)
        mult = [tuple(x if k == i else ring.zero() for k in range(g)) for i in range(g)]
        hits = kernel_modulo(ring, mult, g, extra=relations)
        kernel = subquotient(ring, hits, relations, g)
        out.append(module_annihilator(kernel))
        relations += mult
    return out


def _item_regular_sequence(M, fx, block, targets, out) -> Dict[str, str]:
    """x regular on M_p gives f outside p with x regular on M_f."""
    if not block.sequences:
        out.caveats.append("item 3 skipped: no sequence given")
        return {}
    xs = parse_many(block.sequences[0], M.ring.variables)
    anns = _kernel_annihilators(M, xs)
    rest = ModulePresentation(
        M.ring,
        M.generators,
        tuple(M.columns)
        + tuple(
            tuple(x if k == i else M.ring.zero() for k in range(M.generators))
            for x in xs
            for i in range(M.generators)
        ),
    )
    rest_ann = module_annihilator(rest)
    found = {}
    for p in targets:
        if any(p.contains_ideal(a) for a in anns) or not p.contains_ideal(rest_ann):
            continue
        pool = [g for a in anns for g in a.generators]
        f = _search_witness(
            pool, p, lambda f: all(radical_member(f, a) for a in anns), f"regularity at {p.label}"
        )
        if not all(_kills_after_inverting(f, a) for a in anns):
            raise WitnessNotFoundError(f"{f} leaves a zero divisor after inverting")
        found[p.label] = str(f)
    return found


def _item_minimal_prime(M, fx, block, targets, out) -> Dict[str, str]:
    """p minimal over I gives f outside p with √(I R_f) = p R_f."""
    if not block.ideal:
        out.caveats.append("item 4 skipped: no ideal given")
        return {}
    ring = fx.ring
    I = ring.ideal(fx.ideals[block.ideal].generators)
    minimal = fx.catalog.minimal_primes(I)
    found = {}
    for p in minimal:
        if block.prime and p != targets[0]:
            continue
        others = [q for q in minimal if q != p]
        if len(others) > config.WITNESS_MAX_FACTORS:
            raise WitnessNotFoundError(f"{len(others)} other minimal primes exceed the budget")
        f = ring.one()
        for q in others:
            g = next((g for g in q.ideal.generators if not p.contains(g)), None)
            if g is None:
                raise WitnessNotFoundError(f"{q.label} has no generator outside {p.label}")
            f = f * g
        K = saturate(I, Ideal([f], ring.variables, ring.order))
        if not p.contains_ideal(K) or not all(radical_member(g, K) for g in p.ideal.generators):
            raise WitnessNotFoundError(f"saturating by {f} does not isolate {p.label}")
        found[p.label] = str(f)
    return found


def _item_generically_free(M, fx, block, targets, out) -> Dict[str, str]:
    """Over a domain, f != 0 with M_f free."""
    ring = M.ring
    if not ring.domain_certified:
        out.caveats.append("item 5 skipped: ring not certified as a domain")
        return {}
    J = ring.relations
    r = next(r for r in range(M.generators + 1) if not J.contains_ideal(fitting_ideal(M, r)))
    pool = [g for g in fitting_ideal(M, r).generators if not J.contains(g)]
    a = ring.ideal(free_locus_subset(M).ideal.generators)
    f = _search_witness(pool, None, lambda f: not J.contains(f) and radical_member(f, a),
                        "generic freeness")
    return {"(0)": str(f), "rank": str(r)}


def _item_filtration_free(M, fx, block, targets, out) -> Dict[str, str]:
    """p^r M = 0 gives f outside p making every p^{i-1}M/p^iM free over (R/p)_f."""
    found = {}
    for p in targets:
        r = _filtration_length(M, p.ideal)
        if r is None:
            continue
        factors = filtration_factors(M, p.ideal, r)
        loci = [
            N.ring.ideal(free_locus_subset(N).ideal.generators) for N in factors
        ]
        pool = [g for a in loci for g in a.generators]
        pool.append(M.ring.one())
        f = _search_witness(
            pool, p, lambda f: all(radical_member(f, a) for a in loci), f"filtration at {p.label}"
        )
        found[p.label] = str(f)
    return found


_LOCALIZATION_ITEMS = {
    2: _item_vanishing,
    3: _item_regular_sequence,
    4: _item_minimal_prime,
    5: _item_generically_free,
    6: _item_filtration_free,
}


#
## Check handlers
def _check_locus(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    kind = block.locus or "supp"
    report = fx.context.compute(kind, M)
    out = Outcome(caveats=list(report.caveats))
    out.loci.append(report.to_model())
    if block.complement is not None:
        expected = Ideal(parse_many(block.complement, fx.ring.variables), fx.ring.variables)
        if not _same_closed_set(fx.ring, report.subset.ideal, expected):
            return out.fail(
                kind=kind,
                computed=[str(g) for g in report.subset.ideal.generators],
                expected=list(block.complement),
            )
    if block.prime is not None and block.value is not None:
        verdict = report.member(fx.prime(block.prime))
        if verdict != _flag(block.value):
            return out.fail(kind=kind, prime=block.prime, member=verdict)
    out = _locus_poset_checks(report, SamplePoset(fx.context.poset), out)
    if out.verdict == "pass" and parse_kind(kind)[0] not in ("supp", "free"):
        for p in fx.context.poset:
            if not in_support(M, p) and report.member(p) is not True:
                return out.fail(kind=kind, prime=p.label, zero_module_convention=False)
    return out


def _check_oracle(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    ctx = fx.context
    out = Outcome()
    kinds = [block.locus] if block.locus else list(ORACLE_KINDS)
    undecided = []
    for kind in kinds:
        computed = ctx.compute(kind, M)
        pointwise = ctx.pointwise(kind, M)
        for p in ctx.poset:
            a, b = computed.member(p), pointwise.sample_verdicts[p.label]
            if INCONCLUSIVE in (a, b):
                undecided.append(f"{kind}@{p.label}")
            elif a != b:
                return out.fail(kind=kind, prime=p.label, normal_form=a, pointwise=b)
        out.caveats += pointwise.caveats
    for r, stratum in generator_strata(M).items():
        for p in ctx.poset:
            if subset_member(stratum, p) != (fiber_dimension(M, p) == r):
                return out.fail(kind=f"generators={r}", prime=p.label)
    if undecided:
        return out.inconclusive("BASS_WINDOW", undecided=undecided)
    out.witness["compared"] = len(kinds) * len(ctx.poset)
    return out


def _check_nagata(fx: Fixture, block: CheckBlock) -> Outcome:
    poset = SamplePoset(fx.context.poset)
    return check_topological_nagata(poset)


def _check_gor_fid_mcm(fx: Fixture, block: CheckBlock) -> Outcome:
    return verify_gor_fid_mcm(fx.module(block.module), fx)


def _check_filtration(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    I = fx.ideals[block.ideal]
    sequences = [parse_many(seq, fx.ring.variables) for seq in block.sequences]
    return verify_filtration_depth(M, I, fx, sequences)


def _check_nc_star(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    kinds = [block.locus] if block.locus else list(NC_KINDS)
    out = Outcome()
    for kind in kinds:
        part = verify_nc_star(M, kind, fx)
        out.caveats += [f"{kind}: {c}" for c in part.caveats]
        out.loci += part.loci
        if part.verdict != "pass":
            out.verdict, out.witness = part.verdict, part.witness
            return out
        out.witness[kind] = part.witness
    return out


def _check_mcm_sn(fx: Fixture, block: CheckBlock) -> Outcome:
    return verify_mcm_implies_sn_open(fx.module(block.module), block.n or 2, fx)


def _check_gor_equivalence(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    out = Outcome()
    primes = [fx.prime(block.prime)] if block.prime else list(fx.context.poset)
    sides = {}
    for p in primes:
        try:
            left, right = verify_theorem_gor_equivalence(M, p, fx)
        except HypothesisFailedError as e:
            if block.prime:
                return out.inconclusive("hypothesis", prime=p.label, message=str(e))
            out.caveats.append(f"no verdict: {e}")
            out.witness.setdefault("hypothesis_failed", []).append(p.label)
            continue
        if (left is None) != (right is None):
            return out.fail(prime=p.label, fid_side=str(left), gor_side=str(right))
        if left is None:
            # neither side has a witness: agreement, but nothing was exhibited
            return out.inconclusive("witness search", prime=p.label)
        sides[p.label] = {"fid": str(left), "gor_R_mod_p": str(right)}
    out.witness["sides"] = sides
    return out


def _check_localization(fx: Fixture, block: CheckBlock) -> Outcome:
    return verify_constructive_localization(fx.module(block.module), fx, block)


def _check_ext(fx: Fixture, block: CheckBlock) -> Outcome:
    M, N = fx.module(block.module), fx.module(block.other)
    i = block.index or 0
    E = prune_presentation(ext_module(M, N, i))
    out = Outcome()
    out.witness.update(index=i, generators=E.generators)
    if block.value is not None and E.generators != int(block.value):
        return out.fail(expected_generators=int(block.value))
    if block.ideal is not None:
        ann = module_annihilator(E)
        expected = fx.ring.ideal(fx.ideals[block.ideal].generators)
        if ann != expected:
            return out.fail(annihilator=[str(g) for g in ann.canonical()], expected=block.ideal)
    return out


def _check_resolution(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    res = free_resolution(M, block.n)
    out = Outcome()
    out.witness.update(ranks=list(res.ranks), status=res.status)
    if not verify_exactness(res):
        return out.fail(exact=False)
    if block.ranks is not None and list(res.ranks) != block.ranks:
        return out.fail(expected_ranks=block.ranks)
    return out


def _check_fitting(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    other_name = block.other or fx.same_as(block.module)
    if other_name is None:
        raise HypothesisNotCertifiedError(f"{M.label} has no second presentation")
    N = fx.module(other_name)
    out = Outcome()
    for r in range(max(M.generators, N.generators) + 1):
        a, b = fitting_ideal(M, r), fitting_ideal(N, r)
        if a != b:
            return out.fail(r=r, left=str(a), right=str(b))
    return out


def _check_gorenstein_type(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    value = gorenstein_type(M, fx.prime(block.prime), fx.catalog)
    out = Outcome()
    out.witness["type"] = value
    if value == "inconclusive":
        return out.inconclusive("BASS_WINDOW")
    if block.value is not None and str(value) != str(block.value):
        return out.fail(expected=block.value)
    return out


def _check_fid_quotients(fx: Fixture, block: CheckBlock) -> Outcome:
    names = [block.ideal] if block.ideal else sorted(fx.ideals)
    out = Outcome(caveats=["holds for every affine Q-algebra; both sides are true here"])
    poset = SamplePoset(fx.context.poset)
    for name in names:
        RI = ModulePresentation.cyclic(fx.ring, fx.ideals[name].generators, f"R/{name}")
        report = fx.context.compute("fid", RI)
        out = _locus_poset_checks(report, poset, out)
        if out.verdict != "pass":
            out.witness["ideal"] = name
            return out
        out.loci.append(report.to_model())
    return out


def _check_polynomial_extension(fx: Fixture, block: CheckBlock) -> Outcome:
    M = fx.module(block.module)
    ring_t, ctx_t, lift = _extended_context(fx)
    Mt = M.extend_ring(ring_t)
    out = Outcome()
    kinds = [block.locus] if block.locus else ["cm", "mcm", "fid", "gor"]
    for kind in kinds:
        base, n = parse_kind(kind)
        here = pointwise_rule(base, M, fx.context, n)
        there = pointwise_rule(base, Mt, ctx_t, n)
        for name, p in fx.primes.items():
            if p not in fx.context.poset:
                continue
            a, b = here(p), there(lift[name])
            if INCONCLUSIVE in (a, b):
                return out.inconclusive("BASS_WINDOW", kind=kind, prime=p.label)
            if a != b:
                return out.fail(kind=kind, prime=p.label, over_R=a, over_R_t=b)
    return out


HANDLERS: Dict[str, Callable[[Fixture, CheckBlock], Outcome]] = {
    "locus": _check_locus,
    "oracle": _check_oracle,
    "topological_nagata": _check_nagata,
    "gor_fid_mcm": _check_gor_fid_mcm,
    "filtration_depth": _check_filtration,
    "nc_star": _check_nc_star,
    "mcm_implies_sn_open": _check_mcm_sn,
    "gor_equivalence": _check_gor_equivalence,
    "constructive_localization": _check_localization,
    "ext": _check_ext,
    "resolution": _check_resolution,
    "fitting_invariance": _check_fitting,
    "gorenstein_type": _check_gorenstein_type,
    "fid_quotient_open": _check_fid_quotients,
    "polynomial_extension": _check_polynomial_extension,
}


#
## Running
def _run_handler(fx: Fixture, block: CheckBlock) -> Outcome:
    try:
        return HANDLERS[block.kind](fx, block)
    except ResourceLimitError as e:
        logger.info("Check %s hit %s", block.id, e.budget)
        return Outcome().inconclusive(e.budget, message=str(e))
    except WitnessNotFoundError as e:
        return Outcome().inconclusive("WITNESS_MAX_FACTORS", message=str(e))
    except DecompositionUnavailableError as e:
        return Outcome().inconclusive("prime catalog", message=str(e))
    except HypothesisNotCertifiedError as e:
        return Outcome().fail(hypothesis_not_certified=str(e))


def replay_witness(fx: Fixture, block: CheckBlock, witness: Dict) -> bool:
    """Re-run a failed check and confirm it fails with the same witness."""
    again = _run_handler(fx, block)
    return again.verdict == "fail" and again.witness == witness


def run_check(fx: Fixture, block: CheckBlock) -> Tuple[CheckResult, List[LocusReportModel]]:
    logger.info("Running check %s (%s)", block.id, block.kind)
    out = _run_handler(fx, block)
    caveats = sorted(set(out.caveats))
    if out.verdict == "fail":
        replayed = replay_witness(fx, block, out.witness)
        caveats.append("witness replayed" if replayed else "witness replay disagreed")
        if not replayed:
            logger.warning("Witness of %s did not replay", block.id)
    result = CheckResult(
        id=block.id,
        ref=REFS[block.kind],
        kind=block.kind,
        verdict=out.verdict,
        witness=out.witness,
        caveats=caveats,
        expected=block.expect,
    )
    return result, out.loci


def run_checks(fx: Fixture, check_id: Optional[str] = None) -> VerifyReport:
    """Every check of the fixture (or one), ordered by id."""
    blocks = sorted(fx.checks, key=lambda c: c.id)
    if check_id is not None:
        blocks = [b for b in blocks if b.id == check_id]
        if not blocks:
            raise KeyError(f"no check {check_id!r} in {fx.name}")
    results, loci = [], {}
    for block in blocks:
        result, models = run_check(fx, block)
        results.append(result)
        for model in models:
            loci[(model.module, model.kind)] = model
    return VerifyReport(
        fixture=fx.name,
        checks=results,
        loci=[loci[k] for k in sorted(loci)],
    )
