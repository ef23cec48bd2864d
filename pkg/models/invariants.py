"""
invariants.py - Local invariants of a module at an explicit prime.

Depth and projective dimension are read off Ext_S(M, S) over the regular ambient ring
(Auslander-Buchsbaum), dimensions come from minimal primes and the dimension formula,
and Bass numbers are generic ranks over R/p of Ext_R(R/p, M).
"""

import logging
import math
import threading
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import config
from models.groebner import (
    DeclaredDecompositionInconsistentError,
    Ideal,
    PrimeIdeal,
    ResourceLimitError,
    krull_dim,
    minimal_primes,
)
from models.modres import (
    AffineRing,
    Column,
    ModulePresentation,
    annihilator,
    ext_module,
    kernel_modulo,
    span_contains,
)
from models.qpoly import Polynomial
from models.schemas import LocalProfile

logger = logging.getLogger("loci_logger")

EMPTY = "empty"
NEG_INF = -math.inf
POS_INF = math.inf

Depth = Union[int, float]


class DecompositionUnavailableError(Exception):
    """Minimal primes of a non-monomial ideal are neither declared nor in the prime catalog."""


class NotMaximalError(Exception):
    """An operation that needs a maximal ideal received a non-maximal prime."""


#
## Prime catalog
class PrimeCatalog:
    """The explicit primes a fixture knows about, plus declared decompositions.

    Minimal primes of monomial ideals are computed exactly. For other ideals the catalog
    primes containing the ideal are minimalised and accepted only once their intersection
    is shown to have the same radical as the ideal.
    """

    def __init__(
        self,
        primes: Sequence[PrimeIdeal] = (),
        declared: Optional[Mapping[Ideal, Sequence[PrimeIdeal]]] = None,
    ):
        self.primes = list(primes)
        self.declared = dict(declared or {})
        self._cache: Dict[Ideal, List[PrimeIdeal]] = {}
        self._lock = threading.Lock()

    def add(self, prime: PrimeIdeal):
        if prime not in self.primes:
            self.primes.append(prime)

    def named(self, prime: PrimeIdeal) -> PrimeIdeal:
        """The catalog entry equal to prime, for its name."""
        for p in self.primes:
            if p == prime:
                return p
        return prime

    def containing(self, I: Ideal) -> List[PrimeIdeal]:
        return [p for p in self.primes if p.contains_ideal(I)]

    def minimal_primes(self, I: Ideal) -> List[PrimeIdeal]:
        with self._lock:
            hit = self._cache.get(I)
        if hit is not None:
            return hit
        result = [self.named(p) for p in self._minimal_primes(I)]
        with self._lock:
            self._cache[I] = result
        return result

    def _minimal_primes(self, I: Ideal) -> List[PrimeIdeal]:
        if I.is_unit():
            return []
        if I in self.declared:
            return minimal_primes(I, self.declared[I])
        if I.is_monomial():
            return minimal_primes(I)
        over = self.containing(I)
        lowest = [p for p in over if not any(q != p and q <= p for q in over)]
        unique: List[PrimeIdeal] = []
        for p in lowest:
            if p not in unique:
                unique.append(p)
        if not unique:
            raise DecompositionUnavailableError(f"no catalog prime contains {I}")
        try:
            return minimal_primes(I, unique)
        except DeclaredDecompositionInconsistentError as e:
            raise DecompositionUnavailableError(
                f"catalog primes do not decompose {I}: {e}"
            ) from e


#
## Dimensions
def height_in_S(p: PrimeIdeal) -> int:
    """ht p = nvars - dim S/p."""
    return len(p.variables) - krull_dim(p.ideal)


def dim_quotient(p: PrimeIdeal) -> int:
    """dim S/p."""
    return krull_dim(p.ideal)


def local_dim_of_ideal(I: Ideal, p: PrimeIdeal, catalog: PrimeCatalog) -> Union[int, str]:
    """dim (S/I)_p, or "empty" when no minimal prime of I lies in p."""
    below = [q for q in catalog.minimal_primes(I) if q <= p]
    if not below:
        return EMPTY
    return max(dim_quotient(q) for q in below) - dim_quotient(p)


def dim_R_local(ring: AffineRing, p: PrimeIdeal, catalog: PrimeCatalog) -> int:
    """dim R_p by the dimension formula over the minimal primes of J."""
    if ring.is_polynomial_ring:
        return height_in_S(p)
    value = local_dim_of_ideal(ring.relations, p, catalog)
    if value == EMPTY:
        raise ValueError(f"{p.label} does not contain the relations {ring.relations}")
    return value


def local_dim(M: ModulePresentation, p: PrimeIdeal, catalog: PrimeCatalog) -> Union[int, str]:
    """dim M_p, "empty" if M_p = 0."""
    return local_dim_of_ideal(module_annihilator(M), p, catalog)


#
## Depth through Ext over S
@lru_cache(maxsize=256)
def module_annihilator(M: ModulePresentation) -> Ideal:
    return annihilator(M)


@lru_cache(maxsize=256)
def ext_annihilators_S(M: ModulePresentation) -> Tuple[Ideal, ...]:
    """Ann Ext^j_S(M, S) for j = 0..nvars."""
    MS = M.over_polynomial_ring()
    S = MS.ring
    free = ModulePresentation.free(S, 1, "S")
    out = []
    for j in range(S.nvars + 1):
        out.append(module_annihilator(ext_module(MS, free, j)))
    return tuple(out)


def in_support(M: ModulePresentation, p: PrimeIdeal) -> bool:
    """M_p != 0."""
    return p.contains_ideal(module_annihilator(M))


def local_pd(M: ModulePresentation, p: PrimeIdeal) -> Depth:
    """pd of M_p over S_p: the largest j with Ext^j_S(M, S)_p nonzero."""
    if not in_support(M, p):
        return NEG_INF
    best = NEG_INF
    for j, ann in enumerate(ext_annihilators_S(M)):
        if p.contains_ideal(ann):
            best = j
    return best


def local_depth(M: ModulePresentation, p: PrimeIdeal) -> Depth:
    """depth M_p = ht p - pd M_p, +inf for a zero localization."""
    pd = local_pd(M, p)
    if pd == NEG_INF:
        return POS_INF
    return height_in_S(p) - pd


#
## Ranks modulo a prime
def generic_rank(columns: Sequence[Column], rows: int, p: PrimeIdeal) -> int:
    """Rank over the fraction field of S/p, by fraction-free elimination."""
    ideal = p.ideal
    matrix = [[ideal.reduce(col[i]) for col in columns] for i in range(rows)]
    rank = 0
    ncols = len(columns)
    for c in range(ncols):
        pivot = next((r for r in range(rank, rows) if not matrix[r][c].is_zero()), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        head = matrix[rank][c]
        for r in range(rank + 1, rows):
            entry = matrix[r][c]
            if entry.is_zero():
                continue
            matrix[r] = [
                ideal.reduce(head * matrix[r][k] - entry * matrix[rank][k]) for k in range(ncols)
            ]
        rank += 1
        if rank == rows:
            break
    return rank


def fiber_dimension(M: ModulePresentation, p: PrimeIdeal) -> int:
    """dim over kappa(p) of M tensor kappa(p): the local number of generators."""
    return M.generators - generic_rank(M.columns, M.generators, p)


#
## Bass numbers
def bass_window(ring: AffineRing) -> int:
    if config.BASS_WINDOW:
        return int(config.BASS_WINDOW)
    return max(ring.dim, 0) + 2


def bass_numbers(p: PrimeIdeal, M: ModulePresentation, top: Optional[int] = None) -> List[int]:
    """mu^0..mu^top of M at p."""
    top = bass_window(M.ring) if top is None else top
    if not in_support(M, p):
        return [0] * (top + 1)
    residue = ModulePresentation.cyclic(M.ring, p.ideal.generators, f"R/{p.label}")
    out = []
    for i in range(top + 1):
        E = ext_module(residue, M, i)
        out.append(fiber_dimension(E, p))
    return out


def bass_number(p: PrimeIdeal, M: ModulePresentation, i: int) -> int:
    if i < 0:
        raise ValueError("Bass numbers are indexed from 0")
    return bass_numbers(p, M, i)[i]


def gorenstein_type(
    M: ModulePresentation, m: PrimeIdeal, catalog: PrimeCatalog, top: Optional[int] = None
) -> Union[int, str]:
    """Top Bass number when M_m is a Gorenstein module, else a verdict string."""
    if dim_quotient(m) != 0:
        raise NotMaximalError(f"{m.label} is not maximal")
    if not in_support(M, m):
        return 0
    d = dim_R_local(M.ring, m, catalog)
    top = max(bass_window(M.ring) if top is None else top, d)
    try:
        mu = bass_numbers(m, M, top)
    except ResourceLimitError as e:
        logger.info("Bass window at %s inconclusive: %s", m.label, e)
        return "inconclusive"
    if mu[d] > 0 and all(v == 0 for i, v in enumerate(mu) if i != d):
        return mu[d]
    return "not-Gorenstein-module"


#
## Regular sequences and regular rings
def _multiple_of_unit(M: ModulePresentation, x: Polynomial) -> List[Column]:
    zero = M.ring.zero()
    return [
        tuple(x if k == i else zero for k in range(M.generators)) for i in range(M.generators)
    ]


def is_regular_sequence(xs: Sequence[Polynomial], M: ModulePresentation) -> bool:
    """Each x_i a nonzerodivisor on M/(x_1..x_{i-1})M, and the final quotient nonzero."""
    ring, g = M.ring, M.generators
    relations = list(M.columns)
    for x in xs:
        x = ring.reduce(x)
        hits = kernel_modulo(ring, _multiple_of_unit(M, x), g, extra=relations)
        if any(not span_contains(ring, relations, g, h) for h in hits):
            return False
        relations += _multiple_of_unit(M, x)
    quotient = ModulePresentation(ring, g, tuple(relations))
    return not quotient.is_zero()


def jacobian_columns(ring: AffineRing) -> List[Column]:
    """Columns are the gradients of the generators of J."""
    return [tuple(f.diff(v) for v in ring.variables) for f in ring.relations.generators]


def is_regular_local(ring: AffineRing, p: PrimeIdeal, catalog: PrimeCatalog) -> bool:
    """Jacobian criterion: rank of the Jacobian mod p equals ht_S(p) - dim R_p."""
    if ring.is_polynomial_ring:
        return True
    codim = height_in_S(p) - dim_R_local(ring, p, catalog)
    return generic_rank(jacobian_columns(ring), ring.nvars, p) == codim


def ring_module(ring: AffineRing) -> ModulePresentation:
    return ModulePresentation.free(ring, 1, "R")


def ring_is_cm_at(ring: AffineRing, p: PrimeIdeal, catalog: PrimeCatalog) -> bool:
    """depth R_p = dim R_p."""
    return local_depth(ring_module(ring), p) == dim_R_local(ring, p, catalog)


#
## Profiles
def _fmt(value) -> Union[int, str]:
    if value == POS_INF:
        return "inf"
    if value == NEG_INF:
        return "-inf"
    return value


def local_profile(
    M: ModulePresentation, p: PrimeIdeal, catalog: PrimeCatalog, with_bass: bool = True
) -> LocalProfile:
    """Every local invariant of M at p in one record."""
    caveats = []
    try:
        pd = _fmt(local_pd(M, p))
        depth = _fmt(local_depth(M, p))
    except ResourceLimitError as e:
        pd, depth = "unknown", "unknown"
        caveats.append(f"pd/depth: {e}")
    bass: List[int] = []
    if with_bass:
        try:
            bass = bass_numbers(p, M)
        except ResourceLimitError as e:
            caveats.append(f"bass: {e}")
    return LocalProfile(
        prime=p.label,
        height_S=height_in_S(p),
        dim_R_local=dim_R_local(M.ring, p, catalog),
        dim_M_local=local_dim(M, p, catalog),
        pd_local=pd,
        depth_local=depth,
        bass=bass,
        caveats=caveats,
    )
