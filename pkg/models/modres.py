"""
modres.py - Finitely presented modules over S = Q[x1..xn] and over quotients R = S/J.

A module over R is stored as S-data: g generators and a list of relation columns, with
the columns J*e_i implied. All kernel computations run over S through the Groebner
engine, using position-over-term bases to cut the kernel out of a larger free module.
"""

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import config
from models.groebner import (
    Ideal,
    column_to_vec,
    intersect,
    krull_dim,
    submodule_basis,
    submodule_basis_of_vecs,
)
from models.qpoly import Polynomial, TermOrder, parse_polynomial

logger = logging.getLogger("loci_logger")

Column = Tuple[Polynomial, ...]
Matrix = Tuple[Column, ...]


class AffineRing:
    """R = Q[variables]/J with a fixed monomial order."""

    def __init__(
        self,
        variables: Sequence[str],
        relations: Iterable[Polynomial] = (),
        order: Optional[TermOrder] = None,
        name: str = "",
        gorenstein: Optional[bool] = None,
        domain: Optional[bool] = None,
    ):
        self.variables = tuple(variables)
        self.order = order or TermOrder("grevlex", len(self.variables))
        self.relations = Ideal(relations, self.variables, self.order)
        self.name = name
        self._gorenstein = gorenstein
        self._domain = domain

    @classmethod
    def polynomial(cls, variables: Sequence[str], name: str = "") -> "AffineRing":
        return cls(variables, (), name=name)

    #
    ## Invariants of R
    @cached_property
    def dim(self) -> int:
        """Krull dimension; -1 for the zero ring."""
        return krull_dim(self.relations)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def is_zero_ring(self) -> bool:
        return self.relations.is_unit()

    @property
    def is_polynomial_ring(self) -> bool:
        return self.relations.is_zero()

    @cached_property
    def is_complete_intersection(self) -> bool:
        """J generated by height-many elements."""
        if self.is_zero_ring:
            return False
        fewest = min(len(self.relations.generators), len(self.relations.canonical()))
        return fewest == self.nvars - self.dim

    @property
    def gorenstein_certified(self) -> bool:
        if self._gorenstein is not None:
            return self._gorenstein
        return self.is_complete_intersection

    @property
    def domain_certified(self) -> bool:
        if self._domain is not None:
            return self._domain
        return self.is_polynomial_ring

    #
    ## Elements and ideals
    def reduce(self, f: Polynomial) -> Polynomial:
        if self.relations.is_zero():
            return f
        return self.relations.reduce(f)

    def parse(self, text: str) -> Polynomial:
        return self.reduce(parse_polynomial(text, self.variables))

    def one(self) -> Polynomial:
        return Polynomial.constant(1, self.variables)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.variables)

    def ideal(self, generators: Iterable[Polynomial]) -> Ideal:
        """The ideal of S generated by J and the given elements."""
        return Ideal(tuple(generators) + self.relations.generators, self.variables, self.order)

    def quotient(self, I: Ideal, name: str = "") -> "AffineRing":
        """R/I, carrying the order."""
        return AffineRing(
            self.variables,
            self.relations.generators + I.generators,
            self.order,
            name=name or f"{self.name}/{I}",
        )

    def over_polynomial_ring(self) -> "AffineRing":
        """The ambient S."""
        return AffineRing(self.variables, (), self.order, name="S")

    def polynomial_extension(self, name: str = "t") -> "AffineRing":
        """R[t] with t a new last variable."""
        while name in self.variables:
            name += "_"
        variables = self.variables + (name,)
        return AffineRing(
            variables,
            [g.extend(variables) for g in self.relations.generators],
            self.order.with_nvars(len(variables)),
            name=f"{self.name}[{name}]",
            gorenstein=self._gorenstein,
            domain=self._domain,
        )

    def __eq__(self, other):
        if not isinstance(other, AffineRing):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.order == other.order
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash((self.variables, self.order, self.relations))

    def __str__(self):
        base = f"Q[{', '.join(self.variables)}]"
        if self.relations.is_zero():
            return base
        return f"{base}/{self.relations}"


def j_columns(ring: AffineRing, rank: int) -> List[Column]:
    """The columns f*e_i for f in J, which are zero over R."""
    zero = ring.zero()
    out = []
    for f in ring.relations.generators:
        for i in range(rank):
            out.append(tuple(f if k == i else zero for k in range(rank)))
    return out


def _reduce_column(ring: AffineRing, column: Sequence[Polynomial]) -> Column:
    return tuple(ring.reduce(p) for p in column)


def _is_zero_column(column: Sequence[Polynomial]) -> bool:
    return all(p.is_zero() for p in column)


def column_sort_key(column: Column) -> tuple:
    return (max(p.degree() for p in column), tuple(p.sort_key() for p in column))


@dataclass(frozen=True)
class ModulePresentation:
    """M = coker(columns) over the ring; J*e_i are implied relations."""

    ring: AffineRing
    generators: int
    columns: Matrix = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.generators < 0:
            raise ValueError("generator count must be non-negative")
        cleaned = []
        for col in self.columns:
            if len(col) != self.generators:
                raise ValueError(
                    f"relation column of length {len(col)} for {self.generators} generators"
                )
            col = _reduce_column(self.ring, col)
            if not _is_zero_column(col) and col not in cleaned:
                cleaned.append(col)
        object.__setattr__(self, "columns", tuple(cleaned))

    #
    ## Constructors
    @classmethod
    def cyclic(cls, ring: AffineRing, ideal_gens: Iterable[Polynomial], name: str = ""):
        """R/I."""
        return cls(ring, 1, tuple((f,) for f in ideal_gens), name)

    @classmethod
    def free(cls, ring: AffineRing, rank: int, name: str = ""):
        return cls(ring, rank, (), name)

    @classmethod
    def zero_module(cls, ring: AffineRing, name: str = "0"):
        return cls(ring, 0, (), name)

    def direct_sum(self, other: "ModulePresentation", name: str = "") -> "ModulePresentation":
        zero = self.ring.zero()
        left = tuple(col + (zero,) * other.generators for col in self.columns)
        right = tuple((zero,) * self.generators + col for col in other.columns)
        return ModulePresentation(
            self.ring, self.generators + other.generators, left + right, name
        )

    def over_polynomial_ring(self) -> "ModulePresentation":
        """The same module viewed over S, with J-columns written out."""
        if self.ring.is_polynomial_ring:
            return self
        S = self.ring.over_polynomial_ring()
        cols = tuple(self.columns) + tuple(j_columns(self.ring, self.generators))
        return ModulePresentation(S, self.generators, cols, self.name)

    def extend_ring(self, ring: AffineRing) -> "ModulePresentation":
        """M tensored up to a ring with more variables (e.g. R[t])."""
        cols = tuple(tuple(p.extend(ring.variables) for p in col) for col in self.columns)
        return ModulePresentation(ring, self.generators, cols, self.name)

    #
    ## Queries
    def relation_columns(self) -> List[Column]:
        """Relations over S, J-columns included."""
        return list(self.columns) + j_columns(self.ring, self.generators)

    def relation_basis(self):
        return submodule_basis(
            self.relation_columns(),
            self.generators,
            self.ring.variables,
            self.ring.order,
            "top",
            what=f"relations of {self.label}",
        )

    def unit_vector(self, i: int) -> Column:
        one, zero = self.ring.one(), self.ring.zero()
        return tuple(one if k == i else zero for k in range(self.generators))

    def is_zero(self) -> bool:
        if self.generators == 0:
            return True
        basis = self.relation_basis()
        return all(basis.contains(self.unit_vector(i)) for i in range(self.generators))

    @property
    def label(self) -> str:
        return self.name or f"coker {self.generators}x{len(self.columns)}"

    def __str__(self):
        rows = ["[" + ", ".join(str(col[i]) for col in self.columns) + "]"
                for i in range(self.generators)]
        return f"{self.label} over {self.ring}: " + ("; ".join(rows) or "0")


#
## Matrix helpers
def apply(columns: Sequence[Column], vector: Sequence[Polynomial], rows: int, variables):
    """Matrix times vector."""
    out = [Polynomial.zero(variables) for _ in range(rows)]
    for col, coeff in zip(columns, vector):
        if coeff.is_zero():
            continue
        for i in range(rows):
            if not col[i].is_zero():
                out[i] = out[i] + coeff * col[i]
    return tuple(out)


def determinant(rows: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Laplace expansion along the first row."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    variables = rows[0][0].variables
    total = Polynomial.zero(variables)
    for j, entry in enumerate(rows[0]):
        if entry.is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = entry * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


#
## Kernels
def kernel_modulo(
    ring: AffineRing, cols: Sequence[Column], rank: int, extra: Sequence[Column] = ()
) -> List[Column]:
    """{h in S^len(cols) : sum h_k cols[k] in span(extra) + J S^rank}, reduced mod J."""
    s = len(cols)
    if s == 0:
        return []
    gens = []
    for k, col in enumerate(cols):
        vec = column_to_vec(col)
        vec[(rank + k, (0,) * ring.nvars)] = Fraction(1)
        gens.append(vec)
    for col in list(extra) + j_columns(ring, rank):
        gens.append(column_to_vec(col))
    basis = submodule_basis_of_vecs(
        gens, rank + s, ring.variables, ring.order, "pot", what=f"kernel of {rank}x{s} matrix"
    )
    out = []
    for vec, lead in zip(basis.vectors, basis.leads):
        if lead[0] < rank:
            continue
        terms = {}
        for (pos, mono), c in vec.items():
            terms.setdefault(pos - rank, {})[mono] = c
        col = tuple(ring.reduce(Polynomial(terms.get(k, {}), ring.variables)) for k in range(s))
        if not _is_zero_column(col) and col not in out:
            out.append(col)
    return out


def span_contains(ring: AffineRing, cols: Sequence[Column], rank: int, column: Column) -> bool:
    """column in span(cols) + J S^rank."""
    basis = submodule_basis(
        list(cols) + j_columns(ring, rank), rank, ring.variables, ring.order, "top",
        what="span membership",
    )
    return basis.contains(column)


def trim_columns(ring: AffineRing, cols: Sequence[Column], rank: int) -> List[Column]:
    """Drop columns lying in the span of the others until the set is irredundant over R."""
    cols = sorted({c for c in cols if not _is_zero_column(c)}, key=column_sort_key)
    if len(cols) > config.TRIM_LIMIT:
        logger.info("Not trimming %d columns (TRIM_LIMIT=%d)", len(cols), config.TRIM_LIMIT)
        return cols
    kept = list(cols)
    for col in reversed(cols):
        others = [k for k in kept if k != col]
        if span_contains(ring, others, rank, col):
            kept = others
    return kept


def syzygies(ring: AffineRing, cols: Sequence[Column], rank: int) -> List[Column]:
    """Irredundant generators of the kernel of the matrix R^len(cols) -> R^rank."""
    cols = [_reduce_column(ring, c) for c in cols]
    kernel = kernel_modulo(ring, cols, rank)
    return trim_columns(ring, kernel, len(cols))


def colon_vector(ring: AffineRing, cols: Sequence[Column], rank: int, v: Column) -> Ideal:
    """{f in S : f v in span(cols) + J S^rank}."""
    gens = kernel_modulo(ring, [v], rank, extra=cols)
    return ring.ideal(col[0] for col in gens)


#
## Presentations
def prune_presentation(M: ModulePresentation) -> ModulePresentation:
    """Eliminate generators killed by a relation with a nonzero constant entry."""
    g = M.generators
    cols = [list(c) for c in M.columns]
    alive = list(range(g))
    while True:
        pivot = None
        for ci, col in enumerate(cols):
            for r in alive:
                if col[r].is_constant() and not col[r].is_zero():
                    pivot = (ci, r)
                    break
            if pivot:
                break
        if pivot is None:
            break
        ci, r = pivot
        a = cols.pop(ci)
        c = a[r].constant_value()
        new_cols = []
        for col in cols:
            if col[r].is_zero():
                new_cols.append(col)
                continue
            factor = col[r].scale(1 / c)
            new_cols.append([M.ring.reduce(x - factor * y) for x, y in zip(col, a)])
        cols = new_cols
        alive.remove(r)
    columns = tuple(tuple(col[r] for r in alive) for col in cols)
    pruned = ModulePresentation(M.ring, len(alive), columns, M.name)
    if pruned.generators:
        pruned = ModulePresentation(
            M.ring, pruned.generators,
            tuple(trim_columns(M.ring, pruned.columns, pruned.generators)), M.name,
        )
    return pruned


def subquotient(
    ring: AffineRing, U: Sequence[Column], N: Sequence[Column], rank: int, name: str = ""
) -> ModulePresentation:
    """Presentation of (span U + N)/N with generators the columns of U."""
    U = [c for c in U if not _is_zero_column(c)]
    relations = kernel_modulo(ring, U, rank, extra=N)
    return prune_presentation(ModulePresentation(ring, len(U), tuple(relations), name))


def quotient_module(M: ModulePresentation, I: Ideal, name: str = "") -> ModulePresentation:
    """M/IM as a module over R/I."""
    ring = M.ring.quotient(I)
    cols = tuple(
        tuple(p.extend(ring.variables) for p in col) for col in M.columns
    )
    return ModulePresentation(ring, M.generators, cols, name or f"{M.label}/({I}){M.label}")


def submodule_quotient(
    M: ModulePresentation, inner: Sequence[Column], outer: Sequence[Column], name: str = ""
) -> ModulePresentation:
    """(outer + relations)/(inner + relations) for submodules of M given by columns."""
    N = list(inner) + list(M.columns)
    return subquotient(M.ring, outer, N, M.generators, name)


def ideal_times_module(M: ModulePresentation, I: Ideal) -> List[Column]:
    """Generating columns of I*M inside the free cover."""
    return [
        tuple(f if k == i else M.ring.zero() for k in range(M.generators))
        for f in I.generators
        for i in range(M.generators)
    ]


#
## Invariants of presentations
def fitting_ideal(M: ModulePresentation, r: int) -> Ideal:
    """Fitt_r(M): (g - r)-minors of the presentation, plus J."""
    if r < 0:
        raise ValueError("Fitting index must be non-negative")
    P = prune_presentation(M)
    ring, g = P.ring, P.generators
    size = g - r
    if size <= 0:
        return Ideal.unit(ring.variables, ring.order)
    if size > len(P.columns):
        return ring.ideal(())
    minors = []
    for rows in combinations(range(g), size):
        for cols in combinations(range(len(P.columns)), size):
            det = determinant([[P.columns[c][i] for c in cols] for i in rows])
            det = ring.reduce(det)
            if not det.is_zero():
                minors.append(det)
    return ring.ideal(minors)


def annihilator(M: ModulePresentation) -> Ideal:
    """Ann M = intersection over generators of (relations : e_i)."""
    ring = M.ring
    if M.generators == 0:
        return Ideal.unit(ring.variables, ring.order)
    result = None
    cols = M.relation_columns()
    for i in range(M.generators):
        part = colon_vector(ring, cols, M.generators, M.unit_vector(i))
        result = part if result is None else intersect(result, part)
    return Ideal(result.canonical(), ring.variables, ring.order)


#
## Resolutions
@dataclass(frozen=True)
class FreeResolution:
    """F_0 <- F_1 <- ... ; differentials[k - 1] maps F_k to F_{k-1}."""

    ring: AffineRing
    ranks: Tuple[int, ...]
    differentials: Tuple[Matrix, ...]
    status: Literal["complete", "infinite-or-unknown-pd"]

    @property
    def length(self) -> int:
        return len(self.differentials)

    def differential(self, k: int) -> Matrix:
        """d_k : F_k -> F_{k-1}; empty beyond the computed range."""
        if 1 <= k <= len(self.differentials):
            return self.differentials[k - 1]
        return ()

    def rank(self, k: int) -> int:
        return self.ranks[k] if 0 <= k < len(self.ranks) else 0

    @property
    def projective_dimension(self) -> Optional[int]:
        if self.status != "complete":
            return None
        return len(self.ranks) - 1 if self.ranks[0] else -1


def default_cutoff(ring: AffineRing) -> int:
    if config.RESOLUTION_CUTOFF:
        return int(config.RESOLUTION_CUTOFF)
    return ring.nvars + max(ring.dim, 0) + 2


def free_resolution(M: ModulePresentation, length: Optional[int] = None) -> FreeResolution:
    """Resolution by iterated irredundant syzygies, unit entries pruned."""
    if length is None:
        length = default_cutoff(M.ring)
    if length < 0:
        raise ValueError("length must be non-negative")
    with _RES_LOCK:
        cached = _RES_STATE.get(M)
        if cached is not None:
            _RES_STATE.move_to_end(M)
            state = cached.copy()
    if cached is None:
        P = prune_presentation(M)
        state = _ResolutionState([P.generators], [], list(P.columns), P.generators)
        if P.generators == 0:
            state.pending = []

    ring = M.ring
    while len(state.diffs) < length and state.pending:
        current = state.pending
        state.diffs.append(tuple(current))
        state.ranks.append(len(current))
        state.pending = syzygies(ring, current, state.rows)
        state.rows = len(current)
        logger.debug("resolution of %s: F_%d has rank %d", M.label, len(state.diffs),
                     state.ranks[-1])
    _store_state(M, state)

    diffs = tuple(state.diffs[:length])
    ranks = tuple(state.ranks[: length + 1])
    finished = not state.pending and len(state.diffs) <= length
    if not finished:
        logger.info("Resolution of %s truncated at length %d", M.label, length)
    return FreeResolution(ring, ranks, diffs, "complete" if finished else "infinite-or-unknown-pd")


class _ResolutionState:
    """Longest prefix computed so far; `pending` holds the next syzygies."""

    def __init__(self, ranks, diffs, pending, rows):
        self.ranks = ranks
        self.diffs = diffs
        self.pending = pending
        self.rows = rows

    def copy(self) -> "_ResolutionState":
        return _ResolutionState(list(self.ranks), list(self.diffs), self.pending, self.rows)


#
## Resolution prefixes: callers extend a private copy, the longest one is kept
RES_CACHE_SIZE = 128
_RES_STATE: "OrderedDict[ModulePresentation, _ResolutionState]" = OrderedDict()
_RES_LOCK = threading.Lock()


def _store_state(M: ModulePresentation, state: _ResolutionState):
    with _RES_LOCK:
        stored = _RES_STATE.get(M)
        if stored is None or len(stored.diffs) < len(state.diffs):
            _RES_STATE[M] = state
        _RES_STATE.move_to_end(M)
        while len(_RES_STATE) > RES_CACHE_SIZE:
            _RES_STATE.popitem(last=False)


def clear_resolutions():
    """Forget every cached resolution prefix."""
    with _RES_LOCK:
        _RES_STATE.clear()


def verify_exactness(res: FreeResolution) -> bool:
    """d_k d_{k+1} = 0 and ker d_k ⊆ im d_{k+1} at every computed step."""
    ring = res.ring
    for k in range(1, res.length + 1):
        d = res.differential(k)
        nxt = res.differential(k + 1)
        rows = res.rank(k - 1)
        for col in nxt:
            image = apply(d, col, rows, ring.variables)
            if not all(ring.reduce(p).is_zero() for p in image):
                return False
        if k < res.length or res.status == "complete":
            for col in kernel_modulo(ring, list(d), rows):
                if not span_contains(ring, nxt, res.rank(k), col):
                    return False
    return True


def syzygy_module(M: ModulePresentation, n: int) -> ModulePresentation:
    """Omega^n M = coker(d_{n+1}) on F_n, from the pruned resolution."""
    if n == 0:
        return prune_presentation(M)
    res = free_resolution(M, n + 1)
    rank = res.rank(n)
    return prune_presentation(
        ModulePresentation(M.ring, rank, res.differential(n + 1), f"Omega^{n} {M.label}")
    )


#
## Hom and Ext
def _block_diagonal(N: ModulePresentation, copies: int) -> List[Column]:
    zero = N.ring.zero()
    g = N.generators
    out = []
    for block in range(copies):
        for col in N.columns:
            full = [zero] * (g * copies)
            full[block * g : (block + 1) * g] = col
            out.append(tuple(full))
    return out


def _hom_map(d: Matrix, src: int, dst: int, g: int, ring: AffineRing) -> List[Column]:
    """Columns of Hom(d, N): N^src -> N^dst for d : R^dst -> R^src."""
    zero = ring.zero()
    out = []
    for k in range(src):
        for m in range(g):
            col = [zero] * (g * dst)
            for l, dcol in enumerate(d):
                col[l * g + m] = dcol[k]
            out.append(tuple(col))
    return out


def ext_module(M: ModulePresentation, N: ModulePresentation, i: int) -> ModulePresentation:
    """Ext^i(M, N) as the cohomology of Hom(F., N)."""
    if i < 0:
        raise ValueError("Ext index must be non-negative")
    if M.ring != N.ring:
        raise ValueError("Ext needs both modules over the same ring")
    ring = N.ring
    res = free_resolution(M, i + 1)
    g = N.generators
    a_i, a_next = res.rank(i), res.rank(i + 1)
    name = f"Ext^{i}({M.label}, {N.label})"
    if a_i == 0 or g == 0:
        return ModulePresentation.zero_module(ring, name)

    size = g * a_i
    if a_next:
        phi = _hom_map(res.differential(i + 1), a_i, a_next, g, ring)
        cycles = kernel_modulo(ring, phi, g * a_next, extra=_block_diagonal(N, a_next))
    else:
        one, zero = ring.one(), ring.zero()
        cycles = [tuple(one if k == j else zero for k in range(size)) for j in range(size)]

    boundaries = _block_diagonal(N, a_i)
    if i >= 1 and res.rank(i - 1):
        boundaries += _hom_map(res.differential(i), res.rank(i - 1), a_i, g, ring)
    return subquotient(ring, cycles, boundaries, size, name)


def hom_module(M: ModulePresentation, N: ModulePresentation) -> ModulePresentation:
    return ext_module(M, N, 0)
