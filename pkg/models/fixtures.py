"""
fixtures.py - Read, validate and print fixture files.

A fixture is a TOML document with `[ring]`, `[[module]]`, `[[prime]]`, `[[ideal]]` and
`[[check]]` tables. Everything that can be checked at load time is checked here:
polynomials parse under the declared variables, primes contain the relations, declared
containments hold and declared minimal-prime lists are consistent.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import tomlkit
from pydantic import ValidationError
from tomlkit.exceptions import ParseError

from models.groebner import (
    DeclaredDecompositionInconsistentError,
    Ideal,
    PrimeIdeal,
    minimal_primes,
)
from models.invariants import PrimeCatalog, module_annihilator, ring_module
from models.loci import LocusContext
from models.modres import AffineRing, ModulePresentation
from models.qpoly import PolynomialError, TermOrder, parse_many
from models.schemas import CheckBlock, FixtureModel

logger = logging.getLogger("loci_logger")

RING_MODULE = "R"


class FixtureParseError(Exception):
    """Syntax or type error in a fixture, with the offending line (0 if unknown)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class FixtureValidationError(Exception):
    """A fixture parsed but one of its declared facts is false."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class Fixture:
    """A validated fixture: the ring, its modules, primes, ideals and checks."""

    def __init__(
        self,
        name: str,
        model: FixtureModel,
        ring: AffineRing,
        modules: Dict[str, ModulePresentation],
        primes: Dict[str, PrimeIdeal],
        ideals: Dict[str, Ideal],
        catalog: PrimeCatalog,
    ):
        self.name = name
        self.model = model
        self.ring = ring
        self.modules = modules
        self.primes = primes
        self.ideals = ideals
        self.catalog = catalog
        self.context = LocusContext(ring, catalog)

    @property
    def checks(self) -> List[CheckBlock]:
        return self.model.checks

    def module(self, name: Optional[str]) -> ModulePresentation:
        return self.modules[name or RING_MODULE]

    def prime(self, name: str) -> PrimeIdeal:
        return self.primes[name]

    def same_as(self, name: str) -> Optional[str]:
        for block in self.model.modules:
            if block.name == name:
                return block.same_as
        return None

    def __eq__(self, other):
        if not isinstance(other, Fixture):
            return NotImplemented
        return self.model == other.model

    def __repr__(self):
        return f"Fixture({self.name!r}, ring={self.ring})"


#
## Locating errors in the source text
def _locate(text: str, loc: Sequence) -> int:
    """1-based line of the table (and key) a pydantic error location points at."""
    lines = text.splitlines()
    if not loc:
        return 0
    head = str(loc[0])
    if head == "ring":
        headers = [i for i, line in enumerate(lines) if line.strip() == "[ring]"]
    else:
        headers = [i for i, line in enumerate(lines) if line.strip() == f"[[{head}]]"]
    index = loc[1] if len(loc) > 1 and isinstance(loc[1], int) else 0
    if index >= len(headers):
        return 0
    start = headers[index]
    key = next((str(k) for k in loc[1:] if isinstance(k, str)), None)
    if key:
        pattern = re.compile(rf"^\s*{re.escape(key)}\s*=")
        for i in range(start + 1, len(lines)):
            if lines[i].lstrip().startswith("["):
                break
            if pattern.match(lines[i]):
                return i + 1
    return start + 1


def _block_line(text: str, table: str, index: int) -> int:
    return _locate(text, (table, index) if table != "ring" else ("ring",))


#
## Parsing
def parse_fixture(text: str, name: str = "fixture") -> Fixture:
    """Parse and validate fixture text."""
    try:
        data = tomlkit.parse(text).unwrap()
    except ParseError as e:
        raise FixtureParseError(e.line, str(e)) from e

    try:
        model = FixtureModel.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise FixtureParseError(_locate(text, first["loc"]), first["msg"]) from e

    ring = _build_ring(model, text)
    modules = _build_modules(model, ring, text)
    ideals = _build_ideals(model, ring, text)
    primes = _build_primes(model, ring, text)
    _check_containments(model, primes)
    declared = _declared_decompositions(model, ring, modules, ideals, primes)
    _check_references(model, modules, primes, ideals)

    catalog = PrimeCatalog(list(primes.values()), declared)
    logger.info(
        "Loaded fixture %s: %d modules, %d primes, %d checks",
        name,
        len(modules),
        len(primes),
        len(model.checks),
    )
    return Fixture(name, model, ring, modules, primes, ideals, catalog)


def load_fixture(path) -> Fixture:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_fixture(text, name=path.stem)


def _polys(texts: Sequence[str], ring_vars: Sequence[str], text: str, table: str, index: int):
    try:
        return parse_many(texts, ring_vars)
    except PolynomialError as e:
        raise FixtureParseError(_block_line(text, table, index), str(e)) from e


def _build_ring(model: FixtureModel, text: str) -> AffineRing:
    block = model.ring
    order = TermOrder.parse(block.order, len(block.variables))
    relations = _polys(block.relations, block.variables, text, "ring", 0)
    return AffineRing(
        block.variables,
        relations,
        order,
        name=block.name,
        gorenstein=block.gorenstein,
        domain=block.domain,
    )


def _build_modules(model: FixtureModel, ring: AffineRing, text: str):
    modules: Dict[str, ModulePresentation] = {RING_MODULE: ring_module(ring)}
    for i, block in enumerate(model.modules):
        columns = tuple(
            _polys(col, ring.variables, text, "module", i) for col in block.relations
        )
        modules[block.name] = ModulePresentation(ring, block.generators, columns, block.name)
    for block in model.modules:
        if block.same_as and block.same_as not in modules:
            raise FixtureValidationError(
                "same-as-reference", f"module {block.name} refers to unknown {block.same_as}"
            )
    return modules


def _build_ideals(model: FixtureModel, ring: AffineRing, text: str) -> Dict[str, Ideal]:
    ideals = {}
    for i, block in enumerate(model.ideals):
        gens = _polys(block.generators, ring.variables, text, "ideal", i)
        ideals[block.name] = Ideal(gens, ring.variables, ring.order)
    return ideals


def _build_primes(model: FixtureModel, ring: AffineRing, text: str) -> Dict[str, PrimeIdeal]:
    primes = {}
    for i, block in enumerate(model.primes):
        gens = _polys(block.generators, ring.variables, text, "prime", i)
        provenance = "monomial-checked" if block.provenance == "monomial" else "declared"
        try:
            prime = PrimeIdeal(Ideal(gens, ring.variables, ring.order), provenance, block.name)
        except ValueError as e:
            raise FixtureValidationError("prime-generators", f"{block.name}: {e}") from e
        if not prime.contains_ideal(ring.relations):
            raise FixtureValidationError(
                "prime-contains-relations", f"{block.name} does not contain {ring.relations}"
            )
        primes[block.name] = prime
    return primes


def _check_containments(model: FixtureModel, primes: Dict[str, PrimeIdeal]):
    for block in model.primes:
        for smaller in block.contains:
            if smaller not in primes:
                raise FixtureValidationError(
                    "declared-containment", f"{block.name} names unknown prime {smaller}"
                )
            if not primes[smaller] <= primes[block.name]:
                raise FixtureValidationError(
                    "declared-containment", f"{smaller} is not contained in {block.name}"
                )


def _minimal_of_target(
    label: str,
    ring: AffineRing,
    modules: Dict[str, ModulePresentation],
    ideals: Dict[str, Ideal],
) -> Ideal:
    if label == "relations":
        return ring.relations
    kind, _, name = label.partition(":")
    if kind == "ann" and name in modules:
        return module_annihilator(modules[name])
    if kind == "ideal" and name in ideals:
        return ring.ideal(ideals[name].generators)
    raise FixtureValidationError("minimal-of-reference", f"cannot resolve {label!r}")


def _declared_decompositions(model, ring, modules, ideals, primes) -> Dict[Ideal, List[PrimeIdeal]]:
    groups: Dict[str, List[PrimeIdeal]] = {}
    for block in model.primes:
        for label in block.minimal_of:
            groups.setdefault(label, []).append(primes[block.name])
    declared: Dict[Ideal, List[PrimeIdeal]] = {}
    for label, members in groups.items():
        target = _minimal_of_target(label, ring, modules, ideals)
        try:
            minimal_primes(target, members)
        except DeclaredDecompositionInconsistentError as e:
            raise FixtureValidationError("declared-minimal-primes", f"{label}: {e}") from e
        declared[target] = members
    return declared


def _check_references(model, modules, primes, ideals):
    for check in model.checks:
        for attr, pool in (("module", modules), ("other", modules), ("prime", primes),
                           ("ideal", ideals)):
            value = getattr(check, attr)
            if value is not None and value not in pool:
                raise FixtureValidationError(
                    "check-references", f"check {check.id} names unknown {attr} {value!r}"
                )


#
## Printing
def print_fixture(fixture) -> str:
    """TOML text that parses back to an equal fixture."""
    model = fixture.model if isinstance(fixture, Fixture) else fixture
    data = model.model_dump(by_alias=True, exclude_defaults=True)
    doc = tomlkit.document()
    doc.add("ring", _table(data["ring"]))
    for key in ("module", "prime", "ideal", "check"):
        rows = data.get(key) or []
        if not rows:
            continue
        array = tomlkit.aot()
        for row in rows:
            array.append(_table(row))
        doc.add(key, array)
    return tomlkit.dumps(doc)


def _table(row: dict):
    table = tomlkit.table()
    for key, value in row.items():
        table.add(key, value)
    return table
