"""schemas.py"""

import re
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1

Verdict = Literal["pass", "fail", "inconclusive"]

CHECK_KINDS = (
    "locus",
    "oracle",
    "topological_nagata",
    "gor_fid_mcm",
    "filtration_depth",
    "nc_star",
    "mcm_implies_sn_open",
    "gor_equivalence",
    "constructive_localization",
    "ext",
    "resolution",
    "fitting_invariance",
    "gorenstein_type",
    "fid_quotient_open",
    "polynomial_extension",
)

_NAME = re.compile(r"^[A-Za-z_][\w\-]*$")
_ORDER = re.compile(r"^(lex|grevlex|block:\d+)$")
LOCUS_NAME = re.compile(r"^(supp|free|cm|mcm|fid|gor|sn:\d+|tn:\d+)$")


#
## Fixture blocks
class RingBlock(BaseModel):
    """The `[ring]` table: S = Q[variables], R = S/relations."""

    name: str = "R"
    variables: List[str]
    order: str = "grevlex"
    relations: List[str] = Field(default_factory=list)
    gorenstein: Optional[bool] = None
    domain: Optional[bool] = None

    @field_validator("variables")
    @classmethod
    def validate_variables(cls, value):
        """Identifiers, no repeats."""
        for name in value:
            if not re.match(r"^[A-Za-z_]\w*$", name):
                raise ValueError(f"{name!r} is not a variable name")
        if len(set(value)) != len(value):
            raise ValueError("variables repeat")
        return value

    @field_validator("order")
    @classmethod
    def validate_order(cls, value):
        if not _ORDER.match(value):
            raise ValueError(f"order must be lex, grevlex or block:<k>, got {value!r}")
        return value


class ModuleBlock(BaseModel):
    """A `[[module]]` table; `relations` lists columns."""

    name: str
    generators: int = Field(default=1, ge=0)
    relations: List[List[str]] = Field(default_factory=list)
    same_as: Optional[str] = None

    @model_validator(mode="after")
    def validate_columns(self):
        for col in self.relations:
            if len(col) != self.generators:
                raise ValueError(
                    f"module {self.name}: column {col} has {len(col)} entries, "
                    f"expected {self.generators}"
                )
        return self


class PrimeBlock(BaseModel):
    """A `[[prime]]` table."""

    name: str
    generators: List[str] = Field(default_factory=list)
    provenance: Literal["monomial", "declared"] = "declared"
    contains: List[str] = Field(default_factory=list)
    minimal_of: List[str] = Field(default_factory=list)

    @field_validator("name")
    @classmethod
    def validate_name(cls, value):
        if not _NAME.match(value):
            raise ValueError(f"{value!r} is not a valid prime name")
        return value


class IdealBlock(BaseModel):
    """An `[[ideal]]` table naming an ideal for checks."""

    name: str
    generators: List[str] = Field(default_factory=list)


class CheckBlock(BaseModel):
    """A `[[check]]` table. Fields beyond `id`/`kind` depend on the kind."""

    id: str
    kind: str
    module: Optional[str] = None
    other: Optional[str] = None
    locus: Optional[str] = None
    prime: Optional[str] = None
    ideal: Optional[str] = None
    n: Optional[int] = None
    index: Optional[int] = None
    complement: Optional[List[str]] = None
    ranks: Optional[List[int]] = None
    value: Optional[Union[int, str]] = None
    sequences: List[List[str]] = Field(default_factory=list)
    items: List[int] = Field(default_factory=list)
    expect: Verdict = "pass"

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, value):
        if value not in CHECK_KINDS:
            raise ValueError(f"unknown check kind {value!r}")
        return value

    @field_validator("locus")
    @classmethod
    def validate_locus(cls, value):
        if value is not None and not LOCUS_NAME.match(value):
            raise ValueError(f"unknown locus {value!r}")
        return value


class FixtureModel(BaseModel):
    """A whole fixture document."""

    model_config = ConfigDict(populate_by_name=True)

    ring: RingBlock
    modules: List[ModuleBlock] = Field(default_factory=list, alias="module")
    primes: List[PrimeBlock] = Field(default_factory=list, alias="prime")
    ideals: List[IdealBlock] = Field(default_factory=list, alias="ideal")
    checks: List[CheckBlock] = Field(default_factory=list, alias="check")

    @model_validator(mode="after")
    def validate_unique_names(self):
        for label, names in (
            ("module", [m.name for m in self.modules]),
            ("prime", [p.name for p in self.primes]),
            ("ideal", [i.name for i in self.ideals]),
            ("check", [c.id for c in self.checks]),
        ):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {label} names in {names}")
        return self


#
## Results
class LocalProfile(BaseModel):
    """Local invariants of a module at one prime."""

    prime: str
    height_S: int
    dim_R_local: int
    dim_M_local: Union[int, Literal["empty"]]
    pd_local: Union[int, Literal["-inf", "unknown"]]
    depth_local: Union[int, Literal["inf", "unknown"]]
    bass: List[int] = Field(default_factory=list)
    caveats: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_local_inequalities(self):
        """pd is -inf exactly when M_p = 0; depth <= dim M_p <= dim R_p otherwise."""
        empty = self.dim_M_local == "empty"
        if empty != (self.pd_local == "-inf"):
            raise ValueError(f"at {self.prime}: empty localization must have pd -inf")
        if empty and self.depth_local != "inf":
            raise ValueError(f"at {self.prime}: empty localization must have depth inf")
        if not empty and isinstance(self.depth_local, int):
            if not self.depth_local <= self.dim_M_local <= self.dim_R_local:
                raise ValueError(
                    f"at {self.prime}: depth {self.depth_local} <= dim {self.dim_M_local} "
                    f"<= dim R_p {self.dim_R_local} fails"
                )
        return self


class LocusPiece(BaseModel):
    """V(closed) minus V(open)."""

    closed: List[str]
    open: List[str]


class LocusReportModel(BaseModel):
    """JSON view of a computed locus."""

    module: str = ""
    kind: str
    mode: Literal["closed-form", "candidate-enumerated", "pointwise"]
    form: Literal["open", "closed", "pieces", "pointwise"]
    complement_ideal: Optional[List[str]] = None
    pieces: Optional[List[LocusPiece]] = None
    caveats: List[str] = Field(default_factory=list)
    sample_verdicts: Dict[str, Union[bool, Literal["inconclusive"]]] = Field(
        default_factory=dict
    )


class CheckResult(BaseModel):
    """One harness verdict."""

    id: str
    ref: str
    kind: str
    verdict: Verdict
    witness: Dict[str, Any] = Field(default_factory=dict)
    caveats: List[str] = Field(default_factory=list)
    expected: Verdict = "pass"
    as_expected: bool = True

    @model_validator(mode="after")
    def validate_witness(self):
        """A fail must say why; an inconclusive must name the budget."""
        if self.verdict == "fail" and not self.witness:
            raise ValueError(f"check {self.id} failed without a witness")
        if self.verdict == "inconclusive" and "budget" not in self.witness:
            raise ValueError(f"check {self.id} is inconclusive without a budget")
        self.as_expected = self.verdict == self.expected
        return self


class VerifyReport(BaseModel):
    """Everything `verify` prints or saves for one fixture."""

    schema_version: int = SCHEMA_VERSION
    fixture: str
    checks: List[CheckResult] = Field(default_factory=list)
    loci: List[LocusReportModel] = Field(default_factory=list)

    def exit_code(self) -> int:
        """0 all pass, 1 any fail, 2 any inconclusive."""
        verdicts = {c.verdict for c in self.checks}
        if "fail" in verdicts:
            return 1
        if "inconclusive" in verdicts:
            return 2
        return 0
