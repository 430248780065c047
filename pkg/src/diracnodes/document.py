"""JSON problem documents: schema, loading and conversion to solver objects.

A document looks like::

    {
      "dimension": 5,
      "mass": 1.0,
      "potential": {"family": "Hellmann", "params": {"A": 0.7, "B": 0.5, "C": 0.25}},
      "j": "3/2",
      "tau": 1,
      "config": {"rtol": 1e-10},
      "output": {"samples_per_step": 4, "psi2_scale": 10}
    }

Tabulated potentials use ``"table": [[r0, V0], [r1, V1], ...]`` instead of
``params``.  For d = 1 the parity sector (``"even"``/``"odd"`` for u1) may be
given here or on the command line; unknown keys are rejected.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticError, field_validator

from .errors import ValidationError
from .potentials import Family, PotentialModel
from .radial_ode import Parity, ProblemSpec
from .shooting import MatchRule, ShootingConfig

__all__ = [
    "PotentialDocument",
    "ConfigDocument",
    "OutputDocument",
    "ProblemDocument",
    "load_document",
    "load_config",
    "parse_parity",
]

_PARITY_ALIASES = {
    "even": Parity.U1_EVEN,
    "u1_even": Parity.U1_EVEN,
    "odd": Parity.U1_ODD,
    "u1_odd": Parity.U1_ODD,
}


def parse_parity(value: str | Parity | None) -> Parity | None:
    if value is None or isinstance(value, Parity):
        return value
    try:
        return _PARITY_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise ValidationError(f"parity must be 'even' or 'odd', got {value!r}", field="parity") from None


def _half_integer(value: Any) -> float:
    """Accept 1.5, "1.5" or "3/2"."""
    if isinstance(value, bool):
        raise ValueError("expected a number")
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot read {value!r} as a number") from None
    return float(value)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PotentialDocument(_Strict):
    family: Family
    params: dict[str, float] = Field(default_factory=dict)
    table: list[tuple[float, float]] | None = None

    def build(self) -> PotentialModel:
        if self.table is not None:
            if self.family is not Family.TABULATED_MONOTONE:
                raise ValidationError(f"{self.family.value} does not take a table", field="potential.table")
            if self.params:
                raise ValidationError("a tabulated potential takes no params", field="potential.params")
            r, v = zip(*self.table) if self.table else ((), ())
            return PotentialModel(self.family, table_r=r, table_v=v)
        if self.family is Family.TABULATED_MONOTONE:
            raise ValidationError("TabulatedMonotone requires a table", field="potential.table")
        return PotentialModel(self.family, self.params)


class ConfigDocument(_Strict):
    """Overrides of the shooting defaults; grid density lives under ``output``."""

    rtol: float | None = None
    atol: float | None = None
    energy_tol: float | None = None
    scan_points: int | None = None
    match_rule: MatchRule | None = None
    max_states: int | None = None
    origin_offset: float | None = None
    tail_decay: float | None = None
    r_max_cap: float | None = None
    refine_depth: int | None = None
    edge_delta: float | None = None

    def overrides(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class OutputDocument(_Strict):
    samples_per_step: int = Field(default=4, ge=1)
    psi2_scale: float | None = None


class ProblemDocument(_Strict):
    dimension: int = Field(ge=1)
    mass: float = 1.0
    potential: PotentialDocument
    j: float | None = None
    tau: Literal[-1, 1] | None = None
    parity: str | None = None
    config: ConfigDocument = Field(default_factory=ConfigDocument)
    output: OutputDocument = Field(default_factory=OutputDocument)

    @field_validator("j", mode="before")
    @classmethod
    def _read_j(cls, v):
        return None if v is None else _half_integer(v)

    @field_validator("parity", mode="before")
    @classmethod
    def _read_parity(cls, v):
        return None if v is None else parse_parity(v).value

    def problem(self, parity: str | Parity | None = None) -> ProblemSpec:
        """The solver problem; ``parity`` overrides the document's sector."""
        sector = parse_parity(parity) if parity is not None else parse_parity(self.parity)
        return ProblemSpec(
            dimension=self.dimension,
            mass=self.mass,
            potential=self.potential.build(),
            j=self.j if self.dimension > 1 else None,
            tau=self.tau if self.dimension > 1 else None,
            parity=sector if self.dimension == 1 else None,
        )

    def shooting_config(self, extra: dict[str, Any] | None = None) -> ShootingConfig:
        # command-line config files are more specific than the document
        values = {**self.config.overrides(), **(extra or {}), "samples_per_step": self.output.samples_per_step}
        try:
            return ShootingConfig(**values)
        except ValueError as exc:
            raise ValidationError(str(exc), field="config") from exc


def _pointed(exc: PydanticError) -> ValidationError:
    err = exc.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "document"
    if err["type"] == "extra_forbidden":
        msg = f"unknown key {where!r}"
    elif err["type"] == "missing":
        msg = f"missing required key {where!r}"
    else:
        msg = f"{where}: {err['msg']}"
    return ValidationError(msg, field=where)


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", field="file") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", field="file") from exc


def load_document(source: str | Path | dict) -> ProblemDocument:
    """Parse a problem document from a path or an already-decoded mapping."""
    data = source if isinstance(source, dict) else _read_json(source)
    try:
        return ProblemDocument.model_validate(data)
    except PydanticError as exc:
        raise _pointed(exc) from None


def load_config(source: str | Path | dict) -> dict[str, Any]:
    """Shooting overrides from a standalone config file (same keys as ``config``)."""
    data = source if isinstance(source, dict) else _read_json(source)
    try:
        return ConfigDocument.model_validate(data).overrides()
    except PydanticError as exc:
        raise _pointed(exc) from None
