"""Attractive central potentials and their hypothesis checks.

All quantities are in natural units (hbar = c = 1).  A potential is a pure,
immutable description; the numerical kernels receive a packed form of it via
:meth:`PotentialModel.packed`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DomainError, UnsupportedPotentialError, ValidationError

__all__ = [
    "Family",
    "PotentialModel",
    "ValidationReport",
    "coulomb",
    "hellmann",
    "laser_dressed_coulomb",
    "tabulated",
    "evaluate",
    "derivative",
    "coulomb_coefficient",
    "validate",
    "default_validation_grid",
]


class Family(str, enum.Enum):
    COULOMB = "Coulomb"
    HELLMANN = "Hellmann"
    LASER_DRESSED_COULOMB = "LaserDressedCoulomb"
    TABULATED_MONOTONE = "TabulatedMonotone"


# integer codes understood by the compiled right-hand side
FAMILY_CODES = {
    Family.COULOMB: 0,
    Family.HELLMANN: 1,
    Family.LASER_DRESSED_COULOMB: 2,
    Family.TABULATED_MONOTONE: 3,
}

_REQUIRED = {
    Family.COULOMB: ("v",),
    Family.HELLMANN: ("A", "B", "C"),
    Family.LASER_DRESSED_COULOMB: ("v", "lambda"),
    Family.TABULATED_MONOTONE: (),
}

# relative spread of -r*V over the first table samples accepted as Coulomb-like
_TABLE_COULOMB_SPREAD = 1e-3


@dataclass(frozen=True)
class PotentialModel:
    """A named potential family with its parameters.

    For ``TabulatedMonotone`` the samples live in ``table_r``/``table_v`` and
    ``params`` is empty.  Outside the table the potential is held constant at
    the last sample; below the first sample it is either held constant (table
    starting at r = 0) or continued as ``-v0/r`` when the first samples are
    Coulomb-like.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    table_r: tuple[float, ...] = ()
    table_v: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "params", {k: float(v) for k, v in dict(self.params).items()})
        required = _REQUIRED[fam]
        missing = [name for name in required if name not in self.params]
        if missing:
            raise ValidationError(
                f"{fam.value} potential requires parameter(s) {', '.join(missing)}",
                field=missing[0],
            )
        unknown = sorted(set(self.params) - set(required))
        if unknown:
            raise ValidationError(
                f"unknown parameter(s) for {fam.value}: {', '.join(unknown)}", field=unknown[0]
            )
        p = self.params
        if fam is Family.COULOMB and not p["v"] > 0:
            raise ValidationError("Coulomb strength v must be positive", field="v")
        if fam is Family.LASER_DRESSED_COULOMB:
            if not p["v"] > 0:
                raise ValidationError("strength v must be positive", field="v")
            if not p["lambda"] > 0:
                raise ValidationError("lambda must be positive", field="lambda")
        if fam is Family.HELLMANN and not p["C"] >= 0:
            raise ValidationError("Hellmann screening C must be nonnegative", field="C")
        if fam is Family.TABULATED_MONOTONE:
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2:
                raise ValidationError("table needs at least two (r, V) pairs", field="table")
            if r[0] < 0 or np.any(np.diff(r) <= 0):
                raise ValidationError("table radii must be nonnegative and strictly increasing", field="table")
            if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
                raise ValidationError("table contains non-finite values", field="table")
            object.__setattr__(self, "table_r", tuple(float(x) for x in r))
            object.__setattr__(self, "table_v", tuple(float(x) for x in v))
        elif self.table_r or self.table_v:
            raise ValidationError(f"{fam.value} does not take a table", field="table")

    @property
    def singular(self) -> bool:
        """True when V ~ -v0/r at the origin."""
        if self.family is Family.TABULATED_MONOTONE:
            return self._table_origin_v0() > 0
        if self.family is Family.LASER_DRESSED_COULOMB:
            return False
        return coulomb_coefficient(self) != 0.0

    def _table_origin_v0(self) -> float:
        r = np.asarray(self.table_r)
        v = np.asarray(self.table_v)
        if r[0] == 0.0:
            return 0.0
        c = -r[:3] * v[:3]
        if c[0] > 0 and np.ptp(c) <= _TABLE_COULOMB_SPREAD * abs(c[0]):
            return float(c[0])
        raise UnsupportedPotentialError(
            "tabulated potential does not start at r=0 and -r*V does not settle to a "
            "constant over the first samples; origin behaviour is undetermined",
            field="table",
        )

    def packed(self) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(code, params[4], table_r, table_v)`` for the compiled kernels.

        For tables, ``params[0]`` carries the Coulomb continuation strength.
        """
        code = FAMILY_CODES[self.family]
        p = np.zeros(4)
        p_ = self.params
        if self.family is Family.COULOMB:
            p[0] = p_["v"]
        elif self.family is Family.HELLMANN:
            p[:3] = p_["A"], p_["B"], p_["C"]
        elif self.family is Family.LASER_DRESSED_COULOMB:
            p[:2] = p_["v"], p_["lambda"]
        else:
            p[0] = self._table_origin_v0()
            return code, p, np.asarray(self.table_r, float), np.asarray(self.table_v, float)
        return code, p, np.zeros(1), np.zeros(1)

    def to_dict(self) -> dict:
        if self.family is Family.TABULATED_MONOTONE:
            return {"family": self.family.value, "table": [list(t) for t in zip(self.table_r, self.table_v)]}
        return {"family": self.family.value, "params": dict(self.params)}


def coulomb(v: float) -> PotentialModel:
    return PotentialModel(Family.COULOMB, {"v": v})


def hellmann(A: float, B: float, C: float) -> PotentialModel:
    return PotentialModel(Family.HELLMANN, {"A": A, "B": B, "C": C})


def laser_dressed_coulomb(v: float, lam: float) -> PotentialModel:
    return PotentialModel(Family.LASER_DRESSED_COULOMB, {"v": v, "lambda": lam})


def tabulated(r, v) -> PotentialModel:
    return PotentialModel(Family.TABULATED_MONOTONE, table_r=tuple(np.asarray(r, float)),
                          table_v=tuple(np.asarray(v, float)))


def _check_radius(pot: PotentialModel, r: np.ndarray) -> None:
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    if np.any(r == 0) and pot.singular:
        raise DomainError(f"{pot.family.value} potential is singular at r=0")


def evaluate(pot: PotentialModel, r):
    """Closed-form value V(r); vectorised over ``r``."""
    ra = np.asarray(r, dtype=float)
    _check_radius(pot, ra)
    p = pot.params
    with np.errstate(divide="ignore", invalid="ignore"):
        if pot.family is Family.COULOMB:
            out = -p["v"] / ra
        elif pot.family is Family.HELLMANN:
            out = (-p["A"] + p["B"] * np.exp(-p["C"] * ra)) / ra
        elif pot.family is Family.LASER_DRESSED_COULOMB:
            out = -p["v"] / np.sqrt(ra * ra + p["lambda"] ** 2)
        else:
            tr = np.asarray(pot.table_r)
            tv = np.asarray(pot.table_v)
            out = np.interp(ra, tr, tv)
            v0 = pot._table_origin_v0()
            if v0 > 0:
                out = np.where(ra < tr[0], -v0 / ra, out)
    return out if np.ndim(out) else float(out)


def derivative(pot: PotentialModel, r):
    """dV/dr; piecewise-constant slope for tabulated potentials."""
    ra = np.asarray(r, dtype=float)
    p = pot.params
    with np.errstate(divide="ignore", invalid="ignore"):
        if pot.family is Family.COULOMB:
            out = p["v"] / ra**2
        elif pot.family is Family.HELLMANN:
            A, B, C = p["A"], p["B"], p["C"]
            out = (A - B * np.exp(-C * ra) * (1.0 + C * ra)) / ra**2
        elif pot.family is Family.LASER_DRESSED_COULOMB:
            out = p["v"] * ra / (ra * ra + p["lambda"] ** 2) ** 1.5
        else:
            tr = np.asarray(pot.table_r)
            tv = np.asarray(pot.table_v)
            slopes = np.diff(tv) / np.diff(tr)
            idx = np.clip(np.searchsorted(tr, ra, side="right") - 1, 0, len(slopes) - 1)
            out = np.where((ra >= tr[0]) & (ra <= tr[-1]), slopes[idx], 0.0)
            v0 = pot._table_origin_v0()
            if v0 > 0:
                out = np.where(ra < tr[0], v0 / ra**2, out)
    return out if np.ndim(out) else float(out)


def coulomb_coefficient(pot: PotentialModel) -> float:
    """v0 = -lim_{r->0+} r V(r); zero for potentials finite at the origin."""
    p = pot.params
    if pot.family is Family.COULOMB:
        return p["v"]
    if pot.family is Family.HELLMANN:
        return p["A"] - p["B"]
    if pot.family is Family.LASER_DRESSED_COULOMB:
        return 0.0
    return pot._table_origin_v0()


def default_validation_grid(m: float = 1.0, n: int = 512) -> np.ndarray:
    return np.geomspace(1e-4 / m, 1e3 / m, n)


@dataclass(frozen=True)
class ValidationReport:
    negative: bool
    monotone: bool
    vanishing: bool
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.negative and self.monotone and self.vanishing

    def failures(self) -> list[str]:
        return [name for name in ("negative", "monotone", "vanishing") if not getattr(self, name)]


def validate(pot: PotentialModel, grid=None, m: float = 1.0, tail_tol: float = 1e-8) -> ValidationReport:
    """Check negativity, monotonicity and a vanishing tail on a radius grid.

    The tail clause passes when ``|V(r_far)| < tail_tol*m`` or when ``|V|``
    at least halves over the outermost decade of the grid, which admits
    Coulomb-like tails while rejecting a constant offset.
    """
    r = default_validation_grid(m) if grid is None else np.asarray(grid, dtype=float)
    if r.ndim != 1 or r.size < 100:
        raise DomainError("validation grid needs at least 100 points")
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise DomainError("validation grid must be positive and strictly ascending")
    v = np.asarray(evaluate(pot, r))
    details: dict[str, str] = {}

    negative = bool(np.all(v < 0))
    if not negative:
        bad = r[v >= 0]
        details["negative"] = f"V >= 0 at {bad.size} grid points, first at r={bad[0]:.6g}"

    slack = 1e-12 * np.maximum(np.abs(v[:-1]), np.abs(v[1:]))
    drops = np.diff(v) < -slack
    monotone = not bool(np.any(drops))
    if not monotone:
        i = int(np.argmax(drops))
        details["monotone"] = f"V decreases between r={r[i]:.6g} and r={r[i + 1]:.6g}"

    r_far = r[-1]
    v_far = abs(v[-1])
    v_decade = abs(float(evaluate(pot, r_far / 10.0)))
    vanishing = v_far < tail_tol * m or v_far <= 0.5 * v_decade
    if not vanishing:
        details["vanishing"] = f"|V({r_far:.6g})| = {v_far:.3g} does not decay toward zero"
    return ValidationReport(negative, monotone, vanishing, details)
