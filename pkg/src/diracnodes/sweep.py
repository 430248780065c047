"""Parameter sweeps: solve a grid of states and check every nodal clause.

Sweep strings are comma-separated ``key=value`` items over the keys ``d``,
``j``, ``tau`` and ``n1``.  A value is a single number, an inclusive range
``a..b`` (unit steps, so ``j=1/2..5/2`` gives 1/2, 3/2, 5/2) or ``±a``::

    d=2..6,j=0.5..2.5,tau=±1,n1=0..4

Keys left out take their value from :data:`DEFAULT_SWEEP`.
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .errors import DiracError, NumericalError, StateNotFoundError, ValidationError
from .nodal import NodalReport, RiccatiConvergence, Verdict, riccati_convergence, verify_structure
from .potentials import PotentialModel
from .radial_ode import Parity, ProblemSpec
from .shooting import ShootingConfig, solve_state

__all__ = [
    "DEFAULT_SWEEP",
    "SweepSyntaxError",
    "SweepPoint",
    "SweepResult",
    "parse_sweep",
    "run_point",
    "run_sweep",
]

DEFAULT_SWEEP = "d=1..6,j=0.5..2.5,tau=±1,n1=0..4"

_KEYS = ("d", "j", "tau", "n1")
_NUMBER = r"[+-]?\d+(?:\.\d*)?(?:/\d+)?"
_VALUE = re.compile(rf"^(?:(?P<pm>±|\+-|\+/-)(?P<pmv>{_NUMBER})|(?P<lo>{_NUMBER})(?:\.\.(?P<hi>{_NUMBER}))?)$")


class SweepSyntaxError(ValidationError):
    def __init__(self, message: str):
        super().__init__(message, field="sweep")


def _number(text: str) -> Fraction:
    return Fraction(text.lstrip("+"))


def _values(key: str, text: str) -> list[Fraction]:
    m = _VALUE.match(text.strip())
    if not m:
        raise SweepSyntaxError(f"cannot parse {key}={text!r}; expected a, a..b or ±a")
    if m["pm"]:
        a = abs(_number(m["pmv"]))
        return [-a, a] if a else [a]
    lo = _number(m["lo"])
    hi = _number(m["hi"]) if m["hi"] else lo
    if hi < lo:
        raise SweepSyntaxError(f"empty range {key}={text!r}")
    n = int((hi - lo) // 1)
    return [lo + i for i in range(n + 1)]


def _check(key: str, vals: list[Fraction]) -> list:
    if key in ("d", "n1"):
        if any(v.denominator != 1 for v in vals):
            raise SweepSyntaxError(f"{key} takes integers")
        low = 1 if key == "d" else 0
        if min(vals) < low:
            raise SweepSyntaxError(f"{key} must be >= {low}")
        return [int(v) for v in vals]
    if key == "j":
        if any(v.denominator != 2 or v <= 0 for v in vals):
            raise SweepSyntaxError("j takes positive half-odd integers (1/2, 3/2, ...)")
        return [float(v) for v in vals]
    out = [int(v) for v in vals if v != 0]
    if any(v not in (-1, 1) for v in out) or not out or any(v.denominator != 1 for v in vals):
        raise SweepSyntaxError("tau takes the values -1 and +1")
    return sorted(set(out))


def _parse_items(text: str) -> dict[str, list]:
    out: dict[str, list] = {}
    for item in (s.strip() for s in text.split(",")):
        if not item:
            raise SweepSyntaxError(f"empty item in sweep {text!r}")
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _KEYS:
            raise SweepSyntaxError(f"bad sweep item {item!r}; keys are {', '.join(_KEYS)}")
        if key in out:
            raise SweepSyntaxError(f"{key} given twice")
        out[key] = _check(key, _values(key, value))
    return out


@dataclass(frozen=True)
class SweepPoint:
    dimension: int
    n1: int
    j: float | None = None
    tau: int | None = None

    @property
    def parity(self) -> Parity | None:
        if self.dimension > 1:
            return None
        return Parity.U1_EVEN if self.n1 % 2 == 0 else Parity.U1_ODD

    def label(self) -> str:
        if self.dimension == 1:
            return f"d=1 {self.parity.value} n1={self.n1}"
        return f"d={self.dimension} j={Fraction(self.j)} tau={self.tau:+d} n1={self.n1}"

    def problem(self, potential: PotentialModel, mass: float = 1.0) -> ProblemSpec:
        return ProblemSpec(self.dimension, mass, potential, j=self.j, tau=self.tau, parity=self.parity)


def parse_sweep(text: str | None) -> list[SweepPoint]:
    """Expand a sweep string into grid points; d = 1 ignores j and tau."""
    grid = _parse_items(DEFAULT_SWEEP)
    if text is not None and text.strip():
        grid.update(_parse_items(text))
    points: list[SweepPoint] = []
    for d in grid["d"]:
        if d == 1:
            points.extend(SweepPoint(1, n1) for n1 in grid["n1"])
            continue
        for j, tau, n1 in itertools.product(grid["j"], grid["tau"], grid["n1"]):
            points.append(SweepPoint(d, n1, j, tau))
    return points


@dataclass
class SweepResult:
    point: SweepPoint
    status: str  # solved | absent | unsupported | error
    energy: float | None = None
    n2: int | None = None
    report: NodalReport | None = None
    riccati: RiccatiConvergence | None = None
    message: str = ""

    @property
    def riccati_verdict(self) -> Verdict:
        if self.riccati is None:
            return Verdict.NOT_APPLICABLE
        return Verdict.PASS if self.riccati.passes() else Verdict.FAIL

    @property
    def failed(self) -> bool:
        """A solved state violating a hard clause."""
        if self.status != "solved":
            return False
        return not self.report.ok or self.riccati_verdict is Verdict.FAIL

    @property
    def theorem_failed(self) -> bool:
        return self.status == "solved" and not self.report.theorem_ok


def run_point(point: SweepPoint, potential: PotentialModel, mass: float = 1.0,
              cfg: ShootingConfig | None = None) -> SweepResult:
    try:
        prob = point.problem(potential, mass)
    except ValidationError as exc:
        return SweepResult(point, "unsupported", message=str(exc))
    try:
        sol = solve_state(prob, point.n1, cfg)
    except StateNotFoundError as exc:
        return SweepResult(point, "absent", message=str(exc))
    except NumericalError as exc:
        return SweepResult(point, "error", message=f"{type(exc).__name__}: {exc}")
    try:
        report = verify_structure(sol)
        ric = riccati_convergence(sol) if point.dimension > 1 else None
    except DiracError as exc:
        return SweepResult(point, "error", energy=sol.energy, message=f"{type(exc).__name__}: {exc}")
    return SweepResult(point, "solved", energy=sol.energy, n2=sol.n2, report=report, riccati=ric)


def run_sweep(points: list[SweepPoint], potential: PotentialModel, mass: float = 1.0,
              cfg: ShootingConfig | None = None, jobs: int = 1) -> list[SweepResult]:
    """Results in the order of ``points``; ``jobs > 1`` solves states concurrently."""
    if jobs <= 1:
        return [run_point(p, potential, mass, cfg) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda p: run_point(p, potential, mass, cfg), points))
