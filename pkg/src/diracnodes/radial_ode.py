"""Coupled first-order radial systems and their boundary data.

Two systems are supported and kept apart on purpose:

* ``d == 1``:  u1' = -W1 u2,  u2' = W2 u1
* ``d > 1``:   psi1' = W1 psi2 - (k/r) psi1,  psi2' = (k/r) psi2 - W2 psi1

with W1 = E + m - V and W2 = E - m - V.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import bisect

from . import _kernels
from .errors import (
    DomainError,
    IntegrationError,
    SupercriticalError,
    UnsupportedPotentialError,
    ValidationError,
)
from .potentials import PotentialModel, coulomb_coefficient, derivative, evaluate

__all__ = [
    "Parity",
    "ProblemSpec",
    "Segment",
    "Trajectory",
    "k_index",
    "beta",
    "w1",
    "w2",
    "origin_conditions",
    "tail_conditions",
    "integrate",
    "turning_radius",
    "outer_radius",
    "rhs",
    "integrate_segment",
    "residual_ratio",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14
ROTATION_CAP = math.pi / 8
MAX_STEPS = 2_000_000


class Parity(str, enum.Enum):
    U1_EVEN = "u1_even"
    U1_ODD = "u1_odd"


def _half_odd(j: float) -> bool:
    twice = 2.0 * j
    return twice > 0 and abs(twice - round(twice)) < 1e-12 and int(round(twice)) % 2 == 1


def k_index(d: int, j: float, tau: int) -> float:
    """Angular index k_d = tau * (j + (d - 2)/2)."""
    if d <= 1:
        raise DomainError("k_d is defined only for d > 1")
    if not _half_odd(j):
        raise DomainError(f"j must be a positive half-odd-integer, got {j}")
    if tau not in (-1, 1):
        raise DomainError(f"tau must be +1 or -1, got {tau}")
    return float(tau * (Fraction(int(round(2 * j)), 2) + Fraction(d - 2, 2)))


@dataclass(frozen=True)
class ProblemSpec:
    """Everything that fixes the radial system: d, m, V and the quantum numbers.

    ``j``/``tau`` are used for d > 1, ``parity`` for d = 1.
    """

    dimension: int
    mass: float
    potential: PotentialModel
    j: float | None = None
    tau: int | None = None
    parity: Parity | None = None

    def __post_init__(self) -> None:
        d = self.dimension
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ValidationError(f"dimension must be an integer >= 1, got {d!r}", field="dimension")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValidationError("mass must be positive", field="mass")
        if d == 1:
            if self.parity is None:
                raise ValidationError("d=1 requires a parity sector (u1_even or u1_odd)", field="parity")
            object.__setattr__(self, "parity", Parity(self.parity))
            if self.potential.singular:
                raise UnsupportedPotentialError(
                    "d=1 requires a potential finite at the origin", field="potential"
                )
            return
        if self.j is None:
            raise ValidationError(f"d={d} requires the angular momentum j", field="j")
        if self.tau is None:
            raise ValidationError(f"d={d} requires tau = +1 or -1", field="tau")
        if not _half_odd(float(self.j)):
            raise ValidationError(f"j must be a positive half-odd-integer, got {self.j}", field="j")
        if self.tau not in (-1, 1):
            raise ValidationError(f"tau must be +1 or -1, got {self.tau}", field="tau")
        object.__setattr__(self, "j", float(self.j))
        object.__setattr__(self, "tau", int(self.tau))
        k = self.k_d
        v0 = coulomb_coefficient(self.potential)
        if v0 * v0 >= k * k:
            raise SupercriticalError(
                f"origin singularity too strong: |v0|={abs(v0):.6g} >= |k_d|={abs(k):.6g}",
                field="potential",
            )

    @property
    def k_d(self) -> float | None:
        if self.dimension == 1:
            return None
        return k_index(self.dimension, self.j, self.tau)

    @property
    def system(self) -> int:
        return _kernels.SYSTEM_LINE if self.dimension == 1 else _kernels.SYSTEM_RADIAL

    def label(self) -> str:
        if self.dimension == 1:
            return f"d=1 {self.parity.value}"
        return f"d={self.dimension} j={Fraction(self.j).limit_denominator()} tau={self.tau:+d}"

    def to_dict(self) -> dict:
        out = {"dimension": self.dimension, "mass": self.mass, "potential": self.potential.to_dict()}
        if self.dimension == 1:
            out["parity"] = self.parity.value
        else:
            out["j"] = self.j
            out["tau"] = self.tau
        return out


def _check_energy(prob: ProblemSpec, E: float) -> None:
    m = prob.mass
    if not (-m < E < m):
        raise DomainError(f"E={E} is not a bound-state energy (need -m < E < m)")


def beta(prob: ProblemSpec, E: float) -> float:
    _check_energy(prob, E)
    return math.sqrt(prob.mass**2 - E * E)


def w1(prob: ProblemSpec, E: float, r):
    return E + prob.mass - evaluate(prob.potential, r)


def w2(prob: ProblemSpec, E: float, r):
    return E - prob.mass - evaluate(prob.potential, r)


def rhs(prob: ProblemSpec, E: float, r, psi1, psi2):
    """Vectorised right-hand side of the governing system."""
    a = w1(prob, E, r)
    b = w2(prob, E, r)
    if prob.dimension == 1:
        return -a * psi2, b * psi1
    kr = prob.k_d / np.asarray(r, dtype=float)
    return a * psi2 - kr * psi1, kr * psi2 - b * psi1


def _second_derivative(prob: ProblemSpec, E: float, r, y, dy):
    vp = derivative(prob.potential, r)
    a = w1(prob, E, r)
    b = w2(prob, E, r)
    if prob.dimension == 1:
        return vp * y[:, 1] - a * dy[:, 1], -vp * y[:, 0] + b * dy[:, 0]
    k = prob.k_d
    d1 = (k / r**2) * y[:, 0] - vp * y[:, 1] - (k / r) * dy[:, 0] + a * dy[:, 1]
    d2 = vp * y[:, 0] - (k / r**2) * y[:, 1] - b * dy[:, 0] + (k / r) * dy[:, 1]
    return d1, d2


def origin_conditions(prob: ProblemSpec, E: float, eps: float | None = None):
    """Regular solution at the start radius.

    Returns ``(state, gamma)`` with ``state = np.array([psi1, psi2])``.  For
    d = 1 the state is taken at x = 0 and gamma is 0.
    """
    _check_energy(prob, E)
    if prob.dimension == 1:
        if prob.parity is Parity.U1_EVEN:
            return np.array([1.0, 0.0]), 0.0
        return np.array([0.0, 1.0]), 0.0

    m = prob.mass
    eps = 1e-6 / m if eps is None else eps
    if not eps > 0:
        raise DomainError("start radius must be positive for d > 1")
    k = prob.k_d
    v0 = coulomb_coefficient(prob.potential)
    if k * k <= v0 * v0:
        raise SupercriticalError(f"k_d^2={k * k} <= v0^2={v0 * v0}", field="potential")
    if v0 != 0.0:
        g = math.sqrt(k * k - v0 * v0)
        if k > 0:
            a, b = 1.0, (g + k) / v0
        else:
            a, b = -(g - k) / v0, 1.0
        return eps**g * np.array([a, b]), g
    V = float(evaluate(prob.potential, eps))
    ak = abs(k)
    if k > 0:
        return np.array([(E + m - V) * eps ** (k + 1) / (2 * k + 1), eps**k]), k
    return np.array([eps**ak, -(E - m - V) * eps ** (ak + 1) / (2 * ak + 1)]), ak


def tail_conditions(prob: ProblemSpec, E: float, r_max: float | None = None) -> np.ndarray:
    """Unit vector along the decaying solution at large radius."""
    b = beta(prob, E)
    ratio = b / (E + prob.mass)
    vec = np.array([1.0, ratio if prob.dimension == 1 else -ratio])
    return vec / np.hypot(*vec)


def turning_radius(prob: ProblemSpec, E: float) -> float | None:
    """Root of W2(r) = E - m - V(r), or None when W2 < 0 everywhere."""
    _check_energy(prob, E)
    m = prob.mass
    pot = prob.potential

    def f(r):
        return E - m - float(evaluate(pot, r))

    lo = 1e-14 / m if pot.singular else 0.0
    if f(lo) <= 0:
        return None
    hi = 1.0 / m
    while f(hi) >= 0:
        lo = hi
        hi *= 2.0
        if hi > 1e15 / m:
            return None
    return float(bisect(f, lo, hi, xtol=1e-300, rtol=1e-12, maxiter=400))


def outer_radius(prob: ProblemSpec, E: float, r_c: float | None, decay: float = 35.0,
                 cap: float = 1e9) -> float:
    """Right end of the integration domain: r_c + decay/beta, capped at cap/m."""
    b = beta(prob, E)
    return min((r_c or 0.0) + decay / b, cap / prob.mass)


@dataclass(frozen=True)
class Segment:
    """Accepted integrator steps of one integration, ascending in r.

    ``y`` is expressed in a common scale; the physical solution for the
    supplied initial state is ``y * exp(log_scale)``.
    """

    r: np.ndarray
    y: np.ndarray
    log_scale: float
    outward: bool
    steps: int = field(default=0)

    @property
    def start(self) -> np.ndarray:
        return self.y[0] if self.outward else self.y[-1]

    @property
    def end(self) -> np.ndarray:
        return self.y[-1] if self.outward else self.y[0]

    def scaled(self, factor: float) -> "Segment":
        return Segment(self.r, self.y * factor, self.log_scale, self.outward, self.steps)

    def dense(self, prob: ProblemSpec, E: float, samples_per_step: int = 1):
        """Resample with quintic Hermite interpolation inside each step.

        Nodal data (value, first and second derivative) come from the ODE
        itself, so the interpolant is O(h^6) accurate.
        """
        r, y = self.r, self.y
        if samples_per_step <= 1 or r.size < 2:
            return r.copy(), y[:, 0].copy(), y[:, 1].copy()
        s = int(samples_per_step)
        dy = np.column_stack(rhs(prob, E, r, y[:, 0], y[:, 1]))
        ddy = np.column_stack(_second_derivative(prob, E, r, y, dy))
        h = np.diff(r)[:, None]
        t = (np.arange(s) / s)[None, :]
        t2, t3 = t * t, t**3
        t4, t5 = t3 * t, t3 * t2
        H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
        H1 = t - 6 * t3 + 8 * t4 - 3 * t5
        H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
        H3 = 10 * t3 - 15 * t4 + 6 * t5
        H4 = -4 * t3 + 7 * t4 - 3 * t5
        H5 = 0.5 * (t3 - 2 * t4 + t5)
        radii = (r[:-1, None] + h * t).ravel()
        comps = []
        for c in range(2):
            y0, y1_ = y[:-1, c:c + 1], y[1:, c:c + 1]
            d0, d1 = dy[:-1, c:c + 1], dy[1:, c:c + 1]
            e0, e1 = ddy[:-1, c:c + 1], ddy[1:, c:c + 1]
            vals = (y0 * H0 + h * d0 * H1 + h * h * e0 * H2
                    + y1_ * H3 + h * d1 * H4 + h * h * e1 * H5)
            comps.append(np.append(vals.ravel(), y[-1, c]))
        return np.append(radii, r[-1]), comps[0], comps[1]


@dataclass(frozen=True)
class Trajectory:
    radii: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self) -> None:
        if not (self.radii.shape == self.psi1.shape == self.psi2.shape):
            raise ValueError("trajectory arrays must have equal length")
        if self.radii.size > 1 and np.any(np.diff(self.radii) <= 0):
            raise ValueError("trajectory radii must be strictly increasing")

    def __len__(self) -> int:
        return self.radii.size


def integrate_segment(prob: ProblemSpec, E: float, r_from: float, r_to: float, init,
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                      rot_cap: float = ROTATION_CAP) -> Segment:
    """Run the compiled integrator and return the raw accepted steps."""
    if r_from == r_to:
        raise DomainError("integration interval is empty")
    init = np.asarray(init, dtype=float)
    if init.shape != (2,) or not np.all(np.isfinite(init)) or not np.any(init):
        raise DomainError("initial state must be a finite, nonzero pair")
    if prob.dimension > 1 and min(r_from, r_to) <= 0:
        raise DomainError("d > 1 integration must stay at r > 0")
    code, p, tr, tv = prob.potential.packed()
    k = prob.k_d or 0.0
    rs, ys, ls, status, fail_r = _kernels.integrate(
        prob.system, k, float(E), float(prob.mass), code, p, tr, tv,
        float(r_from), float(r_to), float(init[0]), float(init[1]),
        float(rtol), float(atol), float(rot_cap), MAX_STEPS,
    )
    if status != _kernels.STATUS_OK:
        reason = {
            _kernels.STATUS_UNDERFLOW: "step size underflow",
            _kernels.STATUS_MAX_STEPS: "step budget exhausted",
        }.get(status, "non-finite solution")
        raise IntegrationError(reason, radius=float(fail_r), energy=float(E))
    L = ls[-1]
    y = ys * np.exp(ls - L)[:, None]
    outward = r_to > r_from
    if not outward:
        rs, y = rs[::-1], y[::-1]
    return Segment(rs, y, float(L), outward, rs.size - 1)


def integrate(prob: ProblemSpec, E: float, r_from: float, r_to: float, init,
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              samples_per_step: int = 1) -> Trajectory:
    """Adaptive Dormand-Prince integration sampled on the step grid.

    The returned trajectory is ascending in r and scaled so that its
    ``r_from`` end equals ``init``; for long integrations that overflow the
    original scale the values are relative to the final renormalisation.
    """
    seg = integrate_segment(prob, E, r_from, r_to, init, rtol, atol)
    radii, p1, p2 = seg.dense(prob, E, samples_per_step)
    fac = math.exp(seg.log_scale) if seg.log_scale < 700 else 1.0
    return Trajectory(radii, p1 * fac, p2 * fac)


def residual_ratio(prob: ProblemSpec, E: float, radii, psi1, psi2, rtol: float = DEFAULT_RTOL) -> float:
    """Finite-difference ODE residual of sampled data relative to its truncation bound.

    For consecutive samples the trapezoid residual
    |(psi_{i+1} - psi_i)/dr - (f_i + f_{i+1})/2| of an exact solution equals
    dr^2/12 |psi'''| to leading order; psi''' comes from differencing the
    exact psi'' given by the ODE.  The returned value is the worst ratio of
    the residual to twice that bound plus an rtol floor, so a value <= 1
    means the samples solve the system to within integrator accuracy.
    """
    r = np.asarray(radii, dtype=float)
    y = np.column_stack([psi1, psi2]).astype(float)
    dy = np.column_stack(rhs(prob, E, r, y[:, 0], y[:, 1]))
    ddy = np.column_stack(_second_derivative(prob, E, r, y, dy))
    h = np.diff(r)
    worst = 0.0
    for c in range(2):
        res = np.abs(np.diff(y[:, c]) / h - 0.5 * (dy[1:, c] + dy[:-1, c]))
        third = np.abs(np.diff(ddy[:, c]) / h)
        floor = rtol * np.max(np.abs(dy[:, c]))
        worst = max(worst, float(np.max(res / (2.0 * h * h / 12.0 * third + floor))))
    return worst
