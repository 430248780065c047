"""Two-sided shooting for bound states in (-m, m).

The outward solution starts from the regular origin behaviour, the inward one
from the decaying tail; they meet at the W2 turning radius.  The mismatch

    D(E) = psi1_L psi2_R - psi1_R psi2_L        (both sides unit-normalised)

is a scaled Wronskian, so its sign does not depend on where the sides meet
and its zeros are exactly the eigenvalues.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson

from . import nodal
from .errors import DomainError, LabelingError, StateNotFoundError, SupercriticalError
from .radial_ode import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    Parity,
    ProblemSpec,
    Segment,
    Trajectory,
    integrate_segment,
    k_index,
    origin_conditions,
    outer_radius,
    tail_conditions,
    turning_radius,
)

log = logging.getLogger(__name__)

__all__ = [
    "MatchRule",
    "ShootingConfig",
    "RadialSolution",
    "Bracket",
    "mismatch",
    "matching_determinant",
    "spectrum_scan",
    "refine_energy",
    "solve_state",
    "solve_at",
    "solve_spectrum",
    "coulomb_oracle",
]


class MatchRule(str, enum.Enum):
    TURNING_POINT = "turning_point"
    FIXED_FRACTION = "fixed_fraction"


@dataclass(frozen=True)
class ShootingConfig:
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    energy_tol: float | None = None  # default 2e-12 * m
    scan_points: int = 2000
    match_rule: MatchRule = MatchRule.TURNING_POINT
    max_states: int = 50
    samples_per_step: int = 4
    origin_offset: float = 1e-6  # in units of 1/m
    tail_decay: float = 35.0  # beta * (r_max - r_c)
    r_max_cap: float = 1e9  # in units of 1/m
    refine_depth: int = 10
    edge_delta: float = 1e-6  # scan window (-m + delta*m, m - delta*m)

    def __post_init__(self) -> None:
        object.__setattr__(self, "match_rule", MatchRule(self.match_rule))
        for name in ("rtol", "atol", "origin_offset", "tail_decay", "r_max_cap", "edge_delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.energy_tol is not None and not self.energy_tol > 0:
            raise ValueError("energy_tol must be positive")
        if self.scan_points < 2:
            raise ValueError("scan_points must be >= 2")
        if self.samples_per_step < 1 or self.max_states < 1:
            raise ValueError("samples_per_step and max_states must be >= 1")

    def e_tol(self, m: float) -> float:
        return self.energy_tol if self.energy_tol is not None else 2e-12 * m


@dataclass
class _Shot:
    energy: float
    D: float
    count: int  # psi1 sign changes on the outward side
    r_c: float | None
    r_match: float
    r_max: float
    left: Segment
    right: Segment | None


def matching_determinant(left, right) -> float:
    """psi1_L psi2_R - psi1_R psi2_L for the two states scaled to unit length."""
    a = np.asarray(left, dtype=float)
    b = np.asarray(right, dtype=float)
    a = a / np.hypot(*a)
    b = b / np.hypot(*b)
    return float(a[0] * b[1] - b[0] * a[1])


def _match_radius(prob: ProblemSpec, cfg: ShootingConfig, r0: float, r_c, r_max: float) -> float:
    if cfg.match_rule is MatchRule.TURNING_POINT and r_c is not None and 10 * r0 < r_c < r_max:
        return r_c
    if prob.dimension == 1:
        return 0.5 * r_max
    return math.sqrt(r0 * r_max)


def _shoot(prob: ProblemSpec, E: float, cfg: ShootingConfig, both: bool = True) -> _Shot:
    m = prob.mass
    r_c = turning_radius(prob, E)
    r_max = outer_radius(prob, E, r_c, cfg.tail_decay, cfg.r_max_cap)
    r0 = 0.0 if prob.dimension == 1 else cfg.origin_offset / m
    r_match = _match_radius(prob, cfg, r0, r_c, r_max)
    start, _ = origin_conditions(prob, E, r0 if r0 > 0 else None)
    left = integrate_segment(prob, E, r0, r_match, start, cfg.rtol, cfg.atol)
    count = nodal.count_nodes(left.y[:, 0], left.r)
    if not both:
        return _Shot(E, math.nan, count, r_c, r_match, r_max, left, None)
    right = integrate_segment(prob, E, r_max, r_match, tail_conditions(prob, E, r_max), cfg.rtol, cfg.atol)
    D = matching_determinant(left.end, right.end)
    return _Shot(E, D, count, r_c, r_match, r_max, left, right)


def mismatch(prob: ProblemSpec, E: float, cfg: ShootingConfig | None = None) -> float:
    """Matching determinant D(E); zero exactly at eigenvalues."""
    return _shoot(prob, E, cfg or ShootingConfig()).D


@dataclass(frozen=True)
class Bracket:
    e_lo: float
    e_hi: float
    d_lo: float
    d_hi: float
    n1: int  # full-line count for d = 1
    outward_count: int


@dataclass
class RadialSolution:
    """A normalised bound state and its diagnostics."""

    problem: ProblemSpec
    energy: float
    trajectory: Trajectory
    n1: int
    n2: int
    k_d: float | None
    beta: float
    r_c: float | None
    r_match: float
    r_max: float
    match_residual: float
    norm_factor: float
    segments: tuple[Segment, Segment] = field(repr=False, default=None)
    samples_per_step: int = 1

    @property
    def radii(self) -> np.ndarray:
        return self.trajectory.radii

    @property
    def psi1(self) -> np.ndarray:
        return self.trajectory.psi1

    @property
    def psi2(self) -> np.ndarray:
        return self.trajectory.psi2

    def norm(self) -> float:
        """Integral of psi1^2 + psi2^2 over the whole domain (full line for d=1)."""
        return _norm(self.problem, self.radii, self.psi1, self.psi2)

    def resample(self, samples_per_step: int) -> "RadialSolution":
        """Same state on a denser or coarser output grid; no re-integration."""
        r, p1, p2 = _splice_dense(self.problem, self.energy, self.segments, samples_per_step)
        s = self.norm_factor
        return replace(self, trajectory=Trajectory(r, p1 * s, p2 * s), samples_per_step=samples_per_step)

    def with_components(self, psi1=None, psi2=None) -> "RadialSolution":
        tr = Trajectory(self.radii, self.psi1 if psi1 is None else np.asarray(psi1),
                        self.psi2 if psi2 is None else np.asarray(psi2))
        return replace(self, trajectory=tr)

    def summary(self) -> dict:
        return {
            "E": self.energy,
            "n1": self.n1,
            "n2": self.n2,
            "k_d": self.k_d,
            "beta": self.beta,
            "r_c": self.r_c,
            "r_match": self.r_match,
            "r_max": self.r_max,
            "match_residual": self.match_residual,
            "norm": self.norm(),
            "problem": self.problem.to_dict(),
        }


def _norm(prob: ProblemSpec, r, p1, p2) -> float:
    half = float(simpson(p1 * p1 + p2 * p2, x=r))
    return 2.0 * half if prob.dimension == 1 else half


def _splice_dense(prob, E, segments, samples_per_step):
    left, right = segments
    rl, a1, a2 = left.dense(prob, E, samples_per_step)
    rr, b1, b2 = right.dense(prob, E, samples_per_step)
    return (np.concatenate([rl, rr[1:]]), np.concatenate([a1, b1[1:]]), np.concatenate([a2, b2[1:]]))


def _component_counts(prob: ProblemSpec, r, p1, p2) -> tuple[int, int]:
    if prob.dimension == 1:
        par1, par2 = nodal.component_parities(prob.parity)
        return (nodal.count_nodes(p1, r, "full_line", par1), nodal.count_nodes(p2, r, "full_line", par2))
    return nodal.count_nodes(p1, r), nodal.count_nodes(p2, r)


def solve_at(prob: ProblemSpec, E: float, cfg: ShootingConfig | None = None) -> RadialSolution:
    """Assemble and normalise the spliced solution at a converged energy."""
    cfg = cfg or ShootingConfig()
    shot = _shoot(prob, E, cfg)
    left, right = shot.left, shot.right
    L, R = left.end, right.end
    c = float(L @ R / (R @ R))
    right = right.scaled(c)
    resid = float(np.hypot(*(L - right.end)) / np.hypot(*L))
    r, p1, p2 = _splice_dense(prob, E, (left, right), cfg.samples_per_step)
    s = 1.0 / math.sqrt(_norm(prob, r, p1, p2))
    p1, p2 = p1 * s, p2 * s
    n1, n2 = _component_counts(prob, r, p1, p2)
    return RadialSolution(
        problem=prob,
        energy=float(E),
        trajectory=Trajectory(r, p1, p2),
        n1=n1,
        n2=n2,
        k_d=prob.k_d,
        beta=math.sqrt(prob.mass**2 - E * E),
        r_c=shot.r_c,
        r_match=shot.r_match,
        r_max=shot.r_max,
        match_residual=resid,
        norm_factor=s,
        segments=(left, right),
        samples_per_step=cfg.samples_per_step,
    )


class _Evaluator:
    """Memoised shots for one problem; outward-only shots are cheaper."""

    def __init__(self, prob: ProblemSpec, cfg: ShootingConfig):
        self.prob = prob
        self.cfg = cfg
        self._full: dict[float, _Shot] = {}
        self._count: dict[float, int] = {}

    def shot(self, E: float) -> _Shot:
        s = self._full.get(E)
        if s is None:
            s = self._full[E] = _shoot(self.prob, E, self.cfg)
            self._count[E] = s.count
        return s

    def D(self, E: float) -> float:
        return self.shot(E).D

    def count(self, E: float) -> int:
        c = self._count.get(E)
        if c is None:
            c = self._count[E] = _shoot(self.prob, E, self.cfg, both=False).count
        return c


def refine_energy(prob: ProblemSpec, e_lo: float, e_hi: float, cfg: ShootingConfig | None = None,
                  _ev: _Evaluator | None = None) -> float:
    """Bisection on D over a sign-change bracket, finished by one secant step."""
    cfg = cfg or ShootingConfig()
    ev = _ev or _Evaluator(prob, cfg)
    lo, hi = e_lo, e_hi
    d_lo, d_hi = ev.D(lo), ev.D(hi)
    if d_lo == 0.0:
        return lo
    if d_hi == 0.0:
        return hi
    if np.sign(d_lo) == np.sign(d_hi):
        raise DomainError(f"D does not change sign on [{e_lo}, {e_hi}]")
    tol = cfg.e_tol(prob.mass)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        d_mid = ev.D(mid)
        if d_mid == 0.0:
            return mid
        if np.sign(d_mid) == np.sign(d_lo):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    e = lo - d_lo * (hi - lo) / (d_hi - d_lo)
    return float(min(max(e, lo), hi))


def _window(prob: ProblemSpec, cfg: ShootingConfig) -> tuple[float, float]:
    m = prob.mass
    return -m + cfg.edge_delta * m, m - cfg.edge_delta * m


def _to_label(prob: ProblemSpec, count: int) -> int:
    if prob.dimension == 1:
        return 2 * count if prob.parity is Parity.U1_EVEN else 2 * count + 1
    return count


def _label_bracket(ev: _Evaluator, lo: float, hi: float) -> Bracket:
    d_lo, d_hi = ev.D(lo), ev.D(hi)
    n_lo, n_hi = ev.count(lo), ev.count(hi)
    for _ in range(60):
        if n_lo == n_hi:
            break
        mid = 0.5 * (lo + hi)
        d_mid = ev.D(mid)
        if np.sign(d_mid) == np.sign(d_lo):
            lo, d_lo, n_lo = mid, d_mid, ev.count(mid)
        else:
            hi, d_hi, n_hi = mid, d_mid, ev.count(mid)
    return Bracket(lo, hi, d_lo, d_hi, _to_label(ev.prob, n_lo), n_lo)


def spectrum_scan(prob: ProblemSpec, cfg: ShootingConfig | None = None,
                  _ev: _Evaluator | None = None) -> list[Bracket]:
    """Sign changes of D on a uniform energy grid, refined where labels jump.

    Intervals that may hold more than one state (the outward node count jumps
    by two or more, or by one without a sign change of D) are rescanned at
    four times the resolution, recursively up to ``cfg.refine_depth`` levels.
    At most ``cfg.max_states`` brackets are returned, lowest energies first.
    """
    cfg = cfg or ShootingConfig()
    ev = _ev or _Evaluator(prob, cfg)
    lo, hi = _window(prob, cfg)
    grid = np.linspace(lo, hi, cfg.scan_points)
    brackets: list[Bracket] = []

    def visit(a: float, b: float, depth: int) -> None:
        if len(brackets) >= cfg.max_states:
            return
        na, nb = ev.count(a), ev.count(b)
        if nb < na:
            raise LabelingError(
                f"outward node count decreases from {na} at E={a!r} to {nb} at E={b!r}; "
                "integration is unreliable here"
            )
        # an interval holds nb - na or nb - na + 1 states; a jump of one with
        # no sign change of D means zero or two, so it is refined as well
        same_sign = np.sign(ev.D(a)) == np.sign(ev.D(b))
        crowded = nb - na >= 2 or (nb - na == 1 and same_sign)
        if crowded and depth < cfg.refine_depth:
            sub = np.linspace(a, b, 5)
            for x, y in zip(sub[:-1], sub[1:]):
                visit(float(x), float(y), depth + 1)
            return
        if not same_sign:
            brackets.append(_label_bracket(ev, a, b))
        elif nb - na >= 2:
            log.warning("unresolved states between E=%r and E=%r (refinement depth reached)", a, b)

    for a, b in zip(grid[:-1], grid[1:]):
        visit(float(a), float(b), 0)
        if len(brackets) >= cfg.max_states:
            break

    labels = [br.n1 for br in brackets]
    if any(y <= x for x, y in zip(labels, labels[1:])):
        raise LabelingError(f"state labels are not strictly increasing: {labels}")
    step = 2 if prob.dimension == 1 else 1
    gaps = [(x, y) for x, y in zip(labels, labels[1:]) if y - x > step]
    if gaps:
        log.warning("labels skip between %s; states may be missing", gaps)
    return brackets


def _target_count(prob: ProblemSpec, n1: int) -> int:
    if prob.dimension > 1:
        return n1
    want_even = prob.parity is Parity.U1_EVEN
    if (n1 % 2 == 0) != want_even:
        raise StateNotFoundError(
            f"n1={n1} is impossible in sector {prob.parity.value} "
            f"(an {'even' if want_even else 'odd'} u1 has an {'even' if want_even else 'odd'} node count)"
        )
    return n1 // 2


def _plateau(ev: _Evaluator, t: int, lo: float, hi: float, tol: float):
    """Energies near both ends of the interval where the outward count equals t."""

    def first_at_least(target: int, x: float, y: float) -> float:
        # invariant: count(x) < target <= count(y)
        while y - x > tol:
            mid = 0.5 * (x + y)
            if ev.count(mid) >= target:
                y = mid
            else:
                x = mid
        return y

    def last_at_most(target: int, x: float, y: float) -> float:
        # invariant: count(x) <= target < count(y)
        while y - x > tol:
            mid = 0.5 * (x + y)
            if ev.count(mid) <= target:
                x = mid
            else:
                y = mid
        return x

    a = lo if ev.count(lo) >= t else first_at_least(t, lo, hi)
    b = hi if ev.count(hi) <= t else last_at_most(t, a, hi)
    return a, b


def solve_state(prob: ProblemSpec, target_n1: int, cfg: ShootingConfig | None = None) -> RadialSolution:
    """Bound state whose upper component has ``target_n1`` nodes.

    The energy interval on which the outward node count equals the target is
    located by bisection on the (monotone) count; the eigenvalue inside it is
    then refined by bisection on D.  If that fails, the full spectrum scan is
    used to select the bracket.
    """
    if target_n1 < 0:
        raise DomainError("target_n1 must be nonnegative")
    cfg = cfg or ShootingConfig()
    ev = _Evaluator(prob, cfg)
    t = _target_count(prob, target_n1)
    lo, hi = _window(prob, cfg)
    c_lo, c_hi = ev.count(lo), ev.count(hi)
    if not c_lo <= t <= c_hi:
        raise StateNotFoundError(
            f"no state with n1={target_n1} for {prob.label()} "
            f"(outward counts span {_to_label(prob, c_lo)}..{_to_label(prob, c_hi)})"
        )
    a, b = _plateau(ev, t, lo, hi, 1e-13 * prob.mass)
    sol = None
    if ev.count(a) == t and ev.count(b) == t and a < b and np.sign(ev.D(a)) != np.sign(ev.D(b)):
        sol = solve_at(prob, refine_energy(prob, a, b, cfg, ev), cfg)
        if sol.n1 != target_n1:
            log.info("count-bracketed state has n1=%d, expected %d; falling back to scan", sol.n1, target_n1)
            sol = None
    if sol is None:
        sol = _solve_from_scan(prob, target_n1, cfg, ev)
    return sol


def _solve_from_scan(prob, target_n1, cfg, ev) -> RadialSolution:
    brackets = spectrum_scan(prob, replace(cfg, max_states=max(cfg.max_states, target_n1 + 2)), ev)
    for br in brackets:
        if br.n1 == target_n1:
            sol = solve_at(prob, refine_energy(prob, br.e_lo, br.e_hi, cfg, ev), cfg)
            if sol.n1 == target_n1:
                return sol
            raise LabelingError(f"bracket labelled n1={br.n1} converged to a state with n1={sol.n1}")
    raise StateNotFoundError(
        f"no state with n1={target_n1} for {prob.label()}", available=[br.n1 for br in brackets]
    )


def solve_spectrum(prob: ProblemSpec, cfg: ShootingConfig | None = None) -> list[RadialSolution]:
    """All states found by the scan, up to ``cfg.max_states``, ascending in E."""
    cfg = cfg or ShootingConfig()
    ev = _Evaluator(prob, cfg)
    out = []
    for br in spectrum_scan(prob, cfg, ev):
        out.append(solve_at(prob, refine_energy(prob, br.e_lo, br.e_hi, cfg, ev), cfg))
    return out


def coulomb_oracle(d: int, j: float, tau: int, v: float, n_r: int, m: float = 1.0) -> float:
    """Closed-form Dirac-Coulomb energy for V = -v/r in d > 1 dimensions.

    E = m / sqrt(1 + v^2 / (n_r + gamma)^2), gamma = sqrt(k_d^2 - v^2).
    The n_r = 0 level exists only for k_d < 0.
    """
    k = k_index(d, j, tau)
    if v >= abs(k):
        raise SupercriticalError(f"v={v} >= |k_d|={abs(k)}")
    if n_r < 0 or (n_r == 0 and k > 0):
        raise DomainError(f"no Coulomb level with n_r={n_r} for k_d={k}")
    g = math.sqrt(k * k - v * v)
    return m / math.sqrt(1.0 + v * v / (n_r + g) ** 2)
