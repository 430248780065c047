"""Node counting, theorem checks and Dirac spinor orbits."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import AmbiguousNodeError
from .radial_ode import Parity, w1, w2

if TYPE_CHECKING:
    from .shooting import RadialSolution

__all__ = [
    "ZETA",
    "Verdict",
    "NodalReport",
    "OrbitTrace",
    "RotationVerdict",
    "significant",
    "node_radii",
    "count_nodes",
    "expected_n2",
    "verify_structure",
    "orbit_trace",
    "first_node_component",
    "riccati_residual",
    "riccati_convergence",
    "RiccatiConvergence",
]

ZETA = 1e-8

CLAUSES = ("theorem", "node_region", "alternation", "origin_signs", "infinity_signs", "orbit_rotation")


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not_applicable"


def significant(values: np.ndarray, zeta: float = ZETA) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    peak = np.max(np.abs(values)) if values.size else 0.0
    return np.abs(values) >= zeta * peak if peak > 0 else np.zeros(values.shape, bool)


def _crossings(values, radii, zeta: float = ZETA):
    """Index pairs (i, j) of consecutive significant samples with a sign change."""
    values = np.asarray(values, dtype=float)
    idx = np.flatnonzero(significant(values, zeta))
    if idx.size < 2:
        return idx[:0], idx[:0]
    gaps = np.diff(idx) - 1
    if np.any(gaps >= 2):
        g = int(np.argmax(gaps >= 2))
        raise AmbiguousNodeError(
            f"{gaps[g]} consecutive negligible samples between r={radii[idx[g]]:.6g} and "
            f"r={radii[idx[g + 1]]:.6g}; refine the output grid"
        )
    s = np.sign(values[idx])
    flips = np.flatnonzero(s[:-1] != s[1:])
    return idx[flips], idx[flips + 1]


def node_radii(values, radii, zeta: float = ZETA) -> np.ndarray:
    """Interior zero crossings, located by linear interpolation."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    i, j = _crossings(values, radii, zeta)
    a, b = values[i], values[j]
    return radii[i] + (radii[j] - radii[i]) * a / (a - b)


def count_nodes(values, radii, domain: str = "half_line", parity: str | None = None,
                zeta: float = ZETA) -> int:
    """Count strict sign changes, excluding the end points of the domain.

    ``domain="full_line"`` reconstructs a whole-line count for a component of
    definite ``parity`` sampled on x >= 0: an even component has twice the
    half-line count, an odd one gains the node at the origin.
    """
    n = len(_crossings(values, radii, zeta)[0])
    if domain == "half_line":
        return n
    if domain != "full_line":
        raise ValueError(f"unknown domain {domain!r}")
    if parity == "even":
        return 2 * n
    if parity == "odd":
        return 2 * n + 1
    raise ValueError("full_line counting needs parity 'even' or 'odd'")


def component_parities(parity: Parity) -> tuple[str, str]:
    return ("even", "odd") if Parity(parity) is Parity.U1_EVEN else ("odd", "even")


def expected_n2(n1: int, k_d: float | None) -> int:
    """n2 predicted by the nodal theorems: n1 + 1 unless k_d < 0."""
    if k_d is not None and k_d < 0:
        return n1
    return n1 + 1


@dataclass
class NodalReport:
    n1: int
    n2: int
    theorem_expected_n2: int
    clauses: dict[str, Verdict]
    details: dict[str, str] = field(default_factory=dict)
    nodes_psi1: list[float] = field(default_factory=list)
    nodes_psi2: list[float] = field(default_factory=list)
    informational: tuple[str, ...] = ()

    @property
    def theorem_ok(self) -> bool:
        return self.clauses["theorem"] is Verdict.PASS

    @property
    def ok(self) -> bool:
        """Every hard clause passes or is not applicable."""
        return all(v is not Verdict.FAIL for name, v in self.clauses.items()
                   if name not in self.informational)

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "theorem_expected_n2": self.theorem_expected_n2,
            "clauses": {k: v.value for k, v in self.clauses.items()},
            "informational": list(self.informational),
            "details": dict(self.details),
            "nodes_psi1": list(self.nodes_psi1),
            "nodes_psi2": list(self.nodes_psi2),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _local_spacing(radii: np.ndarray, r: float) -> float:
    i = int(np.clip(np.searchsorted(radii, r), 1, radii.size - 1))
    return float(radii[i] - radii[i - 1])


def _origin_w2(sol) -> float:
    return float(w2(sol.problem, sol.energy, sol.radii[0]))


def first_node_component(sol) -> int | None:
    """1 or 2 for the component owning the innermost node, None if nodeless."""
    a = node_radii(sol.psi1, sol.radii)
    b = node_radii(sol.psi2, sol.radii)
    if a.size == 0 and b.size == 0:
        return None
    if b.size == 0 or (a.size and a[0] < b[0]):
        return 1
    return 2


def verify_structure(sol: "RadialSolution") -> NodalReport:
    """Evaluate every theorem clause and structural property of a state."""
    prob = sol.problem
    r, p1, p2 = sol.radii, sol.psi1, sol.psi2
    d = prob.dimension
    k = prob.k_d
    clauses: dict[str, Verdict] = {}
    details: dict[str, str] = {}

    nodes1 = node_radii(p1, r)
    nodes2 = node_radii(p2, r)
    if d == 1:
        par1, par2 = component_parities(prob.parity)
        n1 = count_nodes(p1, r, "full_line", par1)
        n2 = count_nodes(p2, r, "full_line", par2)
    else:
        n1, n2 = nodes1.size, nodes2.size
    exp2 = expected_n2(n1, k)
    clauses["theorem"] = Verdict.PASS if n2 == exp2 else Verdict.FAIL
    details["theorem"] = f"n1={n1}, n2={n2}, expected n2={exp2}"

    # (b) nodes confined to (0, r_c]
    all_nodes = np.concatenate([nodes1, nodes2])
    if all_nodes.size == 0:
        clauses["node_region"] = Verdict.PASS
        details["node_region"] = "no nodes"
    elif sol.r_c is None:
        clauses["node_region"] = Verdict.FAIL
        details["node_region"] = "nodes present but W2 < 0 everywhere"
    else:
        outer = float(all_nodes.max())
        slack = 2.0 * _local_spacing(r, outer)
        ok = outer <= sol.r_c + slack
        clauses["node_region"] = Verdict.PASS if ok else Verdict.FAIL
        details["node_region"] = f"outermost node r={outer:.8g}, r_c={sol.r_c:.8g}"

    # (c) strict interleaving
    labels = np.concatenate([np.ones(nodes1.size, int), np.full(nodes2.size, 2)])
    order = np.argsort(all_nodes, kind="stable")
    seq = labels[order]
    ok = bool(np.all(seq[1:] != seq[:-1])) and np.unique(all_nodes).size == all_nodes.size
    clauses["alternation"] = Verdict.PASS if ok else Verdict.FAIL
    details["alternation"] = "".join("ab"[s - 1] for s in seq) or "no nodes"

    # (d) origin sign law
    w2_0 = _origin_w2(sol)
    if d > 1:
        prod = p1[0] * p2[0]
        want = np.sign(k)
        where = f"r={r[0]:.3g}"
    else:
        both = np.flatnonzero((p1 != 0) & (p2 != 0) & (r > 0))
        i0 = int(both[0]) if both.size else 0
        prod = p1[i0] * p2[i0]
        want = 1.0 if prob.parity is Parity.U1_EVEN else -1.0
        where = f"x={r[i0]:.3g}"
    if w2_0 < 0:
        clauses["origin_signs"] = Verdict.NOT_APPLICABLE
        details["origin_signs"] = f"W2 < 0 at the origin ({w2_0:.3g}); sign law not asserted"
    else:
        ok = np.sign(prod) == want
        clauses["origin_signs"] = Verdict.PASS if ok else Verdict.FAIL
        details["origin_signs"] = f"sign(psi1*psi2) at {where} = {int(np.sign(prod)):+d}, expected {int(want):+d}"

    # (e) sign law at the far end
    both = np.flatnonzero((p1 != 0) & (p2 != 0))
    if both.size == 0:
        clauses["infinity_signs"] = Verdict.FAIL
        details["infinity_signs"] = "no sample with both components nonzero"
    else:
        i1 = int(both[-1])
        want = 1.0 if d == 1 else -1.0
        got = np.sign(p1[i1] * p2[i1])
        clauses["infinity_signs"] = Verdict.PASS if got == want else Verdict.FAIL
        details["infinity_signs"] = f"sign(psi1*psi2) at r={r[i1]:.6g} = {int(got):+d}, expected {int(want):+d}"

    # (f) orbit rotation
    _, rot = orbit_trace(sol)
    clauses["orbit_rotation"] = rot.status
    details["orbit_rotation"] = rot.describe()

    return NodalReport(
        n1=n1,
        n2=n2,
        theorem_expected_n2=exp2,
        clauses=clauses,
        details=details,
        nodes_psi1=[float(x) for x in nodes1],
        nodes_psi2=[float(x) for x in nodes2],
        informational=("orbit_rotation",) if d == 1 else (),
    )


@dataclass
class OrbitTrace:
    radii: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    phi: np.ndarray
    rho: np.ndarray
    riccati_residual: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.psi1, self.psi2])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "psi1", "psi2", "phi", "riccati_residual"])
        for row in zip(self.radii, self.psi1, self.psi2, self.phi, self.riccati_residual):
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return "%.17g" % float(x)


@dataclass
class RotationVerdict:
    status: Verdict
    direction: str  # expected: "clockwise" (d > 1) or "counterclockwise" (d = 1)
    crossings: int = 0
    wrong: list[float] = field(default_factory=list)
    informational: bool = False

    def describe(self) -> str:
        if self.status is Verdict.NOT_APPLICABLE:
            return "no axis crossings in the node region"
        tag = " (informational)" if self.informational else ""
        if self.wrong:
            return (f"{len(self.wrong)} of {self.crossings} crossings not {self.direction}; "
                    f"first at r={self.wrong[0]:.6g}{tag}")
        return f"{self.crossings} crossings, all {self.direction}{tag}"

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "direction": self.direction,
            "crossings": self.crossings,
            "wrong_crossings": self.wrong,
            "informational": self.informational,
        }


def riccati_residual(sol, zeta: float = ZETA) -> tuple[np.ndarray, np.ndarray]:
    """|rho' - (2 k rho / r - W2 - W1 rho^2)| with rho' by finite differences.

    Returns ``(residual, rho)``; entries are NaN where psi1 is negligible at
    any point of the difference stencil or changes sign across it (the
    stencil would straddle a pole of rho).  Only meaningful for d > 1.
    """
    r, p1, p2 = sol.radii, sol.psi1, sol.psi2
    ok = significant(p1, zeta)
    rho = np.full(r.shape, np.nan)
    rho[ok] = p2[ok] / p1[ok]
    res = np.full(r.shape, np.nan)
    if sol.problem.dimension == 1 or r.size < 3:
        return res, rho
    sgn = np.sign(p1)
    inner = ok[1:-1] & ok[:-2] & ok[2:] & (sgn[:-2] == sgn[1:-1]) & (sgn[1:-1] == sgn[2:])
    safe = np.where(ok, rho, 0.0)
    drho = np.gradient(safe, r)
    k = sol.problem.k_d
    rhs = 2 * k * safe / r - w2(sol.problem, sol.energy, r) - w1(sol.problem, sol.energy, r) * safe**2
    full = np.abs(drho - rhs)
    res[1:-1] = np.where(inner, full[1:-1], np.nan)
    return res, rho


RICCATI_FLOOR = 1e-10


@dataclass(frozen=True)
class RiccatiConvergence:
    """Scaled Riccati residual on a grid and on the same grid halved."""

    coarse: float
    fine: float
    points: int

    @property
    def at_roundoff(self) -> bool:
        return self.coarse <= RICCATI_FLOOR

    @property
    def order(self) -> float:
        if self.fine <= 0:
            return math.inf
        return math.log2(self.coarse / self.fine)

    def passes(self, min_order: float = 1.8) -> bool:
        return self.at_roundoff or self.order >= min_order


def _scaled_riccati(sol) -> tuple[np.ndarray, np.ndarray]:
    res, rho = riccati_residual(sol)
    r = sol.radii
    scale = (np.abs(2 * sol.problem.k_d * rho / r) + np.abs(w2(sol.problem, sol.energy, r))
             + np.abs(w1(sol.problem, sol.energy, r)) * rho**2)
    return res / scale, rho


def riccati_convergence(sol, rho_max: float = 1.0) -> RiccatiConvergence:
    """Compare the Riccati residual before and after halving the output spacing.

    The residual is divided by the size of the terms it balances, so that
    roundoff near the origin does not dominate, and is taken on the shared
    radii where |rho| <= rho_max (bounded distance from the poles of rho).
    A state whose residual is already at roundoff (e.g. one with constant
    rho) has no measurable order and counts as converged.
    """
    if sol.problem.dimension == 1:
        raise ValueError("the Riccati form applies to d > 1 only")
    a, rho = _scaled_riccati(sol)
    fine = sol.resample(2 * sol.samples_per_step)
    b = _scaled_riccati(fine)[0][::2]
    mask = np.isfinite(a) & np.isfinite(b) & (np.abs(rho) <= rho_max)
    if not mask.any():
        return RiccatiConvergence(0.0, 0.0, 0)
    return RiccatiConvergence(float(a[mask].max()), float(b[mask].max()), int(mask.sum()))


def orbit_trace(sol: "RadialSolution") -> tuple[OrbitTrace, RotationVerdict]:
    """Parametric spinor orbit with unwrapped angle and rotation verdict.

    At every node of either component inside the node region the discrete
    change of the orbit angle must be negative for d > 1 (clockwise); for
    d = 1 the counterclockwise sense is reported but not enforced.
    """
    r, p1, p2 = sol.radii, sol.psi1, sol.psi2
    phi = np.unwrap(np.arctan2(p2, p1))
    res, rho = riccati_residual(sol)
    trace = OrbitTrace(r, p1, p2, phi, rho, res)

    d1 = sol.problem.dimension == 1
    direction = "counterclockwise" if d1 else "clockwise"
    limit = np.inf if sol.r_c is None else sol.r_c
    wrong: list[float] = []
    count = 0
    for comp in (p1, p2):
        i, j = _crossings(comp, r)
        for a, b in zip(i, j):
            if r[a] > limit + 2.0 * (r[b] - r[a]):
                continue
            count += 1
            dphi = phi[b] - phi[a]
            if (dphi <= 0) if d1 else (dphi >= 0):
                wrong.append(float(r[a]))
    if count == 0:
        status = Verdict.NOT_APPLICABLE
    else:
        status = Verdict.FAIL if wrong else Verdict.PASS
    return trace, RotationVerdict(status, direction, count, sorted(wrong), informational=d1)
