import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracnodes import AmbiguousNodeError, ProblemSpec, coulomb, hellmann, laser_dressed_coulomb, solve_state
from diracnodes.nodal import (
    Verdict,
    count_nodes,
    expected_n2,
    first_node_component,
    node_radii,
    orbit_trace,
    riccati_convergence,
    verify_structure,
)

X = np.linspace(0.0, 10.0, 201)


def test_count_examples():
    two_changes = np.sin(X * 2 * np.pi / 7.5)[1:]  # sign changes at 3.75 and 7.5
    assert count_nodes(two_changes, X[1:]) == 2
    assert count_nodes(two_changes, X[1:], "full_line", "odd") == 5
    assert count_nodes(np.exp(-X), X) == 0
    one_change = np.cos(X * np.pi / 5)[:150]
    assert count_nodes(one_change, X[:150], "full_line", "odd") == 3
    assert count_nodes(one_change, X[:150], "full_line", "even") == 2


def test_endpoints_are_not_nodes():
    r = np.linspace(0, 1, 11)
    v = r * (1 - r)  # zero at both ends
    assert count_nodes(v, r) == 0


def test_single_negligible_sample_is_bridged():
    v = np.array([1.0, 0.5, 0.0, -0.5, -1.0])
    assert count_nodes(v, np.arange(5.0)) == 1
    assert node_radii(v, np.arange(5.0)) == pytest.approx([2.0])


def test_consecutive_negligible_samples_are_ambiguous():
    v = np.array([1.0, 0.5, 0.0, 0.0, -0.5, -1.0])
    with pytest.raises(AmbiguousNodeError):
        count_nodes(v, np.arange(6.0))


def test_tail_noise_below_threshold_is_ignored():
    v = np.concatenate([np.linspace(1, 0.1, 10), [1e-12, -1e-12, 2e-12]])
    r = np.arange(v.size, dtype=float)
    # noise is negligible, but three negligible samples in a row are not at an end
    with pytest.raises(AmbiguousNodeError):
        count_nodes(np.append(v, 1.0), np.append(r, 20.0))
    assert count_nodes(v[:-1], r[:-1]) == 0


def test_full_line_needs_parity():
    with pytest.raises(ValueError):
        count_nodes(np.ones(3), np.arange(3.0), "full_line")


@given(st.lists(st.floats(-1, 1).filter(lambda x: abs(x) > 1e-3), min_size=2, max_size=60))
def test_count_equals_sign_changes(values):
    v = np.array(values)
    expect = int(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))
    assert count_nodes(v, np.arange(v.size, dtype=float)) == expect


def test_expected_n2():
    assert expected_n2(3, None) == 4
    assert expected_n2(3, 2.5) == 4
    assert expected_n2(3, -1.0) == 3


def test_upper_plus_state_passes_everything(states):
    rep = verify_structure(states("plus_5"))
    assert rep.n1 == 5 and rep.n2 == 6
    assert all(v is Verdict.PASS for v in rep.clauses.values()), rep.details
    assert rep.ok and rep.theorem_ok


def test_upper_minus_state_theorem(states):
    rep = verify_structure(states("minus_5"))
    assert rep.n1 == rep.n2 == 5
    assert rep.theorem_ok and rep.ok


def test_line_states(states):
    for name, n1, n2 in (("line_even_4", 4, 5), ("line_odd_3", 3, 4)):
        rep = verify_structure(states(name))
        assert (rep.n1, rep.n2) == (n1, n2)
        assert rep.ok
        assert rep.informational == ("orbit_rotation",)


def test_negated_lower_component_breaks_both_sign_laws(states):
    sol = states("plus_0")
    rep = verify_structure(sol.with_components(psi2=-sol.psi2))
    assert rep.clauses["origin_signs"] is Verdict.FAIL
    assert rep.clauses["infinity_signs"] is Verdict.FAIL
    assert rep.clauses["orbit_rotation"] is Verdict.FAIL
    assert rep.theorem_ok  # counts are unchanged


def test_report_serialises(states):
    rep = verify_structure(states("plus_0"))
    data = json.loads(rep.to_json())
    assert set(data["clauses"]) == {
        "theorem", "node_region", "alternation", "origin_signs", "infinity_signs", "orbit_rotation"
    }
    assert data["n2"] == 1 and len(data["nodes_psi2"]) == 1 and data["nodes_psi1"] == []


def test_orbit_examples(states):
    _, rot = orbit_trace(states("plus_0"))
    assert rot.status is Verdict.PASS and rot.crossings == 1 and rot.direction == "clockwise"
    _, rot = orbit_trace(states("plus_5"))
    assert rot.status is Verdict.PASS and rot.crossings == 11
    _, rot = orbit_trace(states("minus_0"))
    assert rot.status is Verdict.NOT_APPLICABLE
    _, rot = orbit_trace(states("line_even_4"))
    assert rot.informational and rot.direction == "counterclockwise"
    assert rot.status is Verdict.PASS


def test_orbit_angle_is_continuous(states):
    for name in ("plus_5", "minus_5", "line_odd_3"):
        trace, _ = orbit_trace(states(name))
        step = np.abs(np.diff(trace.phi))
        assert step.max() < np.pi
        assert step.max() < np.pi / 4


def test_rho_decreases_through_lower_nodes(states):
    # at a psi2 node rho passes through zero with slope -W2 <= 0
    sol = states("plus_5")
    trace, _ = orbit_trace(sol)
    for rn in node_radii(sol.psi2, sol.radii):
        i = np.searchsorted(sol.radii, rn)
        assert trace.rho[i] < trace.rho[i - 1]


def test_first_node_belongs_to_lower_component_for_positive_k():
    pots = (hellmann(0.7, 0.5, 0.25), laser_dressed_coulomb(0.9, 0.5), coulomb(0.3))
    for pot in pots:
        for d, j in ((2, 0.5), (3, 1.5), (5, 2.5)):
            prob = ProblemSpec(d, 1.0, pot, j=j, tau=1)
            sol = solve_state(prob, 2)
            trace, _ = orbit_trace(sol)
            assert trace.rho[np.isfinite(trace.rho)][0] > 0
            assert first_node_component(sol) == 2


def test_first_node_none_without_nodes(states):
    assert first_node_component(states("minus_0")) is None


def test_orbit_csv(states):
    trace, _ = orbit_trace(states("plus_0"))
    text = trace.to_csv()
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["r", "psi1", "psi2", "phi", "riccati_residual"]
    assert len(rows) == trace.radii.size + 1
    assert float(rows[5][1]) == trace.psi1[4]  # 17 digits round-trip exactly
    assert rows[1][4] == "nan"


def test_riccati_second_order(states):
    conv = riccati_convergence(states("plus_5"))
    assert not conv.at_roundoff
    assert conv.order == pytest.approx(2.0, abs=0.1)
    assert conv.passes()


def test_riccati_exact_ratio_is_at_roundoff():
    # Coulomb ground state with k < 0 has psi2/psi1 constant
    sol = solve_state(ProblemSpec(3, 1.0, coulomb(0.3), j=0.5, tau=-1), 0)
    conv = riccati_convergence(sol)
    assert conv.at_roundoff and conv.passes()


def test_riccati_is_radial_only(states):
    with pytest.raises(ValueError):
        riccati_convergence(states("line_even_4"))
