import json

import pytest

from diracnodes import ValidationError
from diracnodes.document import load_config, load_document, parse_parity
from diracnodes.radial_ode import Parity
from diracnodes.sweep import DEFAULT_SWEEP, SweepSyntaxError, parse_sweep

HELL = {"family": "Hellmann", "params": {"A": 0.7, "B": 0.5, "C": 0.25}}


def test_fraction_j_and_defaults():
    doc = load_document({"dimension": 5, "potential": HELL, "j": "3/2", "tau": -1})
    prob = doc.problem()
    assert prob.j == 1.5 and prob.k_d == -3 and prob.mass == 1.0
    assert doc.output.samples_per_step == 4 and doc.output.psi2_scale is None


def test_reads_from_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"dimension": 1, "potential": {"family": "LaserDressedCoulomb",
                                                           "params": {"v": 0.9, "lambda": 0.5}},
                             "parity": "odd"}))
    prob = load_document(p).problem()
    assert prob.parity is Parity.U1_ODD
    assert load_document(p).problem("even").parity is Parity.U1_EVEN


@pytest.mark.parametrize(
    "data, field",
    [
        ({"dimension": 5, "potential": HELL, "tau": 1}, "j"),
        ({"dimension": 5, "potential": HELL, "j": 1.5, "tau": 1, "colour": 1}, "colour"),
        ({"dimension": 5, "potential": {**HELL, "shape": 1}, "j": 1.5, "tau": 1}, "potential.shape"),
        ({"dimension": 5, "potential": HELL, "j": 1.5, "tau": 2}, "tau"),
        ({"dimension": 5, "potential": HELL, "j": "x", "tau": 1}, "j"),
        ({"potential": HELL}, "dimension"),
        ({"dimension": 5, "potential": HELL, "j": 1.5, "tau": 1, "config": {"rtl": 1}}, "config.rtl"),
        ({"dimension": 5, "potential": {"family": "Hellmann", "params": {"A": 1}}, "j": 1.5, "tau": 1}, "B"),
        ({"dimension": 1, "potential": HELL, "parity": "even"}, "potential"),
        ({"dimension": 1, "potential": HELL, "parity": "sideways"}, "parity"),
    ],
)
def test_errors_name_the_field(data, field):
    with pytest.raises(ValidationError) as info:
        load_document(data).problem()
    assert info.value.field == field
    assert field.split(".")[-1] in str(info.value) or field in ("potential",)


def test_tabulated_potential_document():
    doc = load_document({"dimension": 1, "parity": "even",
                         "potential": {"family": "TabulatedMonotone", "table": [[0, -1], [1, -0.5], [2, -0.1]]}})
    assert doc.problem().potential.table_v == (-1.0, -0.5, -0.1)
    with pytest.raises(ValidationError):
        load_document({"dimension": 1, "parity": "even", "potential": {"family": "TabulatedMonotone"}}).problem()


def test_config_precedence():
    doc = load_document({"dimension": 5, "potential": HELL, "j": 1.5, "tau": 1,
                         "config": {"rtol": 1e-9, "scan_points": 100}, "output": {"samples_per_step": 8}})
    cfg = doc.shooting_config({"rtol": 1e-8})
    assert cfg.rtol == 1e-8 and cfg.scan_points == 100 and cfg.samples_per_step == 8
    with pytest.raises(ValidationError):
        doc.shooting_config({"rtol": -1.0})
    assert load_config({"atol": 1e-12}) == {"atol": 1e-12}
    with pytest.raises(ValidationError):
        load_config({"bogus": 1})


def test_bad_json_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_document(p)
    with pytest.raises(ValidationError, match="cannot read"):
        load_document(tmp_path / "missing.json")


def test_parity_aliases():
    assert parse_parity("EVEN") is Parity.U1_EVEN
    assert parse_parity("u1_odd") is Parity.U1_ODD
    assert parse_parity(None) is None


def test_sweep_grammar():
    pts = parse_sweep("d=2..6,j=0.5..2.5,tau=±1,n1=0..4")
    assert len(pts) == 5 * 3 * 2 * 5
    assert {p.j for p in pts} == {0.5, 1.5, 2.5} and {p.tau for p in pts} == {-1, 1}
    one = parse_sweep("d=5,j=3/2,tau=-1,n1=5")
    assert len(one) == 1 and (one[0].dimension, one[0].j, one[0].tau, one[0].n1) == (5, 1.5, -1, 5)
    assert len(parse_sweep("d=2,j=1/2..5/2,tau=+-1,n1=0")) == 6


def test_default_sweep_and_line_points():
    pts = parse_sweep(None)
    assert len(pts) == 5 + 5 * 3 * 2 * 5
    line = [p for p in pts if p.dimension == 1]
    assert [p.parity for p in line[:2]] == [Parity.U1_EVEN, Parity.U1_ODD]
    assert parse_sweep(DEFAULT_SWEEP) == pts
    assert len(parse_sweep("d=1")) == 5


@pytest.mark.parametrize("text", ["d=2..", "j=1", "tau=2", "n1=-1", "q=1", "d=3,d=4", "d=0", "d=6..2", "d=2,,n1=1",
                                  "n1=0.5", "d"])
def test_sweep_syntax_errors(text):
    with pytest.raises(SweepSyntaxError):
        parse_sweep(text)
