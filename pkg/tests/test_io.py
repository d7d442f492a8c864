import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kronnet import Grid, NotReducible, Sinusoid, Trace, kron_reduce
from kronnet.io import (
    DocumentError,
    Excitation,
    parse_excitation,
    parse_netlist,
    read_trace_csv,
    serialize_netlist,
    trace_to_csv,
    write_trace_csv,
)
from kronnet.network import InvalidNetwork
from properties import check_serialize_round_trip

DATA = Path(__file__).resolve().parent.parent / "data"


def test_parse_y_shorthand():
    net = parse_netlist((DATA / "y.json").read_text())
    assert net.graph.vertex_count == 4 and net.graph.edge_count == 3
    assert net.nu == 0
    assert net.boundary == (1, 2, 3) and net.internal == (4,)
    assert net.P == ((1.0,),) * 3


def test_parse_example2_then_reject():
    net = parse_netlist((DATA / "example2.json").read_text())
    assert net.P[0] == (0.0, 1.0)
    with pytest.raises(NotReducible):
        kron_reduce(net)


def _doc(**edge):
    return json.dumps(
        {
            "format": 1,
            "nu": 1,
            "vertices": [{"id": 1, "boundary": True}, {"id": 2, "boundary": False}],
            "edges": [{"tail": 1, "head": 2, **edge}],
        }
    )


def test_wrong_length_names_edge():
    with pytest.raises(DocumentError, match=r"edges\[0\]\.p: edge 1 has 1 coefficients"):
        parse_netlist(_doc(p=[1.0], q=[1.0, 0.0]))


@pytest.mark.parametrize(
    "text, match",
    [
        ("{not json", "not valid JSON"),
        (json.dumps({"format": 2}), "format"),
        (_doc(q=[1, 0]), "missing field 'p'"),
        (_doc(element={"kind": "L", "values": {"l": -1}}), "strictly positive"),
        (_doc(element={"kind": "X"}), "unknown element"),
        (_doc(p=[1, 0], q=[1, 0], element={"kind": "R"}), "not both"),
        (json.dumps({"format": 1, "nu": 0, "vertices": [{"id": 2, "boundary": True}], "edges": []}), "exactly 1..1"),
        (json.dumps({"format": 1, "nu": 0, "vertices": [{"id": 1, "boundary": True}], "edges": [], "extra": 1}), "unknown fields"),
    ],
)
def test_schema_errors(text, match):
    with pytest.raises(DocumentError, match=match):
        parse_netlist(text)


def test_validation_failure_surfaces():
    with pytest.raises(InvalidNetwork, match="short-circuit edge 1"):
        parse_netlist(_doc(p=[0, 0], q=[1, 0]))
    net = parse_netlist(_doc(p=[0, 0], q=[1, 0]), check=False)
    assert net.P == ((0.0, 0.0),)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialize_round_trip(seed):
    check_serialize_round_trip(seed)


def test_reduced_netlist_round_trip(tmp_path):
    red = kron_reduce(parse_netlist((DATA / "rl_ladder.json").read_text()))
    text = serialize_netlist(red.network, {"vertex_ids": list(red.vertex_ids)})
    assert parse_netlist(text) == red.network


def test_parse_excitation():
    exc = parse_excitation((DATA / "ladder_injection.json").read_text())
    assert exc.grid == Grid(0.0, 10.0, 0.001)
    assert set(exc.boundary) == {1} and set(exc.injections) == {5, 9}
    assert parse_excitation(json.dumps(exc.to_dict())).to_dict() == exc.to_dict()


@pytest.mark.parametrize(
    "doc, match",
    [
        ({"format": 1, "grid": {"t0": 0, "t_end": 1, "dt": 0}}, "dt must be positive"),
        ({"format": 1, "grid": {"t0": 1, "t_end": 0, "dt": 0.1}}, "t_end"),
        ({"format": 1, "grid": {"t0": 0}}, "grid"),
        ({"format": 1, "grid": {"t0": 0, "t_end": 1, "dt": 0.1}, "boundary": {"x": 1}}, "not a vertex id"),
        ({"format": 1, "grid": {"t0": 0, "t_end": 1, "dt": 0.1}, "boundary": {"1": {"foo": 1}}}, "unknown signal"),
    ],
)
def test_excitation_errors(doc, match):
    with pytest.raises(DocumentError, match=match):
        parse_excitation(json.dumps(doc))


def test_excitation_role_check():
    net = parse_netlist((DATA / "y.json").read_text())
    Excitation(Grid(0, 1, 0.1), {1: Sinusoid(1, 1)}, {4: Sinusoid(1, 1)}).check_against(net)
    with pytest.raises(DocumentError, match="not boundary"):
        Excitation(Grid(0, 1, 0.1), {4: Sinusoid(1, 1)}).check_against(net)
    with pytest.raises(DocumentError, match="not internal"):
        Excitation(Grid(0, 1, 0.1), {}, {1: Sinusoid(1, 1)}).check_against(net)


def test_csv_is_bit_faithful(tmp_path):
    rng = np.random.default_rng(7)
    trace = Trace(0.0, 0.1, rng.normal(size=(20, 2)) * 10.0 ** rng.uniform(-300, 300, size=(20, 2)), ("I0b_1", "psi0i_3"))
    path = tmp_path / "t.csv"
    write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,I0b_1,psi0i_3"
    back = read_trace_csv(path)
    assert back.labels == trace.labels
    np.testing.assert_array_equal(back.samples, trace.samples)
    assert trace_to_csv(trace) == trace_to_csv(back)
