"""JSON netlist/excitation documents and CSV traces.

Netlist document (``format: 1``)::

    {"format": 1, "nu": 1,
     "vertices": [{"id": 1, "boundary": true}, {"id": 2, "boundary": false}],
     "edges": [{"tail": 1, "head": 2, "p": [1.0, 0.5], "q": [1.0, 0.0]},
               {"tail": 2, "head": 1, "element": {"kind": "series-RL",
                                                  "values": {"r": 1, "l": 0.5}}}],
     "meta": {...}}

Excitation document::

    {"format": 1, "grid": {"t0": 0, "t_end": 10, "dt": 0.001},
     "boundary": {"1": {"sin": {"amp": 1, "omega": 6.283185307179586}}},
     "injections": {"3": {"const": 1.0}}}
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .graph import DirectedGraph, GraphError, VertexPartition
from .network import GeneralizedNetwork, InvalidNetwork, element, validate
from .signals import Signal, signal_from_dict
from .simulation import Grid, Trace

FORMAT_VERSION = 1


class DocumentError(ValueError):
    """Malformed netlist or excitation document."""


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DocumentError(f"{where}: missing field {key!r}")
    return obj[key]


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise DocumentError(f"{where}: expected an integer, got {x!r}")
    return x


def _numbers(x, where: str) -> tuple[float, ...]:
    if not isinstance(x, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        raise DocumentError(f"{where}: expected a list of numbers, got {x!r}")
    return tuple(float(v) for v in x)


def _load(text: str, what: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{what} is not valid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DocumentError(f"{what} must be a JSON object")
    if doc.get("format") != FORMAT_VERSION:
        raise DocumentError(f"{what}: unsupported or missing format {doc.get('format')!r} (expected {FORMAT_VERSION})")
    return doc


def netlist_from_dict(doc: dict[str, Any], check: bool = True) -> GeneralizedNetwork:
    extra = set(doc) - {"format", "nu", "vertices", "edges", "meta"}
    if extra:
        raise DocumentError(f"netlist: unknown fields {sorted(extra)}")
    nu = _int(_require(doc, "nu", "netlist"), "netlist.nu")
    if nu < 0:
        raise DocumentError("netlist.nu: must be nonnegative")
    vertices = _require(doc, "vertices", "netlist")
    if not isinstance(vertices, list) or not vertices:
        raise DocumentError("netlist.vertices: expected a nonempty list")
    ids, boundary = [], []
    for n, v in enumerate(vertices):
        where = f"netlist.vertices[{n}]"
        if not isinstance(v, dict):
            raise DocumentError(f"{where}: expected an object")
        vid = _int(_require(v, "id", where), f"{where}.id")
        flag = _require(v, "boundary", where)
        if not isinstance(flag, bool):
            raise DocumentError(f"{where}.boundary: expected true/false")
        ids.append(vid)
        if flag:
            boundary.append(vid)
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise DocumentError(f"netlist.vertices: ids must be exactly 1..{len(ids)}, got {sorted(ids)}")

    edges_doc = _require(doc, "edges", "netlist")
    if not isinstance(edges_doc, list):
        raise DocumentError("netlist.edges: expected a list")
    edges, P, Q = [], [], []
    for k, ed in enumerate(edges_doc):
        where = f"netlist.edges[{k}]"
        if not isinstance(ed, dict):
            raise DocumentError(f"{where}: expected an object")
        tail = _int(_require(ed, "tail", where), f"{where}.tail")
        head = _int(_require(ed, "head", where), f"{where}.head")
        if "element" in ed:
            if "p" in ed or "q" in ed:
                raise DocumentError(f"{where}: give either an element or p/q arrays, not both")
            el = ed["element"]
            if not isinstance(el, dict):
                raise DocumentError(f"{where}.element: expected an object")
            kind = _require(el, "kind", f"{where}.element")
            values = el.get("values", {})
            if not isinstance(values, dict):
                raise DocumentError(f"{where}.element.values: expected an object")
            try:
                p, q = element(kind, values, nu)
            except ValueError as exc:
                raise DocumentError(f"{where}.element: {exc}") from exc
        else:
            p = _numbers(_require(ed, "p", where), f"{where}.p")
            q = _numbers(_require(ed, "q", where), f"{where}.q")
            for name, vec in (("p", p), ("q", q)):
                if len(vec) != nu + 1:
                    raise DocumentError(f"{where}.{name}: edge {k + 1} has {len(vec)} coefficients, expected nu+1 = {nu + 1}")
        edges.append((tail, head))
        P.append(p)
        Q.append(q)
    try:
        graph = DirectedGraph(len(ids), tuple(edges))
    except GraphError as exc:
        raise DocumentError(f"netlist.edges: {exc}") from exc
    net = GeneralizedNetwork(graph, VertexPartition.from_boundary(len(ids), boundary), nu, P, Q)
    if check:
        problems = validate(net)
        if problems:
            raise InvalidNetwork(problems)
    return net


def parse_netlist(text: str, check: bool = True) -> GeneralizedNetwork:
    """Parse a netlist document. With ``check`` the network must also validate."""
    return netlist_from_dict(_load(text, "netlist"), check)


def netlist_to_dict(net: GeneralizedNetwork, meta: dict | None = None) -> dict[str, Any]:
    boundary = set(net.boundary)
    doc = {
        "format": FORMAT_VERSION,
        "nu": net.nu,
        "vertices": [{"id": v, "boundary": v in boundary} for v in net.graph.vertices],
        "edges": [
            {"tail": t, "head": h, "p": list(p), "q": list(q)}
            for (t, h), p, q in zip(net.graph.edges, net.P, net.Q)
        ],
    }
    if meta:
        doc["meta"] = meta
    return doc


def serialize_netlist(net: GeneralizedNetwork, meta: dict | None = None) -> str:
    return json.dumps(netlist_to_dict(net, meta), indent=2) + "\n"


@dataclass
class Excitation:
    grid: Grid
    boundary: dict[int, Signal] = field(default_factory=dict)
    injections: dict[int, Signal] = field(default_factory=dict)

    def check_against(self, net: GeneralizedNetwork) -> None:
        for role, sigs, allowed in (
            ("boundary", self.boundary, set(net.boundary)),
            ("injections", self.injections, set(net.internal)),
        ):
            bad = sorted(set(sigs) - allowed)
            if bad:
                kind = "boundary" if role == "boundary" else "internal"
                raise DocumentError(f"excitation.{role}: vertices {bad} are not {kind} vertices of the network")

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT_VERSION,
            "grid": {"t0": self.grid.t0, "t_end": self.grid.t_end, "dt": self.grid.dt},
            "boundary": {str(v): s.to_dict() for v, s in sorted(self.boundary.items())},
            "injections": {str(v): s.to_dict() for v, s in sorted(self.injections.items())},
        }


def _signal_map(obj, where: str) -> dict[int, Signal]:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise DocumentError(f"{where}: expected an object keyed by vertex id")
    out = {}
    for key, body in obj.items():
        try:
            vid = int(key)
        except ValueError:
            raise DocumentError(f"{where}: key {key!r} is not a vertex id") from None
        try:
            out[vid] = signal_from_dict(body)
        except ValueError as exc:
            raise DocumentError(f"{where}[{key}]: {exc}") from exc
    return out


def parse_excitation(text: str) -> Excitation:
    doc = _load(text, "excitation")
    extra = set(doc) - {"format", "grid", "boundary", "injections", "meta"}
    if extra:
        raise DocumentError(f"excitation: unknown fields {sorted(extra)}")
    g = _require(doc, "grid", "excitation")
    try:
        grid = Grid(float(g["t0"]), float(g["t_end"]), float(g["dt"]))
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"excitation.grid: needs numeric t0, t_end, dt ({exc})") from exc
    except ValueError as exc:
        raise DocumentError(f"excitation.grid: {exc}") from exc
    return Excitation(
        grid,
        _signal_map(doc.get("boundary"), "excitation.boundary"),
        _signal_map(doc.get("injections"), "excitation.injections"),
    )


def trace_to_csv(trace: Trace) -> str:
    """CSV text: a ``t`` column then one column per channel, 17 significant digits."""
    buf = io.StringIO()
    data = np.column_stack([trace.times, trace.samples])
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(("t",) + trace.labels), comments="")
    return buf.getvalue()


def write_trace_csv(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(trace))


def read_trace_csv(path: str | Path) -> Trace:
    text = Path(path).read_text()
    header, _, _ = text.partition("\n")
    cols = header.strip().split(",")
    if not cols or cols[0] != "t":
        raise DocumentError(f"{path}: first CSV column must be 't'")
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    return Trace(float(t[0]), float(t[1] - t[0]), data[:, 1:], tuple(cols[1:]))
