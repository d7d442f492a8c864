"""Command-line interface.

Exit codes: 0 ok, 1 validation failure, 2 not reducible, 3 file/parse error,
4 numeric failure, 5 equivalence check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .graph import GraphError
from .io import DocumentError, parse_excitation, parse_netlist, serialize_netlist, write_trace_csv
from .network import DEFAULT_RTOL, InvalidNetwork, NotReducible, validate
from .reduction import SingularInternalBlock, kron_reduce
from .simulation import (
    PoleError,
    check_equivalence,
    frequency_response,
    max_relative_error,
    sample_frequencies,
    simulate_original,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_REDUCIBLE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_MISMATCH = 5


def _emit(payload: dict, path: str | None = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_validate(args) -> int:
    net = parse_netlist(_read(args.netlist), check=False)
    problems = validate(net)
    _emit({"valid": not problems, "problems": problems})
    return EXIT_INVALID if problems else EXIT_OK


def cmd_reduce(args) -> int:
    net = parse_netlist(_read(args.netlist))
    red = kron_reduce(net, args.rtol)
    meta = {"vertex_ids": list(red.vertex_ids), "eliminated": list(red.eliminated)}
    Path(args.output).write_text(serialize_netlist(red.network, meta))
    _emit(
        {
            "eliminated_vertices": len(red.eliminated),
            "edges_before": net.graph.edge_count,
            "edges_after": red.network.graph.edge_count,
            "schur_residual": red.schur_residual(),
            "vertex_ids": list(red.vertex_ids),
            "reduced_weights": red.gamma_hat.tolist(),
            "output": args.output,
        },
        args.report,
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    net = parse_netlist(_read(args.netlist))
    exc = parse_excitation(_read(args.excitation))
    exc.check_against(net)
    currents, potentials = simulate_original(net, exc.boundary, exc.grid, exc.injections, args.rtol)
    write_trace_csv(currents.join(potentials), args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    net = parse_netlist(_read(args.netlist))
    exc = parse_excitation(_read(args.excitation))
    exc.check_against(net)
    skip = "auto" if args.skip == "auto" else float(args.skip)
    report, original, reduced = check_equivalence(
        net, exc.boundary, exc.grid, args.tol, skip, exc.injections or None, args.rtol
    )
    if args.traces:
        write_trace_csv(original, f"{args.traces}_original.csv")
        write_trace_csv(reduced, f"{args.traces}_reduced.csv")
    _emit(report.to_dict(), args.output)
    return EXIT_OK if report.passed else EXIT_MISMATCH


def cmd_freqresp(args) -> int:
    net = parse_netlist(_read(args.netlist))
    red = kron_reduce(net, args.rtol)
    rng = np.random.default_rng(args.seed)
    points = sample_frequencies(red.p_tilde, args.samples, rng)
    errors = [max_relative_error(frequency_response(red, s), frequency_response(net, s, args.rtol)) for s in points]
    worst = max(errors, default=0.0)
    _emit(
        {
            "samples": args.samples,
            "seed": args.seed,
            "max_relative_error": worst,
            "tolerance": args.tol,
            "passed": worst <= args.tol,
            "frequencies": [[s.real, s.imag] for s in points],
        }
    )
    return EXIT_OK if worst <= args.tol else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kronnet", description="Time-domain Kron reduction of generalized electrical networks.")
    parser.add_argument("--rtol", type=float, default=DEFAULT_RTOL, help="rank-1 tolerance (default %(default)g)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a netlist")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reduce", help="eliminate internal vertices")
    p.add_argument("netlist")
    p.add_argument("-o", "--output", required=True, help="reduced netlist path")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("simulate", help="simulate the original network to CSV")
    p.add_argument("netlist")
    p.add_argument("excitation")
    p.add_argument("-o", "--output", required=True, help="CSV trace path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="simulate original and reduced networks and compare")
    p.add_argument("netlist")
    p.add_argument("excitation")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--skip", default="auto", help="transient window in seconds, or 'auto'")
    p.add_argument("--traces", metavar="PREFIX", help="also write PREFIX_original.csv and PREFIX_reduced.csv")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("freqresp", help="compare admittance matrices at random frequencies")
    p.add_argument("netlist")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_freqresp)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidNetwork as exc:
        _err(f"invalid network: {exc}")
        return EXIT_INVALID
    except NotReducible as exc:
        _err(f"not reducible: {exc}")
        return EXIT_NOT_REDUCIBLE
    except (DocumentError, OSError) as exc:
        _err(str(exc))
        return EXIT_IO
    except (SingularInternalBlock, PoleError, GraphError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC


def _err(msg: str) -> None:
    print(f"kronnet: {msg}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
