"""Command-line driver: simulate, loop, chord, decompose, verify.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 property
suite failure. All CSV output uses shortest round-trip float formatting,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fileio
from .classical import (
    AgentPopulation,
    WeightGrid,
    decompose_classical,
    decompose_direct,
    from_agents,
    minor_loop,
    vertical_chord,
)
from .generalized import (
    GeneralizedPopulation,
    ShiftModel,
    chord_generalized,
    chord_shifted,
    decompose_generalized,
    shifted_saturation_term,
)
from .memory import initial_memory, load_memory, push_extremum, save_memory
from .signal import ReversalSequence, SampledSeries, extract_reversals, require_valid
from .verify import run_suite

USAGE_ERROR = 1
DATA_ERROR = 2
SUITE_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--model",
        choices=("classical", "generalized", "shifted"),
        default="classical",
        help="which aggregate to run (default: classical)",
    )
    sub.add_argument("--agents", required=True, help="agent file (CSV or JSON per model)")
    sub.add_argument("--input", help="sampled series CSV with time,u columns")
    sub.add_argument("--history", help="inline comma-separated reversal values")
    sub.add_argument("--start", type=float, default=0.0,
                     help="starting input value (default 0; ignored with --memory-in)")
    sub.add_argument("--memory-in", help="resume from a memory JSON written earlier")
    sub.add_argument("--memory-out", help="write the final memory JSON here")
    sub.add_argument("--grid-n", type=int,
                     help="classical only: bin agents into an n x n grid and "
                          "evaluate via region sums")
    sub.add_argument("--bounds", help="grid support as LO,HI (default: agent extent)")
    sub.add_argument("--tol", type=float, default=1e-12, help="comparison tolerance")
    sub.add_argument("--out", default="-", help="output path (default: stdout)")


def _load_model(args):
    kind = args.model
    if kind == "classical":
        pop = fileio.read_agents_csv(args.agents)
        if args.grid_n is not None:
            if args.grid_n < 2:
                raise ValueError("--grid-n must be at least 2")
            if args.bounds:
                lo, hi = (float(x) for x in args.bounds.split(","))
            else:
                lo, hi = pop.support_bounds()
            return from_agents(pop, args.grid_n, (lo, hi))
        return pop
    if kind == "generalized":
        return fileio.read_generalized_json(args.agents)
    return fileio.read_shift_json(args.agents)


def _load_memory_arg(args):
    if args.memory_in:
        return load_memory(args.memory_in)
    return None


def _input_values(args, start_u: float) -> list[float]:
    """The input moves to drive, from --input or --history."""
    if args.input and args.history:
        raise ValueError("give either --input or --history, not both")
    if args.input:
        series = fileio.read_series_csv(args.input)
        return list(series.values)
    if args.history:
        try:
            values = [float(x) for x in args.history.split(",") if x.strip()]
        except ValueError as exc:
            raise ValueError(f"bad --history value: {exc}") from exc
        if not values:
            raise ValueError("empty --history")
        seq = ReversalSequence(start_u, tuple(values))
        require_valid(seq)
        return values
    raise ValueError("an input is required: --input CSV or --history values")


def _history_seq(args, start_u: float) -> ReversalSequence:
    """History as a reversal sequence (empty when none was given)."""
    if args.input or args.history:
        values = _input_values(args, start_u)
        series = SampledSeries.from_pairs([(i, v) for i, v in enumerate(values)])
        return extract_reversals(series, start_u)
    return ReversalSequence(start_u, ())


def _open_out(args):
    if args.out == "-":
        return sys.stdout, False
    return open(args.out, "w", encoding="utf-8", newline=""), True


def _write_rows(args, header, rows) -> None:
    fh, close = _open_out(args)
    try:
        fileio.write_rows_csv(fh, header, rows)
    finally:
        if close:
            fh.close()


def cmd_simulate(args) -> int:
    model = _load_model(args)
    mem_in = _load_memory_arg(args)
    start = mem_in.current_u if mem_in is not None else args.start
    values = _input_values(args, start)

    sim = model.simulator(start_u=start, memory=mem_in)
    mem = mem_in if mem_in is not None else initial_memory(start)

    rows = []
    for step, u in enumerate(values, start=1):
        sim.push(u)
        if u != mem.current_u:
            mem = push_extremum(mem, u)
        rows.append((step, u, sim.value()))
    _write_rows(args, ["step", "u", "f"], rows)
    if args.memory_out:
        save_memory(mem, args.memory_out)
    return 0


def _chord_formula(model, u_minus, u_plus, u) -> float:
    if isinstance(model, (AgentPopulation, WeightGrid)):
        return vertical_chord(model, u_minus, u_plus, u)
    if isinstance(model, GeneralizedPopulation):
        return chord_generalized(model, u_minus, u_plus, u)
    return chord_shifted(model, u_minus, u_plus, u)


def cmd_loop(args) -> int:
    model = _load_model(args)
    history = _history_seq(args, args.start)
    trace = minor_loop(model, history, args.u_minus, args.u_plus, args.n_points)
    chord_loop = trace.chord()
    chord_formula = np.array(
        [_chord_formula(model, args.u_minus, args.u_plus, float(u)) for u in trace.us]
    )
    mismatch = float(np.abs(chord_loop - chord_formula).max())
    if mismatch <= args.tol:
        header = ["u", "f_ascending", "f_descending", "chord"]
        rows = zip(trace.us, trace.f_ascending, trace.f_descending, chord_loop)
    else:
        # Dual computation disagrees: emit both so the discrepancy is visible.
        header = ["u", "f_ascending", "f_descending", "chord", "chord_formula"]
        rows = zip(trace.us, trace.f_ascending, trace.f_descending, chord_loop, chord_formula)
        print(
            f"warning: chord mismatch up to {mismatch:.3e} between loop and formula",
            file=sys.stderr,
        )
    _write_rows(args, header, rows)
    return 0


def cmd_chord(args) -> int:
    model = _load_model(args)
    if args.at is not None:
        us = [args.at]
    else:
        us = np.linspace(args.u_minus, args.u_plus, args.n_points)
    rows = [(float(u), _chord_formula(model, args.u_minus, args.u_plus, float(u))) for u in us]
    _write_rows(args, ["u", "chord"], rows)
    return 0


def cmd_decompose(args) -> int:
    model = _load_model(args)
    mem_in = _load_memory_arg(args)
    start = mem_in.current_u if mem_in is not None else args.start
    values = _input_values(args, start)
    mem = mem_in if mem_in is not None else initial_memory(start)

    shifted_sim = model.simulator(start_u=start, memory=mem_in) if isinstance(model, ShiftModel) else None

    rows = []
    for u in values:
        if shifted_sim is not None:
            shifted_sim.push(u)
        if u != mem.current_u:
            mem = push_extremum(mem, u)
        if isinstance(model, WeightGrid):
            irr, rev = decompose_classical(model, mem)
            f_offset = 0.0
        elif isinstance(model, AgentPopulation):
            irr, rev = decompose_direct(model, mem)
            f_offset = 0.0
        elif isinstance(model, GeneralizedPopulation):
            irr, rev, f_offset = decompose_generalized(model, mem)
        else:
            irr = shifted_sim.value()
            rev = shifted_saturation_term(model, mem.current_u)
            f_offset = 0.0
        rows.append((u, irr, rev, f_offset, irr + rev + f_offset))
    _write_rows(args, ["u", "f_irreversible", "G", "F", "f_total"], rows)
    if args.memory_out:
        save_memory(mem, args.memory_out)
    return 0


def cmd_verify(args) -> int:
    model = _load_model(args)
    results = run_suite(model, seed=args.seed, tol=args.tol)
    for res in results:
        print(res.line())
    if args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(
                [
                    {
                        "name": r.name,
                        "passed": r.passed,
                        "max_deviation": r.max_deviation,
                        "detail": r.detail,
                    }
                    for r in results
                ],
                fh,
                indent=2,
            )
            fh.write("\n")
    return 0 if all(r.passed for r in results) else SUITE_FAILURE


def build_parser() -> _Parser:
    parser = _Parser(prog="preisach", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p_sim = subs.add_parser("simulate", help="drive a model along an input record")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_loop = subs.add_parser("loop", help="trace the steady cycle between two bounds")
    _add_common(p_loop)
    p_loop.add_argument("--u-minus", type=float, required=True)
    p_loop.add_argument("--u-plus", type=float, required=True)
    p_loop.add_argument("--n-points", type=int, default=101)
    p_loop.set_defaults(func=cmd_loop)

    p_chord = subs.add_parser("chord", help="vertical chord profile of a cycle")
    _add_common(p_chord)
    p_chord.add_argument("--u-minus", type=float, required=True)
    p_chord.add_argument("--u-plus", type=float, required=True)
    p_chord.add_argument("--n-points", type=int, default=101)
    p_chord.add_argument("--at", type=float, help="single probe input instead of a grid")
    p_chord.set_defaults(func=cmd_chord)

    p_dec = subs.add_parser("decompose", help="split the output along the input record")
    _add_common(p_dec)
    p_dec.set_defaults(func=cmd_decompose)

    p_ver = subs.add_parser("verify", help="run the structural property suite")
    _add_common(p_ver)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits itself for --help (0) and via _Parser.error (1)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"preisach: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
