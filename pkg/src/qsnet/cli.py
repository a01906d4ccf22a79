"""Command-line front end.

Exit codes: 0 success, 1 domain error (the message names the violated
invariant), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import entanglement_profile
from .ensemble import EnsembleConfig, config_dict, run_ensemble
from .errors import A0NotHurwitz, NoCertificateFound, ParseError, QsnetError
from .lmi import find_certificate
from .model import build_blocks, load_network, validate_spec
from .performance import finite_cost, load_weights, thermodynamic_cost
from .spectral import stability_sweep, steady_spectrum, write_spectrum_csv


# --------------------------------------------------------------------------
# output helpers


def format_number(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float at 17 significant digits (locale independent)."""
    pad = " " * indent
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(f"{pad}  {json.dumps(str(k))}: {to_json(v, indent + 2)}" for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v, indent) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Run:
    """Collects inputs and writes outputs together with their manifests."""

    def __init__(self, args):
        self.args = args
        self.start = time.perf_counter()
        self.inputs = {}

    def input(self, path) -> Path:
        p = Path(path)
        if not p.is_file():
            raise ParseError(f"input file not found: {path}")
        self.inputs[str(p)] = _sha256(p)
        return p

    def config(self) -> dict:
        skip = {"func"}
        return {k: v for k, v in vars(self.args).items() if k not in skip}

    def manifest(self, out_path) -> None:
        data = {
            "command": self.args.command,
            "config": self.config(),
            "inputs": self.inputs,
            "output": str(out_path),
            "output_sha256": _sha256(out_path),
            "version": __version__,
            "wall_time": time.perf_counter() - self.start,
            "seed": getattr(self.args, "seed", None),
        }
        Path(str(out_path) + ".manifest.json").write_text(to_json(data) + "\n")

    def emit_text(self, text: str, out=None) -> None:
        out = out if out is not None else getattr(self.args, "out", None)
        if out:
            Path(out).write_text(text)
            self.manifest(out)
        else:
            sys.stdout.write(text)

    def emit_json(self, obj) -> None:
        self.emit_text(to_json(obj) + "\n")


def _network_arg(args):
    path = getattr(args, "network_pos", None) or getattr(args, "network", None)
    if not path:
        raise ParseError("a network file is required")
    return path


def _load_blocks(run: _Run):
    spec = validate_spec(load_network(run.input(_network_arg(run.args))))
    return spec, build_blocks(spec)


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args, run):
    spec = validate_spec(load_network(run.input(_network_arg(args))))
    run.emit_json({"valid": True, "n": spec.n, "m": spec.m, "N": spec.N, "d": spec.d})
    return 0


def cmd_stability(args, run):
    _, blocks = _load_blocks(run)
    report = stability_sweep(blocks, args.K)
    run.emit_json(report.to_dict())
    return 0


def cmd_lmi_check(args, run):
    _, blocks = _load_blocks(run)
    try:
        cert = find_certificate(blocks, args.epsilon)
    except (NoCertificateFound, A0NotHurwitz) as exc:
        run.emit_json({
            "feasible": False,
            "S": None,
            "Q": None,
            "slack": None,
            "iterations": getattr(exc, "iterations", 0),
            "reason": f"{type(exc).__name__}: {exc}",
        })
        return 0
    run.emit_json({
        "feasible": True,
        "S": cert.S,
        "Q": cert.Q,
        "slack": cert.slack,
        "iterations": cert.iterations,
    })
    return 0


def cmd_spectrum(args, run):
    spec, blocks = _load_blocks(run)
    K = args.K or spec.N
    spectrum = steady_spectrum(blocks, K)
    buf = io.StringIO()
    write_spectrum_csv(spectrum, buf)
    run.emit_text(buf.getvalue())
    return 0


def cmd_performance(args, run):
    spec, blocks = _load_blocks(run)
    weights = load_weights(run.input(args.weights))
    N = args.N or spec.N
    out = {"E_N": None, "E_inf": None, "err": None}
    out["E_N"] = finite_cost(steady_spectrum(blocks, N), weights, N)
    if args.limit:
        out["E_inf"], out["err"] = thermodynamic_cost(blocks, weights, args.K or 512)
    run.emit_json(out)
    return 0


def _parse_pairs(text):
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            j, k = (int(x) for x in chunk.split(","))
        except ValueError:
            raise ParseError(f"bad pair {chunk!r}; expected j,k") from None
        pairs.append((j, k))
    if not pairs:
        raise ParseError("no pairs given")
    return pairs


def _parse_range(text):
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise ParseError(f"bad profile range {text!r}; expected a_min..a_max") from None
    if lo > hi:
        raise ParseError("profile range is empty")
    return range(lo, hi + 1)


def cmd_entangle(args, run):
    from .entanglement import bipartite_lambda, infinite_chain_lambda, separability_verdict

    spec, blocks = _load_blocks(run)
    N = spec.N
    rows = []
    if args.pairs:
        spectrum = steady_spectrum(blocks, N)
        inf_spec = steady_spectrum(blocks, args.K or 2048) if args.infinite else None
        for j, k in _parse_pairs(args.pairs):
            rows.append(separability_verdict(bipartite_lambda(spectrum, j, k, N)))
            if inf_spec is not None:
                rows.append(separability_verdict(infinite_chain_lambda(blocks, j - k, spectrum=inf_spec)))
    else:
        rows = entanglement_profile(blocks, N, _parse_range(args.profile), K=args.K, infinite=args.infinite)
    lines = ["a,detLambda,logNeg,separable,source"]
    for r in rows:
        lines.append(",".join([
            str(r.lag), format_number(r.det_lambda), format_number(r.log_negativity),
            "true" if r.separable else "false", r.source,
        ]))
    run.emit_text("\n".join(lines) + "\n")
    return 0


def cmd_ensemble(args, run):
    cfg = EnsembleConfig(
        count=args.count, N=args.N, d=args.d, seed=args.seed,
        amplitude=args.amplitude, max_rejects=args.max_rejects,
    )
    stats = run_ensemble(cfg, jobs=args.jobs)
    if args.out:
        stats.write_csv(args.out)
        run.manifest(args.out)
    else:
        stats.write_csv(sys.stdout)
    if args.svg:
        stats.write_svg(args.svg)
        run.manifest(args.svg)
    summary = {"config": config_dict(cfg), "sign_consistency": stats.sign_consistency()}
    sys.stderr.write(to_json(summary) + "\n")
    return 0


# --------------------------------------------------------------------------
# parser


def _add_network(p, positional=True):
    if positional:
        p.add_argument("network_pos", nargs="?", metavar="NETWORK", help="network JSON file")
    p.add_argument("--network", help="network JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", help="write the result here instead of stdout")
    shared.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    shared.add_argument("--K", type=int, default=None, help="grid / quadrature size")
    shared.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", parents=[shared], help="check a network file")
    _add_network(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stability", parents=[shared], help="spectral stability sweep")
    _add_network(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("lmi-check", parents=[shared], help="search for an LMI stability certificate")
    _add_network(p)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.set_defaults(func=cmd_lmi_check)

    p = sub.add_parser("spectrum", parents=[shared], help="steady covariance spectrum as CSV")
    _add_network(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("performance", parents=[shared], help="mean-square cost")
    _add_network(p)
    p.add_argument("--weights", required=True, help="weighting sequence JSON file")
    p.add_argument("--N", type=int, default=None, help="ring length (default: from network)")
    p.add_argument("--limit", action="store_true", help="also compute the thermodynamic limit")
    p.set_defaults(func=cmd_performance)

    p = sub.add_parser("entangle", parents=[shared], help="bipartite entanglement tests")
    _add_network(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pairs", help="j,k[;j,k...]")
    group.add_argument("--profile", help="a_min..a_max")
    p.add_argument("--infinite", action="store_true", help="add infinite-chain rows")
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("ensemble", parents=[shared], help="random-network entanglement statistics")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--N", type=int, default=400)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--amplitude", type=float, default=8.0)
    p.add_argument("--max-rejects", type=int, default=10000)
    p.add_argument("--svg", help="write the two-panel profile plot here")
    p.set_defaults(func=cmd_ensemble)
    return parser


def _join_negative_ranges(argv):
    # "--profile -3..3" would otherwise be read as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--profile":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--profile={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_ranges(argv))
    run = _Run(args)
    try:
        return args.func(args, run)
    except ParseError as exc:
        sys.stderr.write(f"ParseError: {exc}\n")
        return 2
    except (QsnetError, ValueError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
