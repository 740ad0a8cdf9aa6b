"""Command line front end.

Subcommands: ``gen`` (synthetic instances), ``match`` (norm matching),
``prune`` (consensus maximization), ``refine`` (quaternion descent),
``pipeline`` (staged end-to-end run), ``bench`` (experiment presets).

Exit codes are a stable contract for scripting: 0 success, 2 degenerate
geometry, 64 usage error, 74 I/O or input-parsing error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import benchmarks, io
from ._validation import resolve_threads
from .consensus import prune
from .exceptions import DegenerateConfigurationError, ParseError
from .matching import arcs_match, arcs_n_match, arcs_solve
from .refinement import RefineConfig, refine, residual_quadforms, residual_sum
from .rotation import quat_to_rotation, rotation_to_quat
from .synthetic import AXIS_GATE_SIGMA, NORM_GATE_SIGMA, gen_rrs, gen_srcs

EXIT_OK = 0
EXIT_DEGENERATE = 2
EXIT_USAGE = 64
EXIT_IO = 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _thresholds(args) -> tuple[float, float]:
    c = args.c
    cbar = getattr(args, "cbar", None)
    if c is None:
        if args.sigma is None:
            raise ValueError("provide --sigma or an explicit --c")
        c = NORM_GATE_SIGMA * args.sigma
    if cbar is None:
        cbar = AXIS_GATE_SIGMA * args.sigma if args.sigma is not None else (
            AXIS_GATE_SIGMA / NORM_GATE_SIGMA
        ) * c
    return float(c), float(cbar)


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rotation_doc(R) -> dict:
    return {
        "rotation": [float(v) for v in np.asarray(R).reshape(-1)],
        "quaternion": [float(v) for v in rotation_to_quat(R)],
    }


def _cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "srcs":
        inst = gen_srcs(args.m, args.n, args.k, args.sigma, seed=args.seed)
        io.save_cloud(out / "Q.csv", inst.q)
        io.save_cloud(out / "P.csv", inst.p)
        io.save_truth(out / "truth.json", inst.rotation, inst.correspondences, inst.sigma, inst.seed)
        print(f"wrote {out / 'Q.csv'}, {out / 'P.csv'}, {out / 'truth.json'}")
    else:
        inst = gen_rrs(
            args.l, args.k, args.sigma, seed=args.seed, norm_constrained=args.norm_constrained
        )
        io.save_pairs(out / "pairs.csv", inst.y, inst.x)
        io.save_truth(out / "truth.json", inst.rotation, inst.inliers, inst.sigma, inst.seed)
        print(f"wrote {out / 'pairs.csv'}, {out / 'truth.json'}")
    return EXIT_OK


def _cmd_match(args) -> int:
    q = io.load_cloud(args.q)
    p = io.load_cloud(args.p)
    if args.exact:
        pairs = arcs_match(q, p, args.c if args.c is not None else 0.0)
    else:
        c, _ = _thresholds(args)
        pairs = arcs_n_match(q, p, c)
    if args.out:
        io.save_matches(args.out, pairs)
        print(f"wrote {pairs.shape[0]} pairs to {args.out}")
    else:
        for i, j in pairs:
            print(f"{i},{j}")
    return EXIT_OK


def _cmd_prune(args) -> int:
    y, x = io.load_pairs(args.pairs)
    c, cbar = _thresholds(args)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    result = prune(y, x, c=c, cbar=cbar, n_phi=args.s, threads=threads)
    ms = (time.perf_counter() - t0) * 1000.0
    doc = _rotation_doc(result.rotation)
    doc.update(
        {
            "theta": result.theta,
            "phi": result.phi,
            "omega": result.omega,
            "consensus": result.consensus.tolist(),
            "consensus_size": result.size,
            "runtime_ms": ms,
            "c": c,
            "cbar": cbar,
            "s": args.s,
        }
    )
    _emit_json(doc, args.out)
    return EXIT_OK


def _parse_quat(text: str) -> np.ndarray:
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected 4 comma-separated quaternion components, got {len(parts)}")
    w = np.asarray(parts, dtype=np.float64)
    return w / np.linalg.norm(w)


def _cmd_refine(args) -> int:
    y, x = io.load_pairs(args.pairs)
    w0 = _parse_quat(args.init) if args.init else np.array([1.0, 0.0, 0.0, 0.0])
    cfg = RefineConfig(
        step_size=args.gamma0, decay=args.beta, max_iter=args.iters, tol=args.tol
    )
    forms = residual_quadforms(y, x)
    t0 = time.perf_counter()
    w, history = refine(forms, w0, cfg)
    ms = (time.perf_counter() - t0) * 1000.0
    doc = _rotation_doc(quat_to_rotation(w))
    doc.update(
        {
            "iterations": int(history.moved.size),
            "objective": residual_sum(w, forms),
            "runtime_ms": ms,
        }
    )
    _emit_json(doc, args.out)
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    stages = [s.strip() for s in args.stage.split(",") if s.strip()]
    known = {"arcs", "n", "o", "r"}
    bad = set(stages) - known
    if bad:
        raise ValueError(f"unknown stages {sorted(bad)}; valid: arcs, n, o, r")
    doc: dict = {"stages": stages, "seed": args.seed, "timings_ms": {}}
    threads = resolve_threads(args.threads)

    if stages == ["arcs"]:
        if not (args.q and args.p):
            raise ValueError("--stage arcs requires --q and --p cloud files")
        q = io.load_cloud(args.q)
        p = io.load_cloud(args.p)
        t0 = time.perf_counter()
        rotation, pairs = arcs_solve(q, p)
        doc["timings_ms"]["arcs"] = (time.perf_counter() - t0) * 1000.0
        doc.update(_rotation_doc(rotation))
        doc["correspondences"] = pairs.tolist()
        _emit_json(doc, args.out)
        return EXIT_OK
    if "arcs" in stages:
        raise ValueError("stage 'arcs' cannot be combined with other stages")

    c, cbar = _thresholds(args)
    doc["c"] = c
    doc["cbar"] = cbar
    y = x = None
    candidates = None
    if "n" in stages:
        if not (args.q and args.p):
            raise ValueError("stage n requires --q and --p cloud files")
        q = io.load_cloud(args.q)
        p = io.load_cloud(args.p)
        t0 = time.perf_counter()
        candidates = arcs_n_match(q, p, c)
        doc["timings_ms"]["n"] = (time.perf_counter() - t0) * 1000.0
        doc["n_candidates"] = int(candidates.shape[0])
        if candidates.shape[0] == 0:
            raise DegenerateConfigurationError("no candidate correspondences within the norm gate")
        y, x = q[candidates[:, 0]], p[candidates[:, 1]]
    elif args.pairs:
        y, x = io.load_pairs(args.pairs)
        if y.shape[0] == 0:
            raise DegenerateConfigurationError("pairs file holds no measurements")
    else:
        raise ValueError("stages o/r need --pairs, or a preceding stage n with --q/--p")

    rotation = None
    w = None
    consensus = np.arange(y.shape[0])
    if "o" in stages:
        t0 = time.perf_counter()
        result = prune(y, x, c=c, cbar=cbar, n_phi=args.s, threads=threads)
        doc["timings_ms"]["o"] = (time.perf_counter() - t0) * 1000.0
        rotation = result.rotation
        consensus = result.consensus
        doc["consensus_size"] = result.size
    if "r" in stages:
        if consensus.size == 0:
            raise DegenerateConfigurationError("empty consensus set; nothing to refine")
        w0 = rotation_to_quat(rotation) if rotation is not None else np.array([1.0, 0, 0, 0])
        cfg = RefineConfig(
            step_size=args.gamma0, decay=args.beta, max_iter=args.iters, tol=args.tol
        )
        t0 = time.perf_counter()
        forms = residual_quadforms(y[consensus], x[consensus])
        w, history = refine(forms, w0, cfg)
        doc["timings_ms"]["r"] = (time.perf_counter() - t0) * 1000.0
        doc["iterations"] = int(history.moved.size)
        rotation = quat_to_rotation(w)
    if rotation is None:
        raise ValueError("no stage produced a rotation; include o and/or r")

    doc.update(_rotation_doc(rotation))
    doc["consensus"] = consensus.tolist()
    if candidates is not None:
        doc["consensus_pairs"] = candidates[consensus].tolist()
    _emit_json(doc, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.list:
        for name in benchmarks.preset_names():
            print(name)
        return EXIT_OK
    if not args.preset:
        raise ValueError("provide --preset NAME or --list")
    report = benchmarks.run_experiment(
        args.preset,
        trials=args.trials,
        seed=args.seed,
        threads=resolve_threads(args.threads),
        full_scale=args.full_scale,
        out_dir=args.out or ".",
        verbose=args.verbose,
    )
    print(json.dumps(report.aggregates, indent=2))
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="arcs",
        description="Rotation and correspondence search between 3D point sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate synthetic instances")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    p_srcs = gen_sub.add_parser("srcs", help="two-cloud correspondence instance")
    p_srcs.add_argument("--m", type=int, required=True)
    p_srcs.add_argument("--n", type=int, required=True)
    p_srcs.add_argument("--k", type=int, required=True)
    p_srcs.add_argument("--sigma", type=float, default=0.0)
    p_srcs.add_argument("--seed", type=int, default=0)
    p_srcs.add_argument("--out", required=True)
    p_srcs.set_defaults(func=_cmd_gen)
    p_rrs = gen_sub.add_parser("rrs", help="paired-point rotation instance")
    p_rrs.add_argument("--l", type=int, required=True)
    p_rrs.add_argument("--k", type=int, required=True)
    p_rrs.add_argument("--sigma", type=float, default=0.0)
    p_rrs.add_argument("--norm-constrained", action="store_true")
    p_rrs.add_argument("--seed", type=int, default=0)
    p_rrs.add_argument("--out", required=True)
    p_rrs.set_defaults(func=_cmd_gen)

    p_match = sub.add_parser("match", help="norm matching between two clouds")
    p_match.add_argument("--q", required=True)
    p_match.add_argument("--p", required=True)
    p_match.add_argument("--sigma", type=float)
    p_match.add_argument("--c", type=float)
    p_match.add_argument("--exact", action="store_true", help="greedy one-to-one matching")
    p_match.add_argument("--out")
    p_match.set_defaults(func=_cmd_match)

    p_prune = sub.add_parser("prune", help="consensus maximization on pairs")
    p_prune.add_argument("--pairs", required=True)
    p_prune.add_argument("--sigma", type=float)
    p_prune.add_argument("--c", type=float)
    p_prune.add_argument("--cbar", type=float)
    p_prune.add_argument("--s", type=int, default=90)
    p_prune.add_argument("--threads", type=int)
    p_prune.add_argument("--out")
    p_prune.set_defaults(func=_cmd_prune)

    p_refine = sub.add_parser("refine", help="quaternion descent on pairs")
    p_refine.add_argument("--pairs", required=True)
    p_refine.add_argument("--init", help="initial quaternion w1,w2,w3,w4")
    p_refine.add_argument("--gamma0", type=float, default=0.05)
    p_refine.add_argument("--beta", type=float, default=0.92)
    p_refine.add_argument("--iters", type=int, default=300)
    p_refine.add_argument("--tol", type=float, default=1e-10)
    p_refine.add_argument("--out")
    p_refine.set_defaults(func=_cmd_refine)

    p_pipe = sub.add_parser("pipeline", help="staged end-to-end run")
    p_pipe.add_argument("--q")
    p_pipe.add_argument("--p")
    p_pipe.add_argument("--pairs")
    p_pipe.add_argument("--stage", default="n,o,r")
    p_pipe.add_argument("--sigma", type=float)
    p_pipe.add_argument("--c", type=float)
    p_pipe.add_argument("--cbar", type=float)
    p_pipe.add_argument("--s", type=int, default=90)
    p_pipe.add_argument("--gamma0", type=float, default=0.05)
    p_pipe.add_argument("--beta", type=float, default=0.92)
    p_pipe.add_argument("--iters", type=int, default=300)
    p_pipe.add_argument("--tol", type=float, default=1e-10)
    p_pipe.add_argument("--seed", type=int, default=0)
    p_pipe.add_argument("--threads", type=int)
    p_pipe.add_argument("--out")
    p_pipe.set_defaults(func=_cmd_pipeline)

    p_bench = sub.add_parser("bench", help="run experiment presets")
    p_bench.add_argument("--preset")
    p_bench.add_argument("--list", action="store_true")
    p_bench.add_argument("--trials", type=int)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--threads", type=int)
    p_bench.add_argument("--full-scale", action="store_true")
    p_bench.add_argument("--verbose", action="store_true")
    p_bench.add_argument("--out")
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DegenerateConfigurationError as exc:
        print(f"arcs: degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ParseError as exc:
        print(f"arcs: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"arcs: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"arcs: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
