"""Command-line driver: ``streamcut <command> ...``.

Exit codes: 0 success, 2 usage, 3 input validation, 4 model violation
(a distance query on an unseen ID).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .adversary import adversary_demo
from .cut import EXACT_THRESHOLD, exact_maxcut_matrix
from .errors import QueryOnUnseenId, StreamcutError
from .estimator import EstimatorConfig, InsertionEstimator
from .metric import DistanceOracle, MetricConfig, aspect_ratio, load_metric, verify_metric
from .streams import generate, parse_stream
from .window import SlidingWindowEstimator

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_MODEL = 0, 2, 3, 4


@dataclass
class RunRecord:
    timestamp: int
    estimate: float
    exact: Optional[float] = None
    ratio: Optional[float] = None
    mode: str = ""
    epsilon: Optional[float] = None
    samples: Optional[int] = None
    replicas: Optional[int] = None
    seed: Optional[int] = None
    instance_count: Optional[int] = None
    coreset_size: Optional[int] = None
    wall_time: Optional[float] = None

    def __post_init__(self):
        if self.exact is not None and self.ratio is None:
            self.ratio = ratio(self.estimate, self.exact)


def ratio(a: float, b: float) -> Optional[float]:
    if a > 0 and b > 0:
        return max(a, b) / min(a, b)
    if a == 0 and b == 0:
        return 1.0
    return None


def _input_error(msg):
    raise StreamcutError(msg)


def _insert_ids(events) -> list:
    ids = []
    for ev in events:
        if not ev.is_insert:
            _input_error(f"event {ev.timestamp}: deletions are not supported by this command")
        ids.append(ev.point)
    return ids


def _delta(args, oracle: DistanceOracle) -> float:
    if args.delta is not None:
        return args.delta
    ids = oracle.known_ids()
    if len(ids) > 5000:
        _input_error("pass --delta for metrics with more than 5000 points")
    prev = oracle.enforce
    oracle.enforce = False
    try:
        return max(aspect_ratio(oracle.matrix(ids)), 1.0)
    finally:
        oracle.enforce = prev


def _config(args, oracle, n_events: int, **over) -> EstimatorConfig:
    solver = {"exact": "exact", "local": "local", None: "auto"}[args.solver]
    kw = dict(epsilon=args.epsilon, delta_max=_delta(args, oracle),
              capacity=args.capacity or max(n_events, 1), samples=args.samples,
              replicas=args.replicas, solver=solver, coreset=args.coreset, seed=args.seed)
    kw.update(over)
    return EstimatorConfig(**kw)


def _exact_of(oracle, ids) -> Optional[float]:
    if len(ids) > EXACT_THRESHOLD:
        return None
    return exact_maxcut_matrix(oracle.matrix(list(ids))).value


def _emit(records: list, args, meta: dict) -> None:
    fmt = args.format
    cols = [f.name for f in fields(RunRecord)]
    if not args.timing:
        cols.remove("wall_time")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for rec in records:
            row = asdict(rec)
            writer.writerow(["" if row[c] is None else row[c] for c in cols])
        text = buf.getvalue()
    else:
        rows = [{c: asdict(r)[c] for c in cols} for r in records]
        text = json.dumps({**meta, "records": rows}, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands


def cmd_gen(args) -> int:
    params = {}
    for item in args.param:
        if "=" not in item:
            _input_error(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[k] = v
    inst = generate(args.kind, params, args.seed)
    paths = inst.write(args.out or args.kind)
    sys.stdout.write(json.dumps({"paths": paths, "truth": inst.truth}, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_exact(args) -> int:
    oracle = load_metric(args.metric)
    if args.stream:
        live: dict = {}
        for ev in parse_stream(args.stream):
            if ev.is_insert:
                live[ev.point] = True
            else:
                del live[ev.point]
        ids = list(live)
    else:
        ids = oracle.known_ids()
    oracle.observe_all(ids)
    if len(ids) > EXACT_THRESHOLD:
        _input_error(f"{len(ids)} points exceed the exact threshold {EXACT_THRESHOLD}")
    value = exact_maxcut_matrix(oracle.matrix(ids)).value
    sys.stdout.write(f"{value:g}\n")
    return EXIT_OK


def cmd_verify_metric(args) -> int:
    oracle = load_metric(args.metric)
    ids = oracle.known_ids()
    oracle.observe_all(ids)
    if args.delta is not None:
        oracle.config = MetricConfig(args.delta)
    report = verify_metric(oracle, ids, max_points=args.max_points)
    out = {"valid": report.valid, "reason": report.reason,
           "violation": list(report.violation) if report.violation else None,
           "points": len(ids)}
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
    return EXIT_OK if report.valid else EXIT_INPUT


def _run_insertion(args, oracle, ids, cfg) -> RunRecord:
    t0 = time.perf_counter()
    est = InsertionEstimator(cfg)
    for pid in ids:
        oracle.observe(pid)
        est.ingest(pid, oracle)
    res = est.finalize(oracle)
    exact = _exact_of(oracle, ids) if args.exact else None
    return RunRecord(len(ids), res.value, exact, mode=res.solver_mode, epsilon=cfg.epsilon,
                     samples=cfg.m, replicas=cfg.replicas, seed=cfg.seed,
                     coreset_size=res.telemetry["coreset_size"],
                     wall_time=time.perf_counter() - t0)


def cmd_run_insertion(args) -> int:
    oracle = load_metric(args.metric)
    ids = _insert_ids(parse_stream(args.stream))
    cfg = _config(args, oracle, len(ids))
    rec = _run_insertion(args, oracle, ids, cfg)
    _emit([rec], args, {"command": "run-insertion", "config": cfg.as_dict()})
    return EXIT_OK


def cmd_run_window(args) -> int:
    if args.window is None:
        _input_error("--window is required")
    oracle = load_metric(args.metric)
    ids = _insert_ids(parse_stream(args.stream))
    cfg = _config(args, oracle, len(ids))
    sw = SlidingWindowEstimator(cfg, args.window, capacity=args.capacity)
    records = []
    for pid in ids:
        t0 = time.perf_counter()
        oracle.observe(pid)
        sw.ingest(pid, oracle)
        value = sw.report(oracle)
        tele = sw.telemetry()
        exact = None
        if args.exact:
            exact = _exact_of(oracle, ids[max(0, sw.t - args.window):sw.t])
        records.append(RunRecord(sw.t, value, exact, mode="window", epsilon=cfg.epsilon,
                                 samples=cfg.m, replicas=cfg.replicas, seed=cfg.seed,
                                 instance_count=tele["instance_count"],
                                 coreset_size=tele["coreset_size"],
                                 wall_time=time.perf_counter() - t0))
    meta = {"command": "run-window", "window": args.window, "config": asdict(sw.base),
            "instance_bound": sw.bound}
    _emit(records, args, meta)
    return EXIT_OK


def cmd_bench(args) -> int:
    oracle = load_metric(args.metric)
    ids = _insert_ids(parse_stream(args.stream))
    exact = None
    records = []
    for eps in args.epsilons:
        for m in args.sample_counts or [None]:
            for r in args.replica_counts:
                oracle.reset_seen()
                cfg = _config(args, oracle, len(ids), epsilon=eps, samples=m, replicas=r)
                est = InsertionEstimator(cfg)
                t0 = time.perf_counter()
                for t, pid in enumerate(ids, 1):
                    oracle.observe(pid)
                    est.ingest(pid, oracle)
                    if t == len(ids) or (args.every and t % args.every == 0):
                        res = est.finalize(oracle)
                        if args.exact:
                            exact = _exact_of(oracle, ids[:t])
                        records.append(RunRecord(
                            t, res.value, exact, mode=res.solver_mode, epsilon=eps,
                            samples=cfg.m, replicas=r, seed=cfg.seed,
                            coreset_size=res.telemetry["coreset_size"],
                            wall_time=time.perf_counter() - t0))
    _emit(records, args, {"command": "bench"})
    return EXIT_OK


def cmd_adversary_demo(args) -> int:
    cfg = None
    if args.samples is not None:
        d = float(args.n ** 2 if args.delta is None else args.delta)
        cfg = EstimatorConfig(epsilon=args.epsilon, delta_max=d, capacity=args.n,
                              samples=args.samples, replicas=args.replicas, seed=args.seed)
    out = adversary_demo(args.n, args.delta, args.seed, cfg)
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser


def _common(p, window=False):
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=None,
                   help="aspect-ratio bound (default: computed from the metric file)")
    p.add_argument("--capacity", type=int, default=None,
                   help="stream-length bound N (default: number of insertions)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=["exact", "local"], default=None)
    p.add_argument("--coreset", choices=["merge_reduce", "exact"], default="merge_reduce")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None)
    p.add_argument("--exact", action="store_true", help="also compute brute-force ground truth")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in records")
    if window:
        p.add_argument("--window", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamcut",
                                     description="Streaming metric Max-Cut estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a metric, stream and truth sidecar")
    p.add_argument("kind", choices=["uniform_line", "clusters", "euclidean_cube", "adversarial"])
    p.add_argument("param", nargs="*", help="key=value generator parameters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path prefix")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exact", help="brute-force Max-Cut of a point file")
    p.add_argument("metric")
    p.add_argument("--stream", default=None, help="restrict to the IDs live at the end")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify-metric", help="exhaustively check the metric axioms")
    p.add_argument("metric")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--max-points", type=int, default=256)
    p.set_defaults(func=cmd_verify_metric)

    p = sub.add_parser("run-insertion", help="insertion-only estimate over a stream")
    p.add_argument("metric")
    p.add_argument("stream")
    _common(p)
    p.set_defaults(func=cmd_run_insertion)

    p = sub.add_parser("run-window", help="sliding-window estimate after every event")
    p.add_argument("metric")
    p.add_argument("stream")
    _common(p, window=True)
    p.set_defaults(func=cmd_run_window)

    p = sub.add_parser("bench", help="sweep epsilon, samples and replicas; emit records")
    p.add_argument("metric")
    p.add_argument("stream")
    _common(p)
    p.add_argument("--epsilons", type=float, nargs="+", default=[0.1, 0.25])
    p.add_argument("--sample-counts", type=int, nargs="+", default=None)
    p.add_argument("--replica-counts", type=int, nargs="+", default=[1])
    p.add_argument("--every", type=int, default=0, help="also report every k events")
    p.set_defaults(func=cmd_bench, format="csv")

    p = sub.add_parser("adversary-demo", help="run the hard dynamic instance for both K")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--replicas", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_adversary_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except QueryOnUnseenId as exc:
        sys.stderr.write(f"model violation: {exc}\n")
        return EXIT_MODEL
    except (StreamcutError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
