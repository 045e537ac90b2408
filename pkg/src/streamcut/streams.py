"""Stream files and synthetic instance generators.

A stream file holds one event per line, ``+ <id>`` for an insertion and
``- <id>`` for a deletion.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError, StreamFormatError
from .metric import format_adversarial, format_euclidean

INSERT, DELETE = "+", "-"


@dataclass(frozen=True)
class StreamEvent:
    kind: str
    point: int
    timestamp: int

    @property
    def is_insert(self) -> bool:
        return self.kind == INSERT


def parse_stream_text(text: str) -> list:
    events = []
    live = set()
    ts = 0
    for no, line in enumerate(text.splitlines(), 1):
        toks = line.split()
        if not toks or toks[0].startswith("#"):
            continue
        if len(toks) != 2 or toks[0] not in (INSERT, DELETE):
            raise StreamFormatError(f"expected '+ <id>' or '- <id>', got {line.strip()!r}", no)
        try:
            pid = int(toks[1])
        except ValueError:
            raise StreamFormatError(f"point id {toks[1]!r} is not an integer", no) from None
        if toks[0] == INSERT:
            if pid in live:
                raise StreamFormatError(f"id {pid} inserted twice while live", no)
            live.add(pid)
        else:
            if pid not in live:
                raise StreamFormatError(f"delete of id {pid} before its insertion", no)
            live.remove(pid)
        ts += 1
        events.append(StreamEvent(toks[0], pid, ts))
    return events


def parse_stream(path) -> list:
    return parse_stream_text(Path(path).read_text())


def format_stream(events: Iterable[StreamEvent]) -> str:
    return "".join(f"{ev.kind} {ev.point}\n" for ev in events)


def inserts(pids: Iterable[int]) -> list:
    return [StreamEvent(INSERT, int(p), t) for t, p in enumerate(pids, 1)]


@dataclass
class GeneratedInstance:
    kind: str
    metric_text: str
    events: list
    truth: dict

    @property
    def stream_text(self) -> str:
        return format_stream(self.events)

    def write(self, prefix) -> dict:
        prefix = str(prefix)
        paths = {"metric": prefix + ".metric", "stream": prefix + ".stream",
                 "truth": prefix + ".truth.json"}
        Path(paths["metric"]).write_text(self.metric_text)
        Path(paths["stream"]).write_text(self.stream_text)
        Path(paths["truth"]).write_text(json.dumps(self.truth, indent=2, sort_keys=True) + "\n")
        return paths


def _require(params: dict, name: str, kind=int, low=None):
    if name not in params:
        raise ConfigError(f"missing parameter {name!r}")
    try:
        val = kind(params[name])
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {name!r} must be {kind.__name__}") from None
    if low is not None and val < low:
        raise ConfigError(f"parameter {name!r} must be >= {low}")
    return val


def generate(kind: str, params: dict, seed: int = 0) -> GeneratedInstance:
    """Generate a metric, an insertion stream and a truth record.

    kinds and parameters:

    * ``uniform_line``: ``n``, ``span`` - integer points uniform in [0, span].
    * ``clusters``: ``centers``, ``size``, ``separation`` - ``size`` coincident
      points at each of ``centers`` positions spaced ``separation`` apart on a
      line, streamed in random order.
    * ``euclidean_cube``: ``n``, ``dim``, ``side`` - integer grid points.
    * ``adversarial``: ``n``, ``Delta``, ``K`` - the hard dynamic instance.
    """
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0x6E7])
    if kind == "uniform_line":
        n = _require(params, "n", low=1)
        span = _require(params, "span", low=1)
        x = rng.integers(0, span + 1, size=n).astype(float)
        ids = list(range(n))
        truth = {"kind": kind, "n": n, "delta": float(span), "seed": seed, "maxcut": None}
        return GeneratedInstance(kind, format_euclidean(ids, x), inserts(ids), truth)
    if kind == "clusters":
        k = _require(params, "centers", low=1)
        size = _require(params, "size", low=1)
        sep = _require(params, "separation", float, low=1.0)
        x = np.repeat(np.arange(k) * sep, size)
        ids = list(range(k * size))
        order = [ids[i] for i in rng.permutation(len(ids))]
        # coincident clusters on a line: the best cut splits the centres into
        # a prefix and a suffix; only k = 2 is recorded in closed form
        truth = {"kind": kind, "centers": k, "size": size, "separation": sep,
                 "delta": float(sep * max(k - 1, 1)), "seed": seed,
                 "maxcut": float(size * size * sep) if k == 2 else None}
        return GeneratedInstance(kind, format_euclidean(ids, x), inserts(order), truth)
    if kind == "euclidean_cube":
        n = _require(params, "n", low=1)
        dim = _require(params, "dim", low=1)
        side = _require(params, "side", low=1)
        X = rng.integers(0, side + 1, size=(n, dim)).astype(float)
        ids = list(range(n))
        truth = {"kind": kind, "n": n, "dim": dim, "delta": float(side * np.sqrt(dim)),
                 "seed": seed, "maxcut": None}
        return GeneratedInstance(kind, format_euclidean(ids, X), inserts(ids), truth)
    if kind == "adversarial":
        from .adversary import hard_instance, hard_instance_gap

        n = _require(params, "n", low=8)
        delta = float(params.get("Delta", n ** 2))
        K = float(params.get("K", delta))
        inst, _, events = hard_instance(n, delta, K, seed)
        truth = {"kind": kind, "n": n, "delta": delta, "K": K, "seed": seed,
                 "i_star": inst.i_star, "j_star": inst.j_star, "maxcut": None}
        if inst.cols <= 22:
            truth["maxcut"] = hard_instance_gap(inst)[2]
        return GeneratedInstance(kind, format_adversarial(n, delta, K, seed), events, truth)
    raise ConfigError(f"unknown generator kind {kind!r}")


def load_truth(path) -> Optional[dict]:
    p = Path(path)
    return json.loads(p.read_text()) if p.exists() else None
