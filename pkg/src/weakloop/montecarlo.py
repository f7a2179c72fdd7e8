"""Batches of independent trials and their on-disk form.

Trial ``i`` of a batch seeded with ``s`` always draws from
``trial_rng(s, i)``, so a batch gives the same samples whether it runs in
one process or is split across workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CappedRunError, DomainError
from .geometry import ProblemParams
from .runners import RunConfig, get_runner, trial_rng
from .stats import summarize


@dataclass(frozen=True)
class SampleMeta:
    algorithm: str
    params: ProblemParams
    trials: int
    seed: int
    backend: str = "angle"
    successes: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": self.params.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "backend": self.backend,
            "successes": self.successes,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampleMeta":
        return cls(d["algorithm"], ProblemParams.from_dict(d["params"]), int(d["trials"]),
                   int(d["seed"]), d.get("backend", "angle"), d.get("successes"),
                   dict(d.get("extra") or {}))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sorted iteration counts from ``meta.trials`` trials."""

    values: np.ndarray
    meta: SampleMeta

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.int64))
        if v.size != self.meta.trials:
            raise DomainError(f"{v.size} values for {self.meta.trials} trials")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self.values, other.values) and self.meta == other.meta

    def summary(self) -> dict:
        return summarize(self.values)

    def to_json_dict(self) -> dict:
        return {"meta": self.meta.to_dict(), "samples": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampleSet":
        return cls(np.asarray(d["samples"], dtype=np.int64), SampleMeta.from_dict(d["meta"]))


def write_csv(samples: SampleSet, path, header: dict | None = None) -> None:
    """``#`` metadata lines (``key: <json>``), a column header, one count per line."""
    lines = ["# weakloop sample set"]
    for key, val in {**(header or {}), **samples.meta.to_dict()}.items():
        lines.append(f"# {key}: {json.dumps(val, sort_keys=True)}")
    lines.append("iterations")
    lines.extend(str(int(v)) for v in samples.values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> SampleSet:
    """Read a sample file from :func:`write_csv` or from ``weakloop run``."""
    meta, values = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition(": ")
            if sep:
                meta[key] = json.loads(val)
        elif line.strip() and line.strip() != "iterations":
            values.append(int(line))
    # the CLI nests the sample metadata under a "meta" header line
    meta = meta.get("meta", meta)
    return SampleSet(np.asarray(values, dtype=np.int64), SampleMeta.from_dict(meta))


def write_json(samples: SampleSet, path, extra: dict | None = None) -> None:
    doc = {**(extra or {}), **samples.to_json_dict()}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_json(path) -> SampleSet:
    return SampleSet.from_json_dict(json.loads(Path(path).read_text()))


def _run_chunk(algorithm: str, config: RunConfig, lo: int, hi: int, on_cap: str = "raise"):
    runner = get_runner(algorithm)
    its = np.empty(hi - lo, dtype=np.int64)
    ok = 0
    for i in range(lo, hi):
        try:
            rec = runner(config, rng=trial_rng(config.seed, i))
        except CappedRunError as exc:
            if on_cap == "raise":
                exc.trial = i
                raise
            rec = exc.record
        its[i - lo] = rec.iterations
        ok += rec.success
    return its, ok


def monte_carlo(algorithm: str, config: RunConfig, trials: int, threads: int = 1,
                on_cap: str = "raise") -> SampleSet:
    """Run ``trials`` independent trials and collect their iteration counts.

    ``threads > 1`` spreads contiguous trial ranges over worker processes;
    the result does not depend on the worker count. With ``on_cap="record"``
    a capped trial contributes its cap as the count and is left out of
    ``meta.successes`` instead of aborting the batch.
    """
    if on_cap not in ("raise", "record"):
        raise DomainError(f"on_cap must be 'raise' or 'record', got {on_cap!r}")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    get_runner(algorithm)
    algorithm = algorithm.replace("-", "_")
    if threads <= 1 or trials < 2:
        parts = [_run_chunk(algorithm, config, 0, trials, on_cap)]
    else:
        bounds = np.linspace(0, trials, min(threads * 4, trials) + 1).astype(int)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_run_chunk, algorithm, config, int(a), int(b), on_cap)
                    for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            parts = [f.result() for f in futs]
    values = np.concatenate([p[0] for p in parts])
    successes = int(sum(p[1] for p in parts))
    extra = {}
    if config.backend == "statevector":
        extra = {"n": config.oracle.n, "marked": sorted(config.oracle.marked)}
    meta = SampleMeta(algorithm, config.params, trials, config.seed, config.backend,
                      successes, extra)
    return SampleSet(values, meta)
