"""Command-line driver.

    weakloop run --algo weak --rho 1e-6 --kappa auto --trials 10000 --seed 42
    weakloop figure 3 --rho 0.01
    weakloop verify --rho 1e-4

Exit codes: 0 ok, 1 a verified bound failed, 2 bad input, 3 a trial was capped.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import figures, verify
from .errors import CappedRunError, WeakLoopError
from .geometry import ProblemParams, kappa_upper_bound
from .montecarlo import SampleSet, monte_carlo
from .runners import RunConfig
from .statevector import MarkedOracle, Preparation

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAPPED = 0, 1, 2, 3


class InputError(WeakLoopError):
    pass


@dataclass
class ExperimentSpec:
    """Fully resolved command-line request. ``threads`` is excluded from
    :meth:`to_dict` because results do not depend on it."""

    command: str
    rho: float
    kappa: float
    kappa_arg: str
    trials: int
    seed: int
    backend: str = "angle"
    algo: str = "weak"
    n: int | None = None
    marked: list = field(default_factory=list)
    max_iterations: int | None = None
    fmt: str = "csv"
    strict: bool = False
    which: int | None = None
    threads: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        return d

    def params(self) -> ProblemParams:
        return ProblemParams(self.rho, self.kappa)

    def run_config(self) -> RunConfig:
        params = self.params()
        if self.backend == "statevector":
            oracle = MarkedOracle(self.n, frozenset(self.marked))
            return RunConfig(params, "statevector", self.max_iterations, self.seed,
                             oracle, Preparation.uniform(self.n))
        return RunConfig(params, "angle", self.max_iterations, self.seed)


def _parse_marked(text: str) -> list:
    try:
        return sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --marked list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rho", type=float, default=None)
    common.add_argument("--kappa", default="auto", help="a value in [0, 1] or 'auto' (= sqrt(rho))")
    common.add_argument("--trials", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--backend", choices=["angle", "statevector"], default="angle")
    common.add_argument("--n", type=int, default=None, help="search-space size (statevector)")
    common.add_argument("--marked", type=_parse_marked, default=None,
                        help="comma-separated marked indices (statevector)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--max-iterations", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--strict", action="store_true",
                        help="reject kappa = 0 and kappa outside the efficient regime")

    parser = argparse.ArgumentParser(prog="weakloop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="Monte Carlo batch of one algorithm")
    p_run.add_argument("--algo", choices=["weak", "test-restart", "standard"], default="weak")
    p_fig = sub.add_parser("figure", parents=[common], help="data for figure 2, 3 or 4")
    p_fig.add_argument("which", type=int, choices=[2, 3, 4])
    sub.add_parser("verify", parents=[common], help="check the proven bounds numerically")
    return parser


def resolve(args) -> ExperimentSpec:
    rho = args.rho
    marked = args.marked or []
    if args.backend == "statevector":
        if args.n is None or not marked:
            raise InputError("statevector backend needs --n and --marked")
        implied = len(marked) / args.n
        if rho is None:
            rho = implied
        elif not math.isclose(rho, implied, rel_tol=1e-12):
            raise InputError(f"--rho {rho} disagrees with |marked|/n = {implied}")
    if rho is None:
        raise InputError("--rho is required")
    if not 0 < rho <= 1:
        raise InputError(f"--rho must lie in (0, 1], got {rho}")
    if args.kappa == "auto":
        kappa = math.sqrt(rho)
    else:
        try:
            kappa = float(args.kappa)
        except ValueError:
            raise InputError(f"--kappa must be a number or 'auto', got {args.kappa!r}")
    if not 0 <= kappa <= 1:
        raise InputError(f"--kappa must lie in [0, 1], got {kappa}")
    if args.kappa == "auto" and kappa > kappa_upper_bound(rho):
        raise InputError("kappa=auto falls outside the efficient regime")
    if args.strict and (kappa == 0 or kappa > kappa_upper_bound(rho)):
        raise InputError(f"--strict: kappa={kappa} is zero or outside the efficient regime")
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    algo = getattr(args, "algo", "weak").replace("-", "_")
    return ExperimentSpec(args.command, rho, kappa, str(args.kappa), args.trials, args.seed,
                          args.backend, algo, args.n, marked, args.max_iterations, args.fmt,
                          args.strict, getattr(args, "which", None), args.threads)


# -- output helpers --

def _header_lines(doc: dict) -> list[str]:
    return [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in doc.items()]


def _csv_text(header: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("\n".join(_header_lines(header)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def _json_text(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _sample_doc(spec: ExperimentSpec, samples: SampleSet) -> dict:
    return {"spec": spec.to_dict(), **samples.to_json_dict(), "summary": samples.summary()}


def _emit_samples(spec: ExperimentSpec, samples: SampleSet, out) -> None:
    doc = _sample_doc(spec, samples)
    if spec.fmt == "json":
        _emit(_json_text(doc), out)
    else:
        header = {"spec": doc["spec"], "meta": doc["meta"], "summary": doc["summary"]}
        _emit(_csv_text(header, ["iterations"], ([int(v)] for v in samples.values)), out)


# -- commands --

def cmd_run(spec: ExperimentSpec, out=None) -> int:
    cfg = spec.run_config()
    samples = monte_carlo(spec.algo, cfg, spec.trials, spec.threads, on_cap="record")
    _emit_samples(spec, samples, out)
    if samples.meta.successes < spec.trials:
        print(f"warning: {spec.trials - samples.meta.successes} trial(s) hit the iteration cap "
              f"or ended unmarked", file=sys.stderr)
        return EXIT_CAPPED
    return EXIT_OK


def _fig_path(out, name: str) -> Path:
    base = Path(out or ".")
    return base / name


def cmd_figure(spec: ExperimentSpec, out=None) -> int:
    params = spec.params()
    hdr = {"spec": spec.to_dict()}
    if spec.which == 2:
        samples, rows = figures.figure2(params, spec.trials, spec.seed, spec.threads)
        hdr["summary"] = samples.summary()
        text = _csv_text(hdr, ["bin_start", "bin_end", "count"], rows)
        _fig_path(out, "fig2_histogram.csv").parent.mkdir(parents=True, exist_ok=True)
        _fig_path(out, "fig2_histogram.csv").write_text(text)
    elif spec.which == 3:
        rows, rep = figures.figure3(params)
        hdr["segments"] = {"L_max": rep.L_max, "ell_min": rep.ell_min, "gamma": rep.gamma,
                           "runs": [list(r) for r in rep.runs]}
        text = _csv_text(hdr, ["n", "angle", "unwrapped", "active", "lower_bound", "upper_bound"],
                         ([r.n, r.angle, r.unwrapped, int(r.active), r.lower, r.upper] for r in rows))
        path = _fig_path(out, "fig3_angles.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        res = figures.figure4(params, spec.trials, spec.seed, spec.threads)
        base = _fig_path(out, "")
        base.mkdir(parents=True, exist_ok=True)
        for name, s in (("weak", res.weak), ("test_restart", res.test_restart)):
            h = {"spec": spec.to_dict(), "meta": s.meta.to_dict(), "summary": s.summary()}
            (base / f"fig4_ecdf_{name}.csv").write_text(
                _csv_text(h, ["iterations", "ecdf"], figures.ecdf_rows(s)))
        doc = {"spec": spec.to_dict(), "ks": res.ks.to_dict(), "ad": res.ad.to_dict(),
               "median_gap": figures.median_gap(res.weak, res.test_restart),
               "summary": {"weak": res.weak.summary(), "test_restart": res.test_restart.summary()}}
        (base / "fig4_tests.json").write_text(_json_text(doc))
        print(f"KS D={res.ks.statistic:.4f} p={res.ks.p_value:.3g} reject={res.ks.reject_at_1pct}")
        print(f"AD T={res.ad.statistic:.4f} p={res.ad.p_value:.3g} reject={res.ad.reject_at_1pct}")
    return EXIT_OK


def cmd_verify(spec: ExperimentSpec, out=None) -> int:
    params = spec.params()
    checks = verify.run_all(params, seed=spec.seed)
    print(verify.summary_header(params))
    for c in checks:
        print(c.line())
    if out:
        doc = {"spec": spec.to_dict(),
               "checks": [{"name": c.name, "passed": c.passed, "skipped": c.skipped,
                           "margin": c.margin, "witness": c.witness} for c in checks]}
        _emit(_json_text(doc), out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {"run": cmd_run, "figure": cmd_figure, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = resolve(args)
        return COMMANDS[spec.command](spec, args.out)
    except CappedRunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPPED
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
