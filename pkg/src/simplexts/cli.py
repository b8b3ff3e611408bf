"""Command-line front end.

Every subcommand reads one JSON config (``--config``); relative paths inside
it are resolved against the config file's directory.  Outputs go to
``--out`` (default: the config's directory) and each run writes the fully
resolved config and seed next to its artifacts.  Set ``SIMPLEXTS_LOG`` to
one of error, warn, info or debug to control logging.

Species indices in configs are 1-based, matching parameter names such as
``A1[1,2]``.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .estimation import (
    Method,
    bootstrap_se,
    fit_convex,
    fit_dirichlet_mle,
    fit_ln_ls,
    fit_ln_qmle,
)
from .experiments import StudyConfig, run_rmse_study
from .forecast import forecast
from .ingest import load_csv, select_reference, to_compositions
from .models import check_stationarity, simulate, spec_from_dict, spec_to_dict
from .perturbation import (
    build_perturbation,
    lag_matrix,
    multistep_perturbation_ratio,
    perturbation_report,
)

log = logging.getLogger("simplexts")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Floats with 17 significant digits (exact round trip)."""
    return format(float(x), ".17g")


# -- plumbing -----------------------------------------------------------------

class Run:
    """Resolved config, seed and output directory of one invocation."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.config_path = Path(args.config).resolve()
        if not self.config_path.is_file():
            raise ConfigError(f"config file not found: {args.config}")
        try:
            self.config = json.loads(self.config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(self.config, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        self.base = self.config_path.parent
        if args.seed is not None:
            self.config["seed"] = args.seed
        self.seed = int(self.config.get("seed", self.config.get("master_seed", 0)))
        self.config["seed"] = self.seed
        self.threads = max(1, int(args.threads or self.config.get("threads", 1)))
        self.out = Path(args.out).resolve() if args.out else self.base
        self.out.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def get(self, key, default=None):
        return self.config.get(key, default)

    def require(self, key):
        if key not in self.config:
            raise ConfigError(f"config is missing required key {key!r}")
        return self.config[key]

    def record(self) -> dict:
        return {"command": self.command, "version": __version__, "seed": self.seed,
                "config_file": str(self.config_path), "config": self.config}

    @contextlib.contextmanager
    def output(self, name: str):
        """Yield a temporary path that replaces ``out/name`` only on success."""
        target = self.out / name
        fd, tmp = tempfile.mkstemp(dir=self.out, prefix=f".{name}.", suffix=".tmp")
        os.close(fd)
        try:
            yield tmp
            os.replace(tmp, target)
            self.written.append(str(target))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def write_json(self, name: str, doc: dict) -> None:
        with self.output(name) as tmp:
            Path(tmp).write_text(json.dumps(doc, indent=2, default=_json_default) + "\n", encoding="utf-8")

    def finish(self) -> None:
        self.write_json(f"{self.command}_run.json", {**self.record(), "outputs": list(self.written)})


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def load_spec(run: Run, value):
    """Spec from an inline object or a JSON file (a fit output is accepted too)."""
    if isinstance(value, str):
        path = run.path(value)
        if not path.is_file():
            raise ConfigError(f"spec file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    else:
        doc = value
    if isinstance(doc, dict) and "family" not in doc and isinstance(doc.get("spec"), dict):
        doc = doc["spec"]
    if not isinstance(doc, dict):
        raise ConfigError("spec must be an object or a path to a JSON file")
    try:
        return spec_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spec: {exc}") from None


def load_data(run: Run):
    """(times, species, compositions) from the config's data block."""
    path = run.path(run.require("data"))
    if not path.is_file():
        raise ConfigError(f"data file not found: {path}")
    table = load_csv(path, run.get("time_column", "t"), run.get("species_columns"))
    if run.get("reference"):
        table = select_reference(table, run.get("reference"))
    y = to_compositions(table, run.get("zero_strategy", "reject"), run.get("epsilon", 0.5))
    return table.times, list(table.species), y


def _time_label(t):
    return t.isoformat() if hasattr(t, "isoformat") else t


# -- commands -----------------------------------------------------------------

def cmd_simulate(run: Run) -> None:
    spec = load_spec(run, run.require("spec"))
    n = int(run.require("n"))
    y = simulate(spec, n, int(run.get("burn_in", 1000)), np.random.default_rng(run.seed),
                 run.get("init_composition"))
    names = run.get("species") or [f"y{k + 1}" for k in range(spec.d)]
    if len(names) != spec.d:
        raise ConfigError(f"species lists {len(names)} names for d={spec.d}")
    with run.output(run.get("output", "simulated.csv")) as tmp:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *names])
            for t, row in enumerate(y, start=1):
                w.writerow([t, *map(fmt, row)])


def _fit(method: Method, y, kind: str, p: int, fixed, refine: bool = False):
    if method is Method.CONVEX:
        return fit_convex(y, p, fixed=fixed)
    if method is Method.DIRICHLET_MLE:
        return fit_dirichlet_mle(y, kind, p, fixed=fixed)
    if method is Method.LN_LS:
        return fit_ln_ls(y, p)
    return fit_ln_qmle(y, kind, p, fixed=fixed, refine=refine)


def cmd_fit(run: Run) -> None:
    times, species, y = load_data(run)
    family = run.get("family", "dirichlet")
    kind = run.get("kind", "finite")
    p = int(run.get("p", 1))
    default = Method.DIRICHLET_MLE if family == "dirichlet" else Method.LN_QMLE
    method = Method(run.get("method", default.value))
    if method in (Method.CONVEX, Method.LN_LS) and kind != "finite":
        raise ConfigError(f"method {method.value} needs kind 'finite'")
    fixed = run.get("fixed")
    pipeline = {
        Method.CONVEX: ["convex"], Method.DIRICHLET_MLE: ["convex", "dirichlet_mle"],
        Method.LN_LS: ["ln_ls"], Method.LN_QMLE: ["ln_ls", "ln_qmle"],
    }[method]
    fit = _fit(method, y, kind, p, fixed, bool(run.get("refine", False)))
    doc = {
        "run": run.record(),
        "method": fit.method.value, "pipeline": pipeline, "species": species,
        "n_observations": int(y.shape[0]),
        "first_time": _time_label(times[0]), "last_time": _time_label(times[-1]),
        "converged": fit.converged, "objective": fit.objective, "iterations": fit.iterations,
        "gradient_norm": fit.gradient_norm, "message": fit.message,
        "n_params": fit.n_params, "params": fit.params, "se": None,
        "spec": spec_to_dict(fit.spec) if fit.spec is not None else None,
    }
    if fit.spec is not None:
        st = check_stationarity(fit.spec)
        doc["stationarity"] = {"satisfied": st.satisfied, "rho_B": st.rho_B, "abs_b": st.abs_b}
    reps = int(run.get("bootstrap_reps", 0))
    if reps:
        if fit.spec is None:
            raise ConfigError("bootstrap needs a full model fit (not the convex mean block)")
        boot = bootstrap_se(fit.spec, y.shape[0], reps, run.seed, method, fixed,
                            burn_in=int(run.get("burn_in", 1000)), workers=run.threads)
        doc["se"] = boot.as_dict()
        doc["bootstrap"] = {"reps": reps, "failed": boot.n_failed}
    run.write_json(run.get("output", "fit.json"), doc)
    if not fit.converged:
        log.warning("optimizer did not converge: %s", fit.message)


def cmd_forecast(run: Run) -> None:
    spec = load_spec(run, run.require("spec"))
    times, species, y = load_data(run)
    n_hist = int(run.get("history_length", y.shape[0]))
    if not 1 <= n_hist <= y.shape[0]:
        raise ConfigError(f"history_length must lie in [1, {y.shape[0]}]")
    horizon = int(run.get("horizon", 8))
    res = forecast(spec, y[:n_hist], horizon, int(run.get("reps", 10000)), float(run.get("alpha", 0.05)),
                   rng=run.seed, workers=run.threads)
    actual = y[n_hist: n_hist + horizon] if n_hist < y.shape[0] else None
    stem = run.get("output", "forecast")
    with run.output(f"{stem}.csv") as tmp:
        res.write_csv(tmp, actual, species)
    doc = {"run": run.record(), "species": species,
           "history_end": _time_label(times[n_hist - 1]), **res.to_dict(),
           "real": None if actual is None else actual.tolist()}
    run.write_json(f"{stem}.json", doc)


def cmd_perturb(run: Run) -> None:
    spec = None
    if "A1" in run.config:
        A = np.atleast_2d(np.asarray(run.config["A1"], dtype=float))
    else:
        spec = load_spec(run, run.require("spec"))
        A = lag_matrix(spec, int(run.get("lag", 1)))
    i, j = int(run.require("i")) - 1, int(run.require("j")) - 1
    for name, idx in (("i", i), ("j", j)):
        if not 0 <= idx < A.shape[0]:
            raise ConfigError(f"{name}={idx + 1} is out of range [1, {A.shape[0]}] "
                              "(the reference species cannot be perturbed against)")
    p = float(run.get("p", 0.1))
    grid = int(run.get("grid", 101))
    report = perturbation_report(A, i, j, p)
    stem = run.get("output", "perturb")
    with run.output(f"{stem}_sweep.csv") as tmp:
        report.write_sweep_csv(tmp, grid)
    doc = {"run": run.record(), "i": i + 1, "j": j + 1, "slope": report.slope,
           "intercept": report.intercept, "equilibrium_c": report.equilibrium_c, "p": p,
           "status": report.status}
    ms = run.get("multistep")
    if ms:
        if spec is None:
            raise ConfigError("the multistep ratio needs a full spec, not just A1")
        _, _, y = load_data(run)
        gamma = build_perturbation(spec.d, i, j, float(ms.get("c", 0.5)), p)
        r = multistep_perturbation_ratio(spec, y, int(ms.get("k", 1)), gamma, int(ms.get("ell", 2)),
                                         i, j, int(ms.get("reps", 10000)), rng=run.seed)
        doc["multistep"] = {"ratio": r.ratio, "se": r.se, "reps": r.reps, "ell": r.ell,
                            "k": int(ms.get("k", 1)), "c": float(ms.get("c", 0.5))}
    run.write_json(f"{stem}.json", doc)


def cmd_study(run: Run) -> None:
    doc = {k: v for k, v in run.config.items() if k not in ("seed", "output", "threads")}
    doc["master_seed"] = run.seed
    doc["true_spec"] = spec_to_dict(load_spec(run, run.require("true_spec")))
    try:
        config = StudyConfig.from_dict(doc)
    except TypeError as exc:
        raise ConfigError(f"invalid study config: {exc}") from None
    result = run_rmse_study(config, workers=run.threads)
    stem = run.get("output", "study")
    with run.output(f"{stem}.csv") as tmp:
        result.write_csv(tmp)
    run.write_json(f"{stem}.json", {"run": run.record(), **result.to_dict()})


COMMANDS = {
    "simulate": (cmd_simulate, "simulate a series from a model spec"),
    "fit": (cmd_fit, "fit a model to an abundance table"),
    "forecast": (cmd_forecast, "Monte Carlo forecast with prediction bands"),
    "perturb": (cmd_perturb, "perturbation line, equilibrium point and c-grid sweep"),
    "study": (cmd_study, "replicated RMSE simulation study"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplexts", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override the config's seed")
        sp.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        sp.add_argument("--out", default=None, help="output directory (default: next to the config)")
    return parser


def _setup_logging():
    level = os.environ.get("SIMPLEXTS_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        run = Run(args.command, args)
        COMMANDS[args.command][0](run)
        run.finish()
    except (ValueError, RuntimeError, LookupError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
