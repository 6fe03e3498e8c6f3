"""Scenario runner: ``rydberg-dqc1 run config.json`` / ``rydberg-dqc1 preset NAME``.

Exit codes: 0 success, 2 unparseable config or unknown name, 3 invariant
violation in the inputs, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy.stats import unitary_group

from . import atomsim, ctrl_lift, discord, dqc1, ensemble, shots
from .atomsim import PhysParams

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_NUMERIC = 0, 2, 3, 4

PRESETS: dict[str, PhysParams] = {"paper-sec3": atomsim.PAPER_SEC3}

SCENARIOS = ("fig3", "fig4", "shots", "discord", "xa", "ising")


class ConfigError(Exception):
    pass


class InvariantError(Exception):
    pass


class NumericError(Exception):
    pass


def preset(name: str) -> PhysParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


def _grid(spec: Any, what: str) -> np.ndarray:
    if isinstance(spec, list):
        grid = np.asarray(spec, dtype=float)
    elif isinstance(spec, dict):
        try:
            start, stop, count = float(spec["start"]), float(spec["stop"]), int(spec["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{what} needs numeric start/stop/count: {exc}") from None
        grid = np.linspace(start, stop, count)
    else:
        raise ConfigError(f"{what} must be a list or a {{start, stop, count}} object")
    if grid.size == 0:
        raise InvariantError(f"{what} is empty")
    if np.any(np.diff(grid) <= 0):
        raise InvariantError(f"{what} must be strictly ascending")
    return grid


@dataclass
class ScenarioConfig:
    scenario: str
    params: PhysParams = atomsim.PAPER_SEC3
    n_list: tuple[int, ...] = (1, 2, 10, 100)
    nbar: float = 100.0
    alpha: float = 1.0
    t_grid: np.ndarray | None = None
    theta_grid: np.ndarray | None = None
    nr: int = 400
    seed: int = 0
    output: str = ""
    options: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        scenario = raw.pop("scenario", None)
        if scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
        cfg = cls(scenario=scenario)
        cfg.params = _params(raw.pop("params", {"preset": "paper-sec3"}))
        try:
            if "n_list" in raw:
                cfg.n_list = tuple(int(n) for n in raw.pop("n_list"))
            if "nbar" in raw:
                cfg.nbar = float(raw.pop("nbar"))
            if "alpha" in raw:
                cfg.alpha = float(raw.pop("alpha"))
            if "nr" in raw:
                cfg.nr = int(raw.pop("nr"))
            if "seed" in raw:
                cfg.seed = int(raw.pop("seed"))
            cfg.output = str(raw.pop("output", f"{scenario}.csv"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        if "t_grid" in raw:
            cfg.t_grid = _grid(raw.pop("t_grid"), "t_grid")
        if "theta_grid" in raw:
            cfg.theta_grid = _grid(raw.pop("theta_grid"), "theta_grid")
        cfg.options = raw
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.n_list or min(self.n_list) < 0:
            raise InvariantError("n_list must be non-empty and non-negative")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvariantError("alpha must lie in [0, 1]")
        if self.nbar <= 0:
            raise InvariantError("nbar must be positive")
        if self.nr < 1:
            raise InvariantError("nr must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvariantError("seed must be an unsigned 64-bit integer")

    def option(self, key: str, default: Any, kind: Callable = float) -> Any:
        if key not in self.options:
            return default
        try:
            return kind(self.options[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None


def _params(block: Any) -> PhysParams:
    if not isinstance(block, dict):
        raise ConfigError("params must be an object")
    block = dict(block)
    base = preset(block.pop("preset")) if "preset" in block else None
    known = set(PhysParams.__dataclass_fields__)
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown params fields: {sorted(unknown)}")
    try:
        values = {k: float(v) for k, v in block.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params value: {exc}") from None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", atomsim.EITConditionWarning)
            if base is not None:
                return base.replace(**values)
            return PhysParams(**values)
    except TypeError as exc:
        raise ConfigError(f"incomplete params block: {exc}") from None
    except ValueError as exc:
        raise InvariantError(str(exc)) from None


def fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


ScenarioResult = tuple[list[str], list[tuple], str]


def _fig3(cfg: ScenarioConfig) -> ScenarioResult:
    t_grid = cfg.t_grid if cfg.t_grid is not None else np.linspace(0.0, 2.0, 401)
    t_ramp = cfg.option("t_ramp", atomsim.DEFAULT_RAMP)
    model = cfg.option("model", "atomic", str)
    fid = cfg.option("ryd_pi_fidelity", 1.0)
    series = dqc1.trace_series(cfg.params, cfg.n_list, t_grid, model=model, t_ramp=t_ramp, ryd_pi_fidelity=fid)
    rows = [(t, n, z.real, z.imag) for t, n, z in series.rows()]
    t_pi = atomsim.open_pi_time(cfg.params, t_ramp)
    bf = atomsim.blocking_fidelity(cfg.params, t_pi, t_ramp)
    summary = f"pi_time_us={fmt(t_pi)} blocking_fidelity={fmt(bf)}"
    return ["t_us", "n", "re_trace", "im_trace"], rows, summary


def _fig4(cfg: ScenarioConfig) -> ScenarioResult:
    model = ensemble.PoissonModel(cfg.nbar, single_load_p=cfg.option("single_load_p", 0.8))
    ns, w = ensemble.poisson_weights(model)
    rows = [(int(n), wi, ensemble.peak_width(int(n))) for n, wi in zip(ns, w) if n >= 1]
    theta = cfg.theta_grid if cfg.theta_grid is not None else np.linspace(0.0, np.pi, 2001)
    unc = ensemble.trace_uncertainty(model, theta)
    summary = (
        f"weighted_avg_width={fmt(ensemble.weighted_peak_width(model))} "
        f"max_uncertainty={fmt(unc.max_relative)} theta_at_max={fmt(unc.theta_at_max)} "
        f"load_overhead={fmt(model.load_overhead)}"
    )
    return ["n", "poisson_weight", "peak_width"], rows, summary


def _shots(cfg: ScenarioConfig) -> ScenarioResult:
    tr = cfg.options.get("trace", [0.0, 0.0])
    try:
        trace = complex(float(tr[0]), float(tr[1]))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"trace must be [re, im]: {exc}") from None
    if abs(trace) > 1 + 1e-9:
        raise InvariantError("|trace| must not exceed 1")
    reps = cfg.option("repetitions", 1000, int)
    eps_d = cfg.option("detect_eps", 0.0)
    if not 0.0 <= eps_d < 0.5:
        raise InvariantError("detect_eps must lie in [0, 0.5)")
    ex, ey = dqc1.readout(trace, cfg.alpha)
    rows = []
    sq = 0.0
    for k in range(reps):
        s = shots.sample_readout(trace, cfg.alpha, cfg.nr, seed=shots.stream_seed(cfg.seed, k), detect_eps=eps_d)
        rows.append((k, s.est_x, s.est_y, s.se_x, s.se_y))
        sq += (s.est_x - ex) ** 2 + (s.est_y - ey) ** 2
    rms = math.sqrt(sq / (2 * reps))
    summary = f"rms_error={fmt(rms)} nr={cfg.nr} expected={fmt(1 / math.sqrt(cfg.nr))}"
    return ["rep", "est_x", "est_y", "se_x", "se_y"], rows, summary


def _discord(cfg: ScenarioConfig) -> ScenarioResult:
    alphas = [float(a) for a in cfg.options.get("alphas", [cfg.alpha])]
    trials = cfg.option("trials", 10, int)
    grid = cfg.option("grid_resolution", 10_000, int)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    worst = 0.0
    for n in cfg.n_list:
        if n < 1 or n > 6:
            raise InvariantError("discord scenario supports 1 <= n <= 6")
        for trial in range(trials):
            u = unitary_group.rvs(2**n, random_state=rng) if 2**n > 1 else np.eye(1)
            for a in alphas:
                if not 0.0 <= a <= 1.0:
                    raise InvariantError("alphas must lie in [0, 1]")
                rep = discord.discord_report(u, a, grid)
                worst = max(worst, abs(rep.d_geo_closed - rep.d_geo_minsearch), abs(rep.d_geo_closed - rep.d_geo_estimator))
                rows.append((n, a, trial, rep.d_geo_closed, rep.d_geo_minsearch, rep.d_geo_estimator, rep.min_pt_eigenvalue))
    summary = f"max_route_disagreement={fmt(worst)} states={len(rows)}"
    return ["n", "alpha", "trial", "d_closed", "d_minsearch", "d_estimator", "min_pt_eig"], rows, summary


def _xa(cfg: ScenarioConfig) -> ScenarioResult:
    trials = cfg.option("trials", 20, int)
    fire_on = cfg.option("fire_on", 1, int)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    worst = 0.0
    for n in cfg.n_list:
        if n < 1 or n > 3:
            raise InvariantError("xa scenario supports 1 <= n <= 3")
        for trial in range(trials):
            u = unitary_group.rvs(2**n, random_state=rng)
            res = ctrl_lift.lift_control(u, n, fire_on=fire_on)
            dev = float(np.max(np.abs(res.restricted - res.reference)))
            c = res.composite
            unit = float(np.max(np.abs(c.conj().T @ c - np.eye(c.shape[0]))))
            worst = max(worst, dev)
            rows.append((n, trial, dev, res.leakage, unit))
    summary = f"max_identity_deviation={fmt(worst)} active_on={1 - fire_on}"
    return ["n", "trial", "max_abs_dev", "leakage", "unitarity_dev"], rows, summary


def _ising(cfg: ScenarioConfig) -> ScenarioResult:
    n = cfg.option("n", 4, int)
    scale = cfg.option("coupling_scale", 2 * np.pi * 1.0)
    rng = np.random.default_rng(cfg.seed)
    spec0 = ctrl_lift.IsingSpec.random(n, rng, scale=scale)
    if cfg.t_grid is not None:
        t_grid = cfg.t_grid
    else:
        emax = float(np.max(ctrl_lift.ising_energies(spec0))) or 1.0
        t_grid = np.linspace(0.0, 0.3 / emax, 31)
    spec = ctrl_lift.IsingSpec(n, spec0.couplings, tuple(t_grid))
    est = ctrl_lift.mean_interaction_estimate(spec)
    rows = []
    for t in t_grid:
        s = dqc1.trace_exact(ctrl_lift.ising_unitary(spec, t)) if n <= 10 else complex(
            np.mean(np.exp(-1j * t * ctrl_lift.ising_energies(spec)))
        )
        rows.append((t, s.real, s.imag))
    summary = f"mean_interaction={fmt(est.value)} exact={fmt(spec.mean_interaction)} fit_residual={fmt(est.residual)}"
    return ["t_us", "re_s", "im_s"], rows, summary


RUNNERS: dict[str, Callable[[ScenarioConfig], ScenarioResult]] = {
    "fig3": _fig3,
    "fig4": _fig4,
    "shots": _shots,
    "discord": _discord,
    "xa": _xa,
    "ising": _ising,
}


def run_scenario(cfg: ScenarioConfig, out_dir: Path | None = None) -> tuple[Path, str]:
    """Run one scenario and write its CSV. Returns the output path and summary line."""
    try:
        with np.errstate(invalid="raise", divide="raise", over="raise"):
            header, rows, summary = RUNNERS[cfg.scenario](cfg)
    except (ConfigError, InvariantError):
        raise
    except (np.linalg.LinAlgError, FloatingPointError, ctrl_lift.CoarseGridError) as exc:
        raise NumericError(str(exc)) from exc
    except ValueError as exc:
        raise InvariantError(str(exc)) from exc
    for row in rows:
        for v in row:
            if isinstance(v, float) and not math.isfinite(v):
                raise NumericError(f"non-finite value in {cfg.scenario} output")
    out = Path(cfg.output)
    if out_dir is not None and not out.is_absolute():
        out = out_dir / out
    write_csv(out, header, rows)
    return out, f"{cfg.scenario}: {summary}"


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydberg-dqc1", description="Cold-atom DQC1 scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario from a JSON config")
    run_p.add_argument("config")
    run_p.add_argument("--out", default=None, help="directory for relative output paths")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    pre_p = sub.add_parser("preset", help="print a named parameter preset as JSON")
    pre_p.add_argument("name")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "preset":
            print(json.dumps(preset(args.name).to_dict(), indent=2))
            return EXIT_OK
        raw = load_config(args.config)
        if args.seed is not None:
            raw = {**raw, "seed": args.seed}
        cfg = ScenarioConfig.from_dict(raw)
        _, summary = run_scenario(cfg, Path(args.out) if args.out else None)
        print(summary)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
