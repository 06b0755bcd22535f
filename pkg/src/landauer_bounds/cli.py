"""Config-driven scenario runner.

``landauer-bounds run --scenario fig1 --out DIR`` propagates a built-in
scenario, evaluates every inequality, and writes

  trajectory.csv   sampled states (upper triangle) with Q, W, diagnostics
  bounds.csv       per-sample bound chain (schema depends on driven/undriven)
  meta.json        parameters, solver residuals, flags, inequality verdicts
  *.svg            optional charts (``--plots``)

Exit codes: 0 all inequalities hold within tolerance, 2 violation beyond
tolerance, 1 runtime error, 3 configuration error. Identical configuration
produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import models, plotting, qstate, refsolve, thermo
from .errors import ConfigError, LandauerBoundsError, SchemaError
from .lindblad import JumpChannel, LindbladModel, Trajectory, propagate
from .plotting import DRIVEN_COLUMNS, UNDRIVEN_COLUMNS
from .qstate import DensityMatrix
from .refsolve import BRANCH_NEGATIVE, BRANCH_NON_NEGATIVE

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VIOLATION = 2
EXIT_CONFIG = 3

VERDICT_TOL = 1e-6

_SCENARIOS: dict[str, dict[str, Any]] = {
    "fig1": {
        "model": "rydberg",
        "model_params": {"omega2": 0.02, "omega": 0.01, "gamma": 0.03},
        "initial_state": {"kind": "gibbs", "beta": 30.0},
        # t_end covers ~4 relaxation e-folds of the slowest decaying mode
        # (Liouvillian gap ~ 1.9e-3); all bound curves are saturated there.
        "integrator": {"dt": 0.01, "t_end": 2000.0, "n_samples": 401},
        "bath_T": None,
        "beta_branch": BRANCH_NON_NEGATIVE,
    },
    "fig2": {
        "model": "erasure",
        "model_params": {"eps0": 0.4, "eps_tau": 10.0, "tau": 10.0,
                         "gamma": 0.2, "bath_beta": 1.0},
        "initial_state": {"kind": "gibbs", "beta": 1.0},
        "integrator": {"dt": 10.0 / 20000, "t_end": 10.0, "n_samples": 401},
        "bath_T": 1.0,
        "beta_branch": BRANCH_NON_NEGATIVE,
    },
}


def _figs1_defaults() -> dict[str, Any]:
    cfg = copy.deepcopy(_SCENARIOS["fig2"])
    cfg["sweep"] = [
        {
            "name": f"tau={tau:g}",
            "overrides": {
                "model_params": {"tau": tau},
                "integrator": {"dt": tau / 20000, "t_end": tau},
            },
        }
        for tau in (5.0, 10.0, 20.0)
    ]
    return cfg


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario configuration (see README for the JSON schema)."""

    name: str
    model: str
    model_params: dict[str, float]
    initial_state: dict[str, Any]
    dt: float
    t_end: float
    n_samples: int
    bath_T: float | None
    beta_branch: str
    out_dir: Path
    plots: bool
    sweep: tuple[dict[str, Any], ...]
    custom_model_file: str | None


def build_config(raw: dict[str, Any], name: str, out_dir: str | Path, plots: bool) -> ScenarioConfig:
    try:
        integ = raw["integrator"]
        dt = float(integ["dt"])
        t_end = float(integ["t_end"])
        n_samples = int(integ["n_samples"])
        model = str(raw["model"])
        if model not in ("rydberg", "erasure", "custom"):
            raise ConfigError(f"unknown model {model!r}")
        if dt <= 0 or t_end <= 0:
            raise ConfigError("dt and t_end must be positive")
        if n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        branch = raw.get("beta_branch", BRANCH_NON_NEGATIVE)
        if branch not in (BRANCH_NON_NEGATIVE, BRANCH_NEGATIVE):
            raise ConfigError(f"unknown beta_branch {branch!r}")
        bath = raw.get("bath_T")
        if bath is not None:
            bath = float(bath)
            if bath <= 0:
                raise ConfigError("bath_T must be positive when set")
        init = dict(raw["initial_state"])
        if "kind" not in init:
            raise ConfigError("initial_state needs a 'kind'")
        return ScenarioConfig(
            name=name,
            model=model,
            model_params={k: float(v) for k, v in raw.get("model_params", {}).items()},
            initial_state=init,
            dt=dt,
            t_end=t_end,
            n_samples=n_samples,
            bath_T=bath,
            beta_branch=branch,
            out_dir=Path(out_dir),
            plots=plots,
            sweep=tuple(raw.get("sweep") or ()),
            custom_model_file=raw.get("custom_model_file"),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_custom_model(path: str | Path) -> LindbladModel:
    """Undriven model from a JSON matrix file.

    Schema: {"dim": d, "hamiltonian": {"re": [[..]], "im": [[..]]},
             "channels": [{"rate": g, "operator": {"re": [[..]], "im": [[..]]}}]}
    with "im" optional.
    """
    try:
        spec = json.loads(Path(path).read_text())
        dim = int(spec["dim"])
        h = _matrix_from_json(spec["hamiltonian"], dim)
        channels = tuple(
            JumpChannel.constant(float(ch["rate"]), _matrix_from_json(ch["operator"], dim))
            for ch in spec.get("channels", [])
        )
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise SchemaError(f"custom model file {path}: {exc}") from exc
    return LindbladModel(dim=dim, hamiltonian_protocol=lambda t: h,
                         channels=channels, driven=False)


def _matrix_from_json(obj: dict[str, Any], dim: int) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros((dim, dim))), dtype=float)
    m = re + 1j * im
    if m.shape != (dim, dim):
        raise ValueError(f"matrix shape {m.shape} != ({dim}, {dim})")
    return m


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Everything a single scenario run produced, before serialization."""

    config: ScenarioConfig
    model: LindbladModel
    trajectory: Trajectory
    kind: str  # "undriven" | "driven"
    rows: list[Any]
    beta_results: list[refsolve.BetaSolveResult]
    nlp_rows: list[thermo.NlpComparison] | None
    meta: dict[str, Any]
    bell_state: np.ndarray | None = None


def _build_model(config: ScenarioConfig) -> tuple[LindbladModel, np.ndarray | None]:
    if config.model == "rydberg":
        model, bell = models.build_rydberg(models.RydbergParams(**config.model_params))
        return model, bell
    if config.model == "erasure":
        return models.build_erasure(models.ErasureParams(**config.model_params)), None
    if config.custom_model_file is None:
        raise ConfigError("model 'custom' needs custom_model_file")
    return load_custom_model(config.custom_model_file), None


def _build_initial_state(config: ScenarioConfig, model: LindbladModel) -> DensityMatrix:
    init = config.initial_state
    kind = init["kind"]
    h0 = model.hamiltonian(0.0)
    if kind in ("gibbs", "sorted_ascending_diagonal"):
        return models.initial_state(kind, h0, beta=float(init["beta"]))
    if kind == "maximally_mixed":
        return models.initial_state(kind, h0)
    if kind == "pure":
        vec = np.array([complex(c[0], c[1]) for c in init["vector"]])
        return models.initial_state(kind, vector=vec)
    raise ConfigError(f"unknown initial_state kind {kind!r}")


def run_pipeline(config: ScenarioConfig) -> PipelineResult:
    """Propagate, solve references, and evaluate bounds for one configuration."""
    model, bell = _build_model(config)
    rho0 = _build_initial_state(config, model)
    traj = propagate(model, rho0, config.t_end, config.dt, config.n_samples)

    entropies = [(float(t), qstate.von_neumann_entropy(st))
                 for t, st in zip(traj.times, traj.states)]
    if model.driven:
        kind = "driven"
        beta_results = refsolve.solve_beta_series(model.hamiltonian, entropies,
                                                  config.beta_branch)
        rows: list[Any] = thermo.driven_bounds(traj, model, beta_results, config.bath_T)
    else:
        kind = "undriven"
        h0 = model.hamiltonian(0.0)
        solve = refsolve.solve_beta(h0, entropies[0][1], config.beta_branch)
        beta_results = [solve]
        ref = qstate.gibbs_state(h0, solve.beta_R)
        rows = thermo.undriven_bounds(traj, model, ref, config.bath_T)

    nlp_rows = None
    if config.bath_T is not None:
        nlp_rows = thermo.nlp_comparison(traj, model, 1.0 / config.bath_T)

    meta = _build_meta(config, model, traj, kind, rows, beta_results, nlp_rows, bell)
    return PipelineResult(config=config, model=model, trajectory=traj, kind=kind,
                          rows=rows, beta_results=beta_results, nlp_rows=nlp_rows,
                          meta=meta, bell_state=bell)


def _verdicts(kind: str, rows: list[Any],
              nlp_rows: list[thermo.NlpComparison] | None,
              flipped: bool) -> dict[str, dict[str, Any]]:
    """Worst-case slack per inequality; holds when slack >= -1e-6."""
    verdicts: dict[str, dict[str, Any]] = {}

    def add(name: str, slacks: list[float]) -> None:
        if slacks:
            worst = min(slacks)
            verdicts[name] = {"worst_slack": worst, "holds": worst >= -VERDICT_TOL}

    if kind == "undriven":
        add("gap_nonneg", [r.gap_P for r in rows])
        add("gap_identity", [-abs(r.gap_P - r.D_direct) for r in rows if r.D_direct is not None])
        if flipped:
            add("heat_lower_flipped", [r.Q - r.Q_u for r in rows])
        else:
            add("heat_upper", [r.Q_u - r.Q for r in rows])
        add("lp_lower", [r.Q - r.lp_lower for r in rows if r.lp_lower is not None])
        add("coherence_split", [-abs(r.dS - (r.dS_diag - r.dCoh)) for r in rows])
    else:
        add("gap_nonneg", [r.gap for r in rows if r.gap is not None])
        add("gap_identity", [-abs(r.gap - r.D_inst) for r in rows
                             if r.gap is not None and r.D_inst is not None])
        add("heat_upper", [r.upper - r.Q for r in rows if not math.isnan(r.upper)])
        add("lp_lower", [r.Q - r.lp_lower for r in rows if r.lp_lower is not None])
        add("coherence_split", [-abs(r.dS - (r.dS_diag - r.dCoh)) for r in rows])
    if nlp_rows is not None:
        add("nlp_S23", [c.slack_S23 for c in nlp_rows])
        add("nlp_S25", [c.slack_S25 for c in nlp_rows if c.slack_S25 is not None])
        add("nlp_S26", [c.slack_S26 for c in nlp_rows if c.slack_S26 is not None])
    return verdicts


def _build_meta(config: ScenarioConfig, model: LindbladModel, traj: Trajectory,
                kind: str, rows: list[Any],
                beta_results: list[refsolve.BetaSolveResult],
                nlp_rows: list[thermo.NlpComparison] | None,
                bell: np.ndarray | None) -> dict[str, Any]:
    b0 = beta_results[0]
    flipped = b0.beta_R < 0
    h0 = model.hamiltonian(0.0)
    degenerate = qstate.has_degenerate_spectrum(np.linalg.eigvalsh(h0))

    e = np.array([r.E_S for r in rows])
    balance = float(np.max(np.abs((e - e[0]) - (traj.work - traj.heat))))

    meta: dict[str, Any] = {
        "scenario": config.name,
        "config": {
            "model": config.model,
            "model_params": config.model_params,
            "initial_state": config.initial_state,
            "integrator": {"dt": config.dt, "t_end": config.t_end,
                           "n_samples": config.n_samples},
            "bath_T": config.bath_T,
            "beta_branch": config.beta_branch,
        },
        "integrator": {
            "dt_effective": traj.dt,
            "n_steps": traj.n_steps,
            "method": "fixed-step classical RK4 with in-stage heat/work accumulation",
        },
        "reference": {
            "beta_R0": b0.beta_R,
            "residual": b0.residual,
            "saturated": b0.saturated,
            "branch": b0.branch,
            "direction_flipped": flipped,
        },
        "diagnostics": {
            "max_step_trace_drift": traj.max_step_trace_drift,
            "cumulative_trace_drift": traj.cumulative_trace_drift,
            "min_eigenvalue": float(np.min(traj.min_eigenvalues)),
            "max_energy_balance_error": balance,
            "saturated_samples": sum(1 for r in beta_results if r.saturated),
            "failed_beta_solves": sum(1 for r in beta_results if r.error is not None),
        },
        "flags": {
            "degenerate_hamiltonian_spectrum": degenerate,
            "dephasing_note": (
                "degenerate levels are dephased as spectral blocks; see qstate"
                if degenerate else None
            ),
        },
        "notes": {
            "units": "hbar = k_B = 1; energies and rates share one frequency unit,"
                     " times are its inverse",
        },
        "verdicts": _verdicts(kind, rows, nlp_rows, flipped),
    }
    if bell is not None:
        meta["bell_fidelity_end"] = qstate.fidelity_pure(traj.states[-1], bell)
    if kind == "driven":
        beta_t = [r.beta_R_t for r in rows if not math.isnan(r.beta_R_t)]
        meta["reference"]["beta_R_final"] = beta_t[-1] if beta_t else None
    return meta


def _fmt_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".15g")


def write_bounds_csv(result: PipelineResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if result.kind == "undriven":
            writer.writerow(UNDRIVEN_COLUMNS)
            for r in result.rows:
                writer.writerow([
                    _fmt_cell(r.t), _fmt_cell(r.E_S), _fmt_cell(r.S),
                    _fmt_cell(r.S_diag), _fmt_cell(r.Coh), _fmt_cell(r.Q),
                    _fmt_cell(r.dE_R), _fmt_cell(r.gap_P), _fmt_cell(r.D_direct),
                    _fmt_cell(r.Q_u), _fmt_cell(r.lp_lower), ";".join(r.flags),
                ])
        else:
            writer.writerow(DRIVEN_COLUMNS)
            for r in result.rows:
                writer.writerow([
                    _fmt_cell(r.t), _fmt_cell(r.E_S), _fmt_cell(r.S),
                    _fmt_cell(r.S_diag), _fmt_cell(r.Coh), _fmt_cell(r.Q),
                    _fmt_cell(r.W), _fmt_cell(r.beta_R_t), _fmt_cell(r.C_t),
                    _fmt_cell(r.dE_R_tilde), _fmt_cell(r.gap), _fmt_cell(r.D_inst),
                    _fmt_cell(r.Qu_tilde), _fmt_cell(r.upper), _fmt_cell(r.lp_lower),
                    ";".join(r.flags),
                ])


def write_trajectory_csv(result: PipelineResult, path: Path) -> None:
    traj = result.trajectory
    d = result.model.dim
    header = ["t", "Q", "W", "min_eig"]
    header += [f"rho_{i}_{j}_re" for i in range(d) for j in range(i, d)]
    header += [f"rho_{i}_{j}_im" for i in range(d) for j in range(i + 1, d)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, st in enumerate(traj.states):
            m = st.matrix
            rec = [
                _fmt_cell(traj.times[k]), _fmt_cell(traj.heat[k]),
                _fmt_cell(traj.work[k]), _fmt_cell(traj.min_eigenvalues[k]),
            ]
            rec += [_fmt_cell(m[i, j].real) for i in range(d) for j in range(i, d)]
            rec += [_fmt_cell(m[i, j].imag) for i in range(d) for j in range(i + 1, d)]
            writer.writerow(rec)


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_meta_json(meta: dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(_json_safe(meta), indent=2, sort_keys=True) + "\n")


def write_outputs(result: PipelineResult) -> Path:
    out = result.config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(result, out / "trajectory.csv")
    write_bounds_csv(result, out / "bounds.csv")
    write_meta_json(result.meta, out / "meta.json")
    if result.config.plots:
        plotting.emit_plots(out / "bounds.csv")
    return out


def _exit_code(meta: dict[str, Any]) -> int:
    verdicts = meta.get("verdicts", {})
    return EXIT_OK if all(v["holds"] for v in verdicts.values()) else EXIT_VIOLATION


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, val in overrides.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def run_scenario(config: ScenarioConfig, raw: dict[str, Any] | None = None) -> int:
    """Execute one scenario (or its sweep) and write all outputs."""
    if not config.sweep:
        result = run_pipeline(config)
        write_outputs(result)
        return _exit_code(result.meta)

    if raw is None:
        raise ConfigError("sweep execution needs the raw configuration dict")
    entries = []
    codes = []
    for entry in config.sweep:
        name = entry.get("name") or f"entry{len(entries)}"
        sub_raw = _merge({k: v for k, v in raw.items() if k != "sweep"},
                         entry.get("overrides", {}))
        sub = build_config(sub_raw, f"{config.name}/{name}",
                           config.out_dir / name, config.plots)
        result = run_pipeline(sub)
        write_outputs(result)
        codes.append(_exit_code(result.meta))
        beta0 = result.meta["reference"]["beta_R0"]
        rows = plotting.read_bounds_csv(config.out_dir / name / "bounds.csv")[1]
        entries.append((name, rows, beta0, result.meta))

    summary = {
        "scenario": config.name,
        "sweep": [
            {"name": name, "verdicts": meta["verdicts"],
             "reference": meta["reference"], "diagnostics": meta["diagnostics"]}
            for name, _, _, meta in entries
        ],
    }
    config.out_dir.mkdir(parents=True, exist_ok=True)
    write_meta_json(summary, config.out_dir / "meta.json")
    if config.plots:
        panels = plotting.sweep_panels([(n, r, b) for n, r, b, _ in entries])
        (config.out_dir / "sweep.svg").write_text(plotting.render(panels))
    return max(codes) if codes else EXIT_OK


def scenario_defaults(name: str) -> dict[str, Any]:
    if name == "figS1":
        return _figs1_defaults()
    if name in _SCENARIOS:
        return copy.deepcopy(_SCENARIOS[name])
    raise ConfigError(f"unknown scenario {name!r}")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landauer-bounds",
        description="Simulate open-system scenarios and verify entropy-energy heat bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and emit CSV/JSON/SVG outputs")
    run.add_argument("--scenario", choices=["fig1", "fig2", "figS1"],
                     help="built-in scenario with its default parameters")
    run.add_argument("--config", help="path to a scenario configuration JSON file")
    run.add_argument("--out", help="output directory (default: $LANDAUER_OUT or ./landauer-out)")
    run.add_argument("--plots", action="store_true", help="also write SVG charts")
    run.add_argument("--dt", type=float, help="override integrator step")
    run.add_argument("--t-end", type=float, help="override propagation horizon")
    run.add_argument("--samples", type=int, help="override number of retained samples")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if (args.scenario is None) == (args.config is None):
            raise ConfigError("exactly one of --scenario / --config is required")
        if args.scenario:
            raw = scenario_defaults(args.scenario)
            name = args.scenario
        else:
            try:
                raw = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
            name = raw.get("name", Path(args.config).stem)
        for key, val in (("dt", args.dt), ("t_end", args.t_end), ("n_samples", args.samples)):
            if val is not None:
                raw.setdefault("integrator", {})
                raw["integrator"][key] = val
                for entry in raw.get("sweep", []):
                    entry.get("overrides", {}).get("integrator", {}).pop(key, None)
        out_dir = args.out or os.environ.get("LANDAUER_OUT") or "landauer-out"
        config = build_config(raw, name, out_dir, args.plots)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return run_scenario(config, raw)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LandauerBoundsError as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
