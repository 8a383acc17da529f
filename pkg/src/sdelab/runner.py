"""Scenario orchestration and command-line front end.

A scenario is a fixed composition of the library's operations, configured by
a single JSON file. Every run writes an output tree::

    <out>/manifest.json     config echo, content hash, file digests, checks
    <out>/reports/*.json    structured check results
    <out>/series/*.csv      tidy tables (one row per observation)

Reruns with the same config and seed are bit-identical.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .fields import PRESET_NAMES, make_grid, mollify, preset_field
from .fpe import (
    energy_monitor,
    law_compare,
    max_principle_check,
    solve_fp_1d,
    solve_kinetic,
    stationary_bound_check,
)
from .laws import Law
from .maxops import gradient_magnitude, maximal
from .norms import (
    h1_norm,
    h_half_norm,
    semicontinuity_probe,
    w11_norm,
    wphi_weak_norm,
)
from .report import Report
from .sde import (
    BrownianStore,
    cauchy_diagnostic,
    dyadic_block_averages,
    dyadic_eps_schedule,
    l_eps_functional,
    q_functional,
    q_tilde_functional,
    simulate_ensemble,
    stability_cap,
    uniqueness_map,
)

__all__ = [
    "SCENARIOS",
    "ConfigError",
    "RunArtifact",
    "validate_config",
    "run_scenario",
    "emit_plotdata",
    "main",
]

MAX_EXIT_FRACTION = 1e-3


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunArtifact:
    out_dir: Path
    manifest: dict

    @property
    def passed(self) -> bool:
        return bool(self.manifest["passed"])

    @property
    def files(self) -> list:
        return sorted(self.manifest["files"])


# -- defaults and validation -------------------------------------------------

_DEFAULTS = {
    "thm_multidim_convergence": {
        "preset": {"name": "ou", "params": {}},
        "grid": {"bounds": [[-4.0, 4.0], [-4.0, 4.0]], "counts": [256, 256],
                 "periodic": False},
        "n_paths": 1000,
        "T": 0.5,
        "dt": None,
        "x0": [0.0, 0.0],
        "deltas": [0.5, 0.25, 0.125, 0.0625],
        "epsilons": [1e-1, 1e-2],
        "p": 2.0,
        "record_every": 4,
    },
    "thm_1d_convergence": {
        "preset": {"name": "sqrt_diffusion", "params": {"kappa": 0.0}},
        "grid": {"bounds": [[-4.0, 4.0]], "counts": [4096], "periodic": False},
        "n_paths": 2000,
        "T": 1.0,
        "dt": None,
        "x0": 0.5,
        "deltas": [0.0625, 0.03125, 0.015625, 0.0078125],
        "epsilons": [1e-1, 1e-2],
        "block_eps": [1e-10, 0.5],
        "p": 2.0,
        "record_every": 4,
    },
    "elliptic_energy": {
        "preset": {"name": "ou", "params": {}},
        "grid": {"bounds": [[-8.0, 8.0]], "counts": [512], "periodic": False},
        "T": 1.0,
        "dt": None,
        "u0": {"kind": "gaussian", "mean": 0.0, "std": 2.0},
        "alphas": [2.0, 4.0],
        "p": 3.0,
    },
    "stationary_1d": {
        "preset": {"name": "ou", "params": {}},
        "grid": {"bounds": [[-6.0, 6.0]], "counts": [1024], "periodic": False},
        "T": 5.0,
        "dt": None,
        "u0": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
        "C": 0.5,
        "rtol": 1e-6,
    },
    "kinetic_langevin": {
        "preset": {"name": "kinetic_langevin",
                   "params": {"beta": 1.0, "temp": 0.5}},
        "grid": {"bounds": [[-2.0, 2.0], [-3.0, 3.0]], "counts": [128, 128],
                 "periodic": False},
        "T": 0.3,
        "dt": None,
        "u0": {"kind": "gaussian", "mean": [0.0, 0.0], "std": [0.3, 0.5]},
    },
    "ae_uniqueness_map": {
        "preset": {"name": "ou", "params": {}},
        "grid": {"bounds": [[-6.0, 6.0]], "counts": [8192], "periodic": False},
        "deltas": [0.015625, 0.00390625],
        "epsilons": [1e-1, 1e-2, 1e-3],
        "n_points": 64,
        "n_paths": 200,
        "T": 1.0,
        "dt": None,
        "threshold": 0.02,
        "x_span": 0.5,
    },
    "norm_audit": {
        "preset": {"name": "sqrt_diffusion", "params": {"kappa": 0.0}},
        "grid": {"bounds": [[-4.0, 4.0]], "counts": [2048], "periodic": True},
        "T": 1.0,
        "law": {"mean": 0.0, "std": 1.0},
        "deltas": [0.0078125, 0.015625, 0.03125, 0.0625],
        "probe_kind": "Hhalf",
        "L_grid": None,
    },
}

SCENARIOS = {
    "thm_multidim_convergence":
        "shared-noise Cauchy matrix and Q sweep across a 2-D mollification family",
    "thm_1d_convergence":
        "1-D coupled convergence: Cauchy matrix, Q and weighted-Q sweeps, dyadic blocks",
    "elliptic_energy":
        "forward-PDE solve with the per-step moment-growth audit",
    "stationary_1d":
        "forward-PDE solve checked against the pointwise stationary envelope",
    "kinetic_langevin":
        "phase-space solve with maximum-principle and v-variance checks",
    "ae_uniqueness_map":
        "per-initial-point coupling gap and its a-priori integrand",
    "norm_audit":
        "the four weighted norms of a preset plus semicontinuity probes",
}


def _check_grid(spec, errors):
    try:
        bounds = spec["bounds"]
        return make_grid(len(bounds), [tuple(b) for b in bounds],
                         spec["counts"], spec.get("periodic", False))
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"grid: {exc}")
        return None


def _positive(cfg, key, errors, integer=False):
    v = cfg.get(key)
    if v is None:
        return
    ok = isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0
    if integer:
        ok = ok and int(v) == v
    if not ok:
        errors.append(f"{key}: must be a positive {'integer' if integer else 'number'}")


def validate_config(raw: dict) -> dict:
    """Apply scenario defaults and collect every validation problem."""
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    name = raw.get("scenario")
    if name not in SCENARIOS:
        raise ConfigError(
            [f"scenario: {name!r} unknown; choose from {sorted(SCENARIOS)}"]
        )
    cfg = json.loads(json.dumps(_DEFAULTS[name]))  # deep copy of defaults
    known = set(cfg) | {"scenario", "seed", "out", "threads"}
    for key in raw:
        if key not in known:
            errors.append(f"{key}: not a parameter of scenario {name}")
    cfg.update({k: v for k, v in raw.items() if k in known})
    cfg["scenario"] = name
    cfg.setdefault("seed", 0)
    cfg.setdefault("threads", 1)

    seed = cfg["seed"]
    if not (isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0):
        errors.append("seed: must be a nonnegative integer")
    _positive(cfg, "threads", errors, integer=True)

    grid = _check_grid(cfg.get("grid", {}), errors)
    preset = cfg.get("preset", {})
    if not isinstance(preset, dict) or preset.get("name") not in PRESET_NAMES:
        errors.append(f"preset: name must be one of {PRESET_NAMES}")
    elif grid is not None:
        try:
            preset_field(preset["name"], preset.get("params", {}), grid)
        except ValueError as exc:
            errors.append(f"preset: {exc}")

    for key in ("T", "dt", "n_paths", "n_points", "p", "C", "threshold"):
        _positive(cfg, key, errors, integer=key in ("n_paths", "n_points"))
    for key in ("deltas", "epsilons", "alphas"):
        v = cfg.get(key)
        if v is not None and (not isinstance(v, list) or
                              any(not isinstance(x, (int, float)) or x <= 0
                                  for x in v)):
            errors.append(f"{key}: must be a list of positive numbers")
    if name in ("thm_multidim_convergence", "thm_1d_convergence"):
        if isinstance(cfg.get("deltas"), list) and len(cfg["deltas"]) < 4:
            errors.append("deltas: coupled-refinement family needs >= 4 scales")
    if name == "ae_uniqueness_map":
        if isinstance(cfg.get("deltas"), list) and len(cfg["deltas"]) != 2:
            errors.append("deltas: exactly two regularization scales")
    if name == "elliptic_energy" and grid is not None:
        p = cfg.get("p")
        if isinstance(p, (int, float)) and p <= grid.d:
            errors.append(f"p: moment estimate needs p > d = {grid.d}")
    if name == "norm_audit" and grid is not None:
        n = grid.shape[0]
        if not (grid.periodic[0] and n & (n - 1) == 0):
            errors.append("grid: norm_audit needs a periodic power-of-two grid")

    if errors:
        raise ConfigError(errors)
    return cfg


# -- emission helpers --------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True) + "\n" + __version__
    return hashlib.sha256(blob.encode()).hexdigest()


class _Emitter:
    def __init__(self, out_dir: Path):
        self.out = Path(out_dir)
        (self.out / "reports").mkdir(parents=True, exist_ok=True)
        (self.out / "series").mkdir(parents=True, exist_ok=True)
        self.files = []
        self.checks = {}

    def report(self, rep) -> None:
        name = rep.name if isinstance(rep, Report) else rep[0]
        path = self.out / "reports" / f"{name}.json"
        if isinstance(rep, Report):
            rep.to_json(path)
            self.checks[name] = bool(rep.passed)
        else:  # (name, payload dict, passed or None)
            _, payload, passed = rep
            with open(path, "w") as fh:
                fh.write(json.dumps(payload, indent=2, sort_keys=True))
            if passed is not None:
                self.checks[name] = bool(passed)
        self.files.append(path)

    def json(self, name: str, payload: dict) -> None:
        self.report((name, payload, None))

    def series(self, name: str, header, rows) -> None:
        path = self.out / "series" / f"{name}.csv"
        _write_csv(path, header, rows)
        self.files.append(path)


# -- shared scenario pieces ---------------------------------------------------

def _pick_dt(T: float, cap: float, dt_cfg) -> float:
    if dt_cfg is not None:
        dt = float(dt_cfg)
        if dt > cap * (1 + 1e-12):
            raise ValueError(f"dt={dt} exceeds the stability cap {cap:.3e}")
        if abs(round(T / dt) * dt - T) > 1e-9 * max(1.0, T):
            raise ValueError("dt must divide T")
        return dt
    k = max(0, int(np.ceil(np.log2(T / (0.9 * cap)))))
    return T / 2 ** k


def _initial_density(grid, spec) -> np.ndarray:
    kind = spec.get("kind", "gaussian")
    mesh = grid.meshgrid()
    if kind == "gaussian":
        mean = np.atleast_1d(np.asarray(spec.get("mean", 0.0), dtype=float))
        std = np.atleast_1d(np.asarray(spec.get("std", 1.0), dtype=float))
        if mean.size == 1:
            mean = np.repeat(mean, grid.d)
        if std.size == 1:
            std = np.repeat(std, grid.d)
        u = np.ones(grid.shape)
        for ax in range(grid.d):
            u = u * np.exp(-0.5 * ((mesh[ax] - mean[ax]) / std[ax]) ** 2)
        return u
    if kind == "spike":
        u = np.zeros(grid.shape)
        idx = tuple(
            int(np.argmin(np.abs(grid.nodes(ax) - p)))
            for ax, p in enumerate(np.atleast_1d(spec.get("position", 0.0)))
        )
        u[idx] = 1.0
        return u
    if kind == "uniform":
        return np.ones(grid.shape)
    raise ValueError(f"unknown initial density kind {spec.get('kind')!r}")


def _simulate_family(fields, x0, T, store, record_every, threads):
    def one(f):
        return simulate_ensemble(f, x0, T, store, record_every=record_every)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, fields))
    return [one(f) for f in fields]


def _exit_report(ensembles) -> Report:
    fractions = [e.exit_fraction for e in ensembles]
    return Report("exit_fraction", max(fractions) <= MAX_EXIT_FRACTION,
                  {"fractions": fractions, "max_allowed": MAX_EXIT_FRACTION})


def _q_sweep(emit: _Emitter, ensA, ensB, epsilons) -> None:
    rows = []
    sups, sup_ses = [], []
    for eps in epsilons:
        fs = q_functional(ensA, ensB, eps)
        sups.append(fs.sup)
        sup_ses.append(fs.sup_stderr)
        for t, v, s in zip(fs.times, fs.values, fs.stderr):
            rows.append((eps, t, v, s))
    emit.series("q_functional", ["epsilon", "t", "EQ", "stderr"], rows)
    logs = np.abs(np.log(np.asarray(epsilons, dtype=float)))
    ratios = np.asarray(sups) / logs
    errs = np.asarray(sup_ses) / logs
    # informational: the per-epsilon growth profile of the coupling functional
    emit.json("q_ratio_shape", {
        "epsilons": list(epsilons),
        "sup_EQ": sups,
        "sup_stderr": sup_ses,
        "ratios": ratios.tolist(),
        "ratio_stderr": errs.tolist(),
    })


# -- scenarios ----------------------------------------------------------------

def _scn_convergence(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    base = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    deltas = sorted(cfg["deltas"], reverse=True)
    fields = [mollify(base, d) for d in deltas]
    cap = min(stability_cap(f) for f in fields)
    dt = _pick_dt(cfg["T"], cap, cfg.get("dt"))
    steps = int(round(cfg["T"] / dt))
    store = BrownianStore.generate(cfg["seed"], cfg["n_paths"], steps, dt, base.r)
    emit.report(store.validate())
    ens = _simulate_family(fields, np.asarray(cfg["x0"], dtype=float),
                           cfg["T"], store, cfg["record_every"], cfg["threads"])
    emit.report(_exit_report(ens))

    cd = cauchy_diagnostic(ens, p=cfg["p"])
    emit.report(cd)
    rows = []
    m = cd.details["esup_matrix"]
    se = cd.details["stderr_matrix"]
    eta = cd.details["eta_matrix"]
    for i in range(len(ens)):
        for j in range(len(ens)):
            rows.append((i, j, deltas[i], deltas[j], m[i][j], se[i][j], eta[i][j]))
    emit.series("cauchy_matrix",
                ["n", "m", "delta_n", "delta_m", "esup", "stderr", "eta"], rows)

    _q_sweep(emit, ens[-2], ens[-1], cfg["epsilons"])

    if grid.d == 1:
        h_tilde = maximal(gradient_magnitude(base.drift, grid), grid)
        rows = []
        for eps in cfg["epsilons"]:
            fs = q_tilde_functional(ens[-2], ens[-1], eps, h_tilde)
            for t, v, s in zip(fs.times, fs.values, fs.stderr):
                rows.append((eps, t, v, s))
        emit.series("q_tilde", ["epsilon", "t", "EQtilde", "stderr"], rows)
        schedule = dyadic_eps_schedule(*cfg["block_eps"])
        emit.report(dyadic_block_averages(ens[-2], ens[-1], schedule))
        rows = []
        for eps in cfg["epsilons"]:
            fs = l_eps_functional(ens[-2], ens[-1], eps)
            for t, v, s in zip(fs.times, fs.values, fs.stderr):
                rows.append((eps, t, v, s))
        emit.series("l_eps", ["epsilon", "t", "EL", "stderr"], rows)


def _scn_elliptic_energy(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    field = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    u0 = _initial_density(grid, cfg["u0"])
    evo = solve_fp_1d(field, u0, cfg["T"], cfg.get("dt"))
    rep = energy_monitor(evo, field, cfg["alphas"], cfg["p"])
    path = emit.out / "reports" / "energy.json"
    rep.to_json(path)
    emit.files.append(path)
    emit.checks["energy"] = rep.passed
    rows = []
    for i, alpha in enumerate(rep.alphas):
        for k in range(rep.times.size - 1):
            rows.append((rep.times[k + 1], alpha, rep.values[i, k + 1],
                         rep.budgets[i, k]))
    emit.series("energy", ["t", "alpha", "lhs", "budget"], rows)
    emit.series("density_final", ["x", "u"],
                list(zip(grid.nodes(0), evo.density[-1])))


def _scn_stationary(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    field = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    u0 = _initial_density(grid, cfg["u0"])
    evo = solve_fp_1d(field, u0, cfg["T"], cfg.get("dt"))
    emit.report(stationary_bound_check(field, evo, cfg["C"], rtol=cfg["rtol"]))
    emit.series("density_final", ["x", "u"],
                list(zip(grid.nodes(0), evo.density[-1])))


def _scn_kinetic(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    field = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    u0 = _initial_density(grid, cfg["u0"])
    evo = solve_kinetic(field, u0, cfg["T"], cfg.get("dt"))
    emit.report(max_principle_check(evo))
    law = Law.from_density_evolution(evo)
    v = grid.nodes(1)
    rows = []
    for k, t in enumerate(evo.times):
        pv = evo.density[k].sum(axis=0) * grid.h[0]
        pv = pv / (pv.sum() * grid.h[1])
        mean = float(np.sum(pv * v) * grid.h[1])
        var = float(np.sum(pv * (v - mean) ** 2) * grid.h[1])
        rows.append((t, mean, var))
    emit.series("v_marginal", ["t", "mean_v", "var_v"], rows)
    x_marg = law.marginal(0)
    emit.series("x_marginal_final", ["x", "u"],
                list(zip(grid.nodes(0), x_marg.density[-1])))


def _scn_uniqueness(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    base = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    dA, dB = sorted(cfg["deltas"], reverse=True)
    fieldA, fieldB = mollify(base, dA), mollify(base, dB)
    cap = min(stability_cap(fieldA), stability_cap(fieldB))
    dt = _pick_dt(cfg["T"], cap, cfg.get("dt"))
    steps = int(round(cfg["T"] / dt))
    span = cfg["x_span"] * (grid.upper[0] - grid.lower[0]) / 2
    x_points = np.linspace(-span, span, cfg["n_points"]) \
        + (grid.upper[0] + grid.lower[0]) / 2
    store = BrownianStore.generate(cfg["seed"],
                                   cfg["n_points"] * cfg["n_paths"],
                                   steps, dt, base.r)
    rep = uniqueness_map(x_points, fieldA, fieldB, cfg["epsilons"], cfg["T"],
                         cfg["n_paths"], store, base_field=base,
                         threshold=cfg["threshold"])
    emit.report(rep)
    rows = []
    for eps in cfg["epsilons"]:
        m = rep.details["M_eps"][float(eps)]
        for i, x in enumerate(x_points):
            rows.append((x, eps, rep.details["E_abs_delta"][i], m[i]))
    emit.series("uniqueness_map", ["x", "eps", "N_eps", "M_eps"], rows)


def _scn_norm_audit(cfg, emit: _Emitter):
    grid = _check_grid(cfg["grid"], [])
    field = preset_field(cfg["preset"]["name"], cfg["preset"].get("params"), grid)
    law = Law.gaussian(grid, [0.0], cfg["law"]["mean"], cfg["law"]["std"])
    T = cfg["T"]
    sig = field.diffusion[:, 0, 0]
    F = field.drift
    values = {
        "H1": h1_norm(sig, law, T),
        "W11": w11_norm(F, law, T),
        "WphiWeak": wphi_weak_norm(F, law, T, L_grid=cfg.get("L_grid")),
        "Hhalf": h_half_norm(sig, law, T),
    }
    for kind, nv in values.items():
        emit.json(f"norm_{kind}", nv.to_dict())
    emit.report(semicontinuity_probe(sig, grid, law, cfg["deltas"],
                                     kind=cfg["probe_kind"], T=T))
    emit.series("norms", ["kind", "value"],
                [(k, v.value) for k, v in values.items()])


_SCENARIO_FN = {
    "thm_multidim_convergence": _scn_convergence,
    "thm_1d_convergence": _scn_convergence,
    "elliptic_energy": _scn_elliptic_energy,
    "stationary_1d": _scn_stationary,
    "kinetic_langevin": _scn_kinetic,
    "ae_uniqueness_map": _scn_uniqueness,
    "norm_audit": _scn_norm_audit,
}


def run_scenario(config: dict, out_dir=None, seed=None, threads=None) -> RunArtifact:
    """Validate, execute and archive one scenario run."""
    raw = dict(config)
    if seed is not None:
        raw["seed"] = seed
    if threads is not None:
        raw["threads"] = threads
    cfg = validate_config(raw)
    out = Path(out_dir if out_dir is not None else cfg.get("out", "run_out"))
    emit = _Emitter(out)
    complete = True
    try:
        _SCENARIO_FN[cfg["scenario"]](cfg, emit)
    except Exception:
        complete = False
        raise
    finally:
        manifest = {
            "config": cfg,
            "code_version": __version__,
            "config_hash": _config_hash(cfg),
            "files": {str(p.relative_to(out)): _sha256(p)
                      for p in sorted(emit.files)},
            "checks": emit.checks,
            "passed": bool(all(emit.checks.values())) and complete,
            "complete": complete,
        }
        with open(out / "manifest.json", "w") as fh:
            fh.write(json.dumps(manifest, indent=2, sort_keys=True))
    return RunArtifact(out, manifest)


def emit_plotdata(artifact: RunArtifact) -> list:
    """Paths of the tidy series tables of a completed run."""
    if not artifact.manifest.get("complete"):
        raise ValueError("artifact is incomplete")
    return [artifact.out_dir / f for f in artifact.files
            if f.startswith("series/")]


# -- CLI -----------------------------------------------------------------------

def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdelab",
        description="numerical laboratory for SDEs with rough coefficients",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override seed")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads for independent simulations")
    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")
    sub.add_parser("list-scenarios", help="print the scenario catalogue")
    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for name in sorted(SCENARIOS):
            print(f"{name}: {SCENARIOS[name]}")
        return 0

    try:
        raw = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        try:
            validate_config(raw)
        except ConfigError as exc:
            for e in exc.errors:
                print(f"invalid: {e}", file=sys.stderr)
            return 2
        print("config ok")
        return 0

    try:
        artifact = run_scenario(raw, out_dir=args.out, seed=args.seed,
                                threads=args.threads)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"invalid: {e}", file=sys.stderr)
        return 2
    status = "pass" if artifact.passed else "FAIL"
    print(f"{status}: {len(artifact.files)} files in {artifact.out_dir}")
    return 0 if artifact.passed else 1


if __name__ == "__main__":
    sys.exit(main())
