"""Forward PDE solvers and monitors.

1-D Fokker-Planck: du/dt + d/dx(F u) = d^2/dx^2(a u), solved by an explicit
conservative finite-volume scheme (upwind advection, flux-form diffusion).
Kinetic phase-space equation on a 2-D (x, v) grid with transport in both
coordinates and diffusion in v only, solved by dimensional splitting.

Monitors: pointwise stationary upper bound, per-step energy inequality for
int u^alpha, discrete maximum principle, and density/law distances.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate

from .fields import CoefficientField, Grid
from .laws import Law
from .report import Report

__all__ = [
    "DensityEvolution",
    "EnergyReport",
    "cfl_cap_1d",
    "cfl_cap_kinetic",
    "solve_fp_1d",
    "stationary_bound_check",
    "energy_monitor",
    "solve_kinetic",
    "max_principle_check",
    "law_compare",
]

MASS_TOL = 1e-10


@dataclass(frozen=True)
class DensityEvolution:
    """Density snapshots of an explicit conservative solver run."""

    grid: Grid
    times: np.ndarray       # (nt,)
    density: np.ndarray     # (nt, *grid.shape)
    scheme: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        density = np.asarray(self.density, dtype=float)
        if density.shape != (times.size,) + self.grid.shape:
            raise ValueError("density shape does not match grid and stamps")
        if density.min() < 0:
            raise ValueError("density must be nonnegative")
        drift = np.abs(self.mass(density) - 1.0)
        if drift.max() > MASS_TOL:
            raise ValueError(f"mass drift {drift.max():.3e} exceeds {MASS_TOL}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "density", density)

    def mass(self, density=None) -> np.ndarray:
        d = self.density if density is None else density
        return self.grid.cell_volume * d.reshape(d.shape[0], -1).sum(axis=1)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def as_law(self, stride: int = 1) -> Law:
        return Law.from_density_evolution(self, stride)

    def dump_csv(self, path, stride: int = 1) -> None:
        """One row per (time, node) observation."""
        g = self.grid
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{i}" for i in range(g.d)] + ["u"])
            mesh = [m.reshape(-1) for m in g.meshgrid()]
            for k in range(0, self.times.size, stride):
                t = self.times[k]
                flat = self.density[k].reshape(-1)
                for j in range(flat.size):
                    w.writerow([f"{t:.17g}"]
                               + [f"{m[j]:.17g}" for m in mesh]
                               + [f"{flat[j]:.17g}"])


@dataclass(frozen=True)
class EnergyReport:
    """Per-step audit of the discrete inequality
    (int u^alpha)_{k+1} <= (int u^alpha)_k * (1 + dt * budget_rate)."""

    alphas: tuple
    theta: float
    times: np.ndarray             # (nt,)
    values: np.ndarray            # (n_alpha, nt)
    budgets: np.ndarray           # (n_alpha, nt-1) right sides per step
    grad_a_lp: np.ndarray         # (nt,) ||grad a(t_k)||_{L^p}
    violations: int
    constant: float               # the frozen C''

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "alphas": list(self.alphas),
            "theta": self.theta,
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "budgets": self.budgets.tolist(),
            "grad_a_lp": self.grad_a_lp.tolist(),
            "violations": self.violations,
            "constant": self.constant,
            "passed": self.passed,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "alpha", "lhs", "budget"])
            for i, alpha in enumerate(self.alphas):
                for k in range(self.times.size - 1):
                    w.writerow([f"{self.times[k + 1]:.17g}", f"{alpha:.17g}",
                                f"{self.values[i, k + 1]:.17g}",
                                f"{self.budgets[i, k]:.17g}"])


# -- 1-D Fokker-Planck ------------------------------------------------------

def _coeffs_1d(field: CoefficientField):
    F = field.drift[:, 0]
    a = field.a[:, 0, 0]
    return F, a


def cfl_cap_1d(field: CoefficientField) -> float:
    """Largest stable explicit step: min(h/(2 sup|F|), h^2/(4 sup a))."""
    if field.grid.d != 1:
        raise ValueError("cfl_cap_1d needs a one-dimensional field")
    F, a = _coeffs_1d(field)
    h = field.grid.h[0]
    caps = []
    if np.abs(F).max() > 0:
        caps.append(h / (2.0 * np.abs(F).max()))
    if a.max() > 0:
        caps.append(h * h / (4.0 * a.max()))
    if not caps:
        raise ValueError("field has zero drift and zero diffusion")
    return float(min(caps))


def _project_initial(grid: Grid, u0) -> np.ndarray:
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != grid.shape:
        raise ValueError(f"initial density shape {u0.shape} != {grid.shape}")
    if u0.min() < 0:
        raise ValueError("initial density must be nonnegative")
    mass = grid.cell_volume * u0.sum()
    if mass <= 0:
        raise ValueError("initial density has zero mass")
    return u0 / mass


def _choose_steps(T: float, dt: float | None, cap: float):
    if dt is None:
        steps = max(1, int(np.ceil(T / (0.9 * cap))))
        return steps, T / steps
    if dt > cap * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3e} violates the stability cap {cap:.3e}")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("dt must divide the horizon T")
    return steps, dt


def _advect_upwind(u: np.ndarray, speed_half: np.ndarray) -> np.ndarray:
    """Interface fluxes of an upwind advection step (interior interfaces)."""
    return (np.maximum(speed_half, 0.0) * u[:-1]
            + np.minimum(speed_half, 0.0) * u[1:])


def solve_fp_1d(field: CoefficientField, u0, T: float, dt: float | None = None,
                record_every: int | None = None) -> DensityEvolution:
    """Explicit conservative finite-volume solve of the 1-D forward equation.

    Advection d/dx(F u) uses upwind interface fluxes; the diffusion term
    d^2/dx^2(a u) is differenced as a flux of d/dx(a u), so total mass
    telescopes exactly (zero flux through the boundary).
    """
    grid = field.grid
    if grid.d != 1:
        raise ValueError("solve_fp_1d needs a one-dimensional field")
    if grid.periodic[0]:
        raise ValueError("solve_fp_1d expects a non-periodic box")
    F, a = _coeffs_1d(field)
    if a.min() < 0:
        raise ValueError("diffusion coefficient must be nonnegative")
    h = grid.h[0]
    u = _project_initial(grid, u0)
    steps, dt = _choose_steps(T, dt, cfl_cap_1d(field))
    if record_every is None:
        record_every = max(1, steps // 200)
    F_half = 0.5 * (F[:-1] + F[1:])

    stamps = [0.0]
    slices = [u.copy()]
    for k in range(steps):
        au = a * u
        flux = _advect_upwind(u, F_half) - (au[1:] - au[:-1]) / h
        u = u.copy()
        u[:-1] -= dt / h * flux
        u[1:] += dt / h * flux
        np.maximum(u, 0.0, out=u)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            stamps.append((k + 1) * dt)
            slices.append(u.copy())
    return DensityEvolution(
        grid, np.array(stamps), np.array(slices),
        scheme={"dt": dt, "steps": steps, "flux": "upwind",
                "method": "fv_explicit_1d"},
    )


def stationary_bound_check(field: CoefficientField,
                           evolution: DensityEvolution, C: float,
                           rtol: float = 1e-6) -> Report:
    """Pointwise bound u(t,x) <= C/a(x) * exp(int_0^x F/a) at every stamp.

    The initial slice must comply; later slices are checked against the same
    envelope with a small relative slack for the scheme.
    """
    F, a = _coeffs_1d(field)
    if a.min() <= 0:
        raise ValueError("the bound needs a > 0 on the whole grid")
    x = field.grid.nodes(0)
    I = integrate.cumulative_trapezoid(F / a, x, initial=0.0)
    anchor = int(np.argmin(np.abs(x)))
    envelope = C / a * np.exp(I - I[anchor])
    slack = rtol * max(envelope.max(), 1.0)
    if np.any(evolution.density[0] > envelope + slack):
        raise ValueError("initial density violates the bound for this C")
    excess = evolution.density - envelope
    bad = excess > slack
    worst = float(excess.max())
    return Report(
        name="stationary_bound",
        passed=not bool(bad.any()),
        details={"C": C, "violating_stamps": int(bad.any(axis=1).sum()),
                 "worst_excess": worst, "rtol": rtol},
    )


def energy_monitor(evolution: DensityEvolution, field: CoefficientField,
                   alphas, p: float, q: float | None = None,
                   constant: float | None = None) -> EnergyReport:
    """Per-step check of the moment inequality for int u^alpha.

    Budget rate: C'' * (1 + ||grad a||_{L^p}^{2/theta}) with theta = 1 - d/p.
    The default C'' = max_alpha alpha(alpha-1)(1 + sup|F|^2/(2c)) was
    calibrated once on the pure-diffusion case (where the integral is
    nonincreasing and any nonnegative constant passes) and is frozen here;
    pass ``constant`` to override.
    """
    grid = evolution.grid
    if grid.d != 1:
        raise ValueError("energy_monitor covers the 1-D solver")
    if p <= grid.d:
        raise ValueError("the moment estimate needs p > d")
    theta = 1.0 - grid.d / p
    if q is not None and abs(1.0 / q - theta / 2.0) > 1e-6:
        raise ValueError("q must satisfy 1/q = theta/2 = 1/2 - d/(2p)")
    alphas = tuple(float(al) for al in alphas)
    if any(al < 2 for al in alphas):
        raise ValueError("alpha >= 2 is required")

    a = field.a[:, 0, 0]
    c = float(a.min())
    if c <= 0:
        raise ValueError("ellipticity constant on the grid must be positive")

    grad_a = np.gradient(a, grid.h[0], edge_order=2)
    lp = float((grid.cell_volume * np.sum(np.abs(grad_a) ** p)) ** (1.0 / p))

    sup_F = field.sup_drift
    if constant is None:
        constant = max(al * (al - 1.0) for al in alphas) \
            * (1.0 + sup_F * sup_F / (2.0 * c))
    rate = constant * (1.0 + lp ** (2.0 / theta))

    vol = grid.cell_volume
    nt = evolution.times.size
    values = np.empty((len(alphas), nt))
    for i, al in enumerate(alphas):
        values[i] = vol * (evolution.density.reshape(nt, -1) ** al).sum(axis=1)
    dts = np.diff(evolution.times)
    budgets = values[:, :-1] * (1.0 + dts * rate)
    violations = int(np.sum(values[:, 1:] > budgets * (1 + 1e-12)))
    return EnergyReport(
        alphas=alphas, theta=theta, times=evolution.times, values=values,
        budgets=budgets, grad_a_lp=np.full(nt, lp), violations=violations,
        constant=float(constant),
    )


# -- kinetic phase-space solver ---------------------------------------------

def _kinetic_coeffs(field: CoefficientField):
    if field.grid.d != 2:
        raise ValueError("the kinetic solver needs a 2-D (x, v) field")
    speed_x = field.drift[..., 0]
    speed_v = field.drift[..., 1]
    a_vv = field.a[..., 1, 1]
    if np.abs(field.a[..., 0, 0]).max() > 1e-14:
        raise ValueError("kinetic diffusion must act in v only")
    return speed_x, speed_v, a_vv


def cfl_cap_kinetic(field: CoefficientField) -> float:
    speed_x, speed_v, a_vv = _kinetic_coeffs(field)
    hx, hv = field.grid.h
    caps = []
    if np.abs(speed_x).max() > 0:
        caps.append(hx / (2.0 * np.abs(speed_x).max()))
    if np.abs(speed_v).max() > 0:
        caps.append(hv / (2.0 * np.abs(speed_v).max()))
    if a_vv.max() > 0:
        caps.append(hv * hv / (4.0 * a_vv.max()))
    if not caps:
        raise ValueError("field has zero transport and zero diffusion")
    return float(min(caps))


def _sweep(u: np.ndarray, speed: np.ndarray, h: float, dt: float,
           axis: int, flux: str) -> np.ndarray:
    """Conservative transport sweep along one axis; zero boundary flux."""
    if axis == 1:
        return _sweep(u.T, speed.T, h, dt, 0, flux).T
    s_half = 0.5 * (speed[:-1] + speed[1:])
    if flux == "upwind":
        phi = (np.maximum(s_half, 0.0) * u[:-1]
               + np.minimum(s_half, 0.0) * u[1:])
    elif flux == "centered":
        phi = s_half * 0.5 * (u[:-1] + u[1:])
    else:
        raise ValueError(f"unknown flux {flux!r}")
    out = u.copy()
    out[:-1] -= dt / h * phi
    out[1:] += dt / h * phi
    return out


def solve_kinetic(field: CoefficientField, u0, T: float,
                  dt: float | None = None, record_every: int | None = None,
                  flux: str = "upwind") -> DensityEvolution:
    """Dimensional-splitting solve of the phase-space forward equation.

    Per step: transport in x with speed drift_x (= v for the shipped preset),
    transport in v with speed drift_v, then flux-form diffusion in v with
    coefficient a_vv. Each sweep is conservative with zero boundary flux.

    ``flux="centered"`` swaps the transport sweeps to a non-monotone centered
    flux; it exists so the maximum-principle check can be shown to fail on a
    scheme that deserves it.
    """
    grid = field.grid
    speed_x, speed_v, a_vv = _kinetic_coeffs(field)
    hx, hv = grid.h
    u = _project_initial(grid, u0)
    steps, dt = _choose_steps(T, dt, cfl_cap_kinetic(field))
    if record_every is None:
        record_every = max(1, steps // 50)

    stamps = [0.0]
    slices = [u.copy()]
    for k in range(steps):
        u = _sweep(u, speed_x, hx, dt, axis=0, flux=flux)
        u = _sweep(u, speed_v, hv, dt, axis=1, flux=flux)
        if a_vv.max() > 0:
            au = a_vv * u
            g = (au[:, 1:] - au[:, :-1]) / hv
            u = u.copy()
            u[:, :-1] += dt / hv * g
            u[:, 1:] -= dt / hv * g
        if flux == "upwind":
            np.maximum(u, 0.0, out=u)
        else:
            u = np.maximum(u, 0.0)
            m = grid.cell_volume * u.sum()
            u = u / m
        if (k + 1) % record_every == 0 or k + 1 == steps:
            stamps.append((k + 1) * dt)
            slices.append(u.copy())
    return DensityEvolution(
        grid, np.array(stamps), np.array(slices),
        scheme={"dt": dt, "steps": steps, "flux": flux,
                "method": "splitting_kinetic"},
    )


def max_principle_check(evolution: DensityEvolution,
                        tolerance: float = 1e-8) -> Report:
    """max_x u(t_k) <= max_x u(0) * (1 + tolerance) at every stamp."""
    peaks = evolution.density.reshape(evolution.times.size, -1).max(axis=1)
    cap = peaks[0] * (1.0 + tolerance)
    bad = peaks > cap
    return Report(
        name="max_principle",
        passed=not bool(bad.any()),
        details={"initial_max": float(peaks[0]),
                 "worst_max": float(peaks.max()),
                 "violating_stamps": int(bad.sum()),
                 "tolerance": tolerance},
    )


# -- law comparison ----------------------------------------------------------

def _final_slice(law: Law, t: float | None):
    k = -1 if t is None else int(np.argmin(np.abs(law.times - t)))
    return law.density[k]


def _resample(values: np.ndarray, src: Grid, dst: Grid) -> np.ndarray:
    x_src = src.nodes(0)
    x_dst = dst.nodes(0)
    out = np.interp(x_dst, x_src, values, left=0.0, right=0.0)
    mass = dst.cell_volume * out.sum()
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"resampled mass {mass:.8f} deviates beyond 1e-6")
    return out / mass


def law_compare(lawA: Law, lawB: Law, t: float | None = None) -> dict:
    """L^1 and Wasserstein-1 distances between two 1-D laws.

    Compares single density slices (the final stamp by default, or the stamp
    nearest ``t`` in each law), resampling B onto A's grid if they differ.
    """
    if lawA.grid.d != 1 or lawB.grid.d != 1:
        raise ValueError("law_compare works on 1-D laws")
    ua = _final_slice(lawA, t)
    ub = _final_slice(lawB, t)
    if lawB.grid != lawA.grid:
        ub = _resample(ub, lawB.grid, lawA.grid)
    h = lawA.grid.h[0]
    l1 = float(h * np.abs(ua - ub).sum())
    cdf_gap = np.cumsum(ua - ub) * h
    w1 = float(h * np.abs(cdf_gap).sum())
    return {"l1": l1, "w1": w1}
