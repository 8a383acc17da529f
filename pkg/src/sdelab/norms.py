"""Weighted Sobolev-type norms relative to a law.

Four functionals, each computable by grid quadrature and (where meaningful)
by a pathwise Monte Carlo estimator over a simulated ensemble:

* H1:       value^2 = int int (|f|^2 + (M|grad f|)^2) u dx dt
* W11:      value   = int int M|grad F| u dx dt
* WphiWeak: value   = sup_L phi(L)/(L log L) * int int (|F| + M_L|grad F|) u
* Hhalf:    value^2 = int int (M|d^(1/2) f|)^2 u dx dt   (1-D, periodic box)
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fields import Grid, mollify_array
from .laws import Law
from .maxops import (
    RadiusSchedule,
    gradient_magnitude,
    half_derivative,
    maximal,
    maximal_modified,
)
from .report import Report

__all__ = [
    "NormValue",
    "PhiWeight",
    "h1_norm",
    "w11_norm",
    "wphi_weak_norm",
    "h_half_norm",
    "semicontinuity_probe",
    "holder_domination_check",
]


@dataclass(frozen=True)
class NormValue:
    kind: str
    value: float
    method: str
    T: float
    mc_stderr: float | None = None
    L_grid: tuple | None = None
    argmax_L: float | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "method": self.method,
            "T": self.T,
            "mc_stderr": self.mc_stderr,
            "L_grid": list(self.L_grid) if self.L_grid is not None else None,
            "argmax_L": self.argmax_L,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class PhiWeight:
    """Super-linear weight phi for the weak drift norm.

    The default phi(L) = L*sqrt(1+log L) keeps the sup finite despite the
    additive sqrt(log L) inside M_L; with phi(L) = L log L that additive term
    alone makes the sup infinite for every drift.
    """

    name: str
    fn: callable

    def __call__(self, L):
        return self.fn(np.asarray(L, dtype=float))

    def weight(self, L):
        L = np.asarray(L, dtype=float)
        return self.fn(L) / (L * np.log(L))

    @classmethod
    def default(cls) -> "PhiWeight":
        return cls("default", lambda L: L * np.sqrt(1.0 + np.log(L)))

    @classmethod
    def appendix(cls, psi=None, C: float = 1.0) -> "PhiWeight":
        """Weight built from a de la Vallee Poussin modulus psi:
        L/phi(L) = C sqrt(log L)/log L + C sqrt(log L)/psi(sqrt(log L))."""
        if psi is None:
            psi = lambda s: s * s  # noqa: E731  (superlinear fallback modulus)

        def fn(L):
            s = np.sqrt(np.log(L))
            return L / (C * s / np.log(L) + C * s / psi(s))

        return cls("appendix", fn)

    def check_superlinear(self, L_grid) -> None:
        ratio = self(L_grid) / np.asarray(L_grid, dtype=float)
        if np.any(np.diff(ratio) < -1e-12):
            raise ValueError("phi(L)/L must be nondecreasing along the grid")


def _as_components(values, grid: Grid) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v.reshape(grid.shape + (-1,))


def _check_law(values, u: Law, T: float) -> None:
    if np.asarray(values).shape[: u.grid.d] != u.grid.shape:
        raise ValueError("field and law grids do not match")
    if u.times.size > 1 and T > u.T + 1e-12:
        raise ValueError("law does not cover the requested horizon")


def _sq_mag(comp: np.ndarray) -> np.ndarray:
    return np.sum(comp * comp, axis=-1)


def _pathwise_time_integral(ensemble, weight_grid: np.ndarray, T: float):
    """Per-path trapezoid of a grid function along paths; mean and stderr."""
    grid = ensemble.grid
    if grid.d != 1:
        raise ValueError("pathwise estimators are one-dimensional")
    keep = ensemble.times <= T + 1e-12
    t = ensemble.times[keep]
    x = ensemble.paths[:, keep, 0]
    vals = ensemble.interp_values(weight_grid, x)
    per_path = np.trapezoid(vals, t, axis=1)
    mean = float(per_path.mean())
    stderr = float(per_path.std(ddof=1) / np.sqrt(per_path.size))
    return mean, stderr


def _finish_sqrt(kind, total, method, T, se=None, **kw) -> NormValue:
    value = float(np.sqrt(max(total, 0.0)))
    mc = None
    if se is not None:
        mc = float(se / (2.0 * value)) if value > 0 else float(np.sqrt(se))
    return NormValue(kind, value, method, T, mc_stderr=mc, **kw)


def h1_norm(values, u: Law, T: float, method: str = "quadrature", *,
            ensemble=None, schedule: RadiusSchedule | None = None) -> NormValue:
    """H1(u) norm of a scalar or component-stacked field."""
    _check_law(values, u, T)
    comp = _as_components(values, u.grid)
    w = _sq_mag(comp) + maximal(gradient_magnitude(comp, u.grid),
                                u.grid, schedule) ** 2
    if method == "quadrature":
        return _finish_sqrt("H1", u.time_integral(w, T), method, T)
    if method != "pathwise":
        raise ValueError(f"unknown method {method!r}")
    if ensemble is None:
        raise ValueError("pathwise method needs an ensemble")
    mean, se = _pathwise_time_integral(ensemble, w, T)
    return _finish_sqrt("H1", mean, method, T, se=se)


def w11_norm(values, u: Law, T: float, *,
             schedule: RadiusSchedule | None = None) -> NormValue:
    """Degree-1 drift functional int int M|grad F| u dx dt."""
    _check_law(values, u, T)
    comp = _as_components(values, u.grid)
    w = maximal(gradient_magnitude(comp, u.grid), u.grid, schedule)
    return NormValue("W11", float(u.time_integral(w, T)), "quadrature", T)


def wphi_weak_norm(values, u: Law, T: float, phi: PhiWeight | None = None,
                   L_grid=None) -> NormValue:
    """sup over the L grid of phi(L)/(L log L) * int int (|F|+M_L|grad F|) u."""
    _check_law(values, u, T)
    if phi is None:
        phi = PhiWeight.default()
    if L_grid is None:
        L_grid = tuple(np.exp(np.arange(1, 9)))
    L_grid = tuple(float(L) for L in L_grid)
    if min(L_grid) < np.e - 1e-9:
        raise ValueError("L grid must start at or above L = e")
    phi.check_superlinear(L_grid)
    comp = _as_components(values, u.grid)
    mag = np.sqrt(_sq_mag(comp))
    gmag = gradient_magnitude(comp, u.grid)
    vals = []
    for L in L_grid:
        integrand = mag + maximal_modified(gmag, u.grid, L)
        vals.append(phi.weight(L) * u.time_integral(integrand, T))
    k = int(np.argmax(vals))
    return NormValue("WphiWeak", float(vals[k]), "quadrature", T,
                     L_grid=L_grid, argmax_L=L_grid[k])


def h_half_norm(values, u: Law, T: float, method: str = "quadrature", *,
                ensemble=None, schedule: RadiusSchedule | None = None) -> NormValue:
    """H^{1/2}(u) norm on a periodic 1-D grid."""
    if u.grid.d != 1:
        raise ValueError("h_half_norm is one-dimensional")
    _check_law(values, u, T)
    dh = half_derivative(np.asarray(values, dtype=float).reshape(u.grid.shape),
                         u.grid)
    w = maximal(np.abs(dh), u.grid, schedule) ** 2
    if method == "quadrature":
        return _finish_sqrt("Hhalf", u.time_integral(w, T), method, T)
    if method != "pathwise":
        raise ValueError(f"unknown method {method!r}")
    if ensemble is None:
        raise ValueError("pathwise method needs an ensemble")
    mean, se = _pathwise_time_integral(ensemble, w, T)
    return _finish_sqrt("Hhalf", mean, method, T, se=se)


_PROBE_KINDS = {"H1", "WphiWeak", "Hhalf"}


def _norm_of(kind, values, u, T):
    if kind == "H1":
        return h1_norm(values, u, T).value
    if kind == "WphiWeak":
        return wphi_weak_norm(values, u, T).value
    return h_half_norm(values, u, T).value


def semicontinuity_probe(values, grid: Grid, u: Law, deltas, kind: str = "H1",
                         T: float = 1.0, tolerance: float = 0.05) -> Report:
    """Lower-semicontinuity probes along mollification / law-smoothing schedules.

    Checks ||f|| <= min over the schedule tail of ||f_n|| (and the law-side
    variant) up to a relative tolerance.
    """
    if kind not in _PROBE_KINDS:
        raise ValueError(f"kind must be one of {_PROBE_KINDS}")
    deltas = sorted(float(d) for d in deltas)
    if len(deltas) < 4:
        raise ValueError("schedule needs at least 4 terms")
    base = _norm_of(kind, values, u, T)
    field_seq = [_norm_of(kind, mollify_array(values, grid, d), u, T)
                 for d in deltas]
    law_seq = [_norm_of(kind, values, u.smooth(d), T) for d in deltas]
    slack = tolerance * max(base, 1e-30)
    tail = len(deltas) // 2
    ok_field = base <= min(field_seq[:tail + 1]) + slack
    ok_law = base <= min(law_seq[:tail + 1]) + slack
    return Report(
        name=f"semicontinuity[{kind}]",
        passed=bool(ok_field and ok_law),
        details={
            "kind": kind,
            "norm": base,
            "deltas": deltas,
            "mollified_norms": field_seq,
            "smoothed_law_norms": law_seq,
            "tolerance": tolerance,
        },
    )


def holder_domination_check(values, u: Law, p: float, q: float,
                            T: float | None = None,
                            schedule: RadiusSchedule | None = None) -> Report:
    """Discrete Hoelder chain for the gradient part of the H1 norm.

    int int (M|grad f|)^2 u <= ||(M|grad f|)^2||_{L^q_t(L^p_x)}
                               * ||u||_{L^{q'}_t(L^{p'}_x)}
    holds exactly on matching discrete sums; p, q > 1 is required because the
    maximal operator is unbounded on L^1.
    """
    if p <= 1 or q <= 1:
        raise ValueError("p and q must be > 1")
    grid = u.grid
    comp = _as_components(values, grid)
    g2 = maximal(gradient_magnitude(comp, grid), grid, schedule) ** 2
    T = u.T if T is None else T
    lhs = u.time_integral(g2, T)

    pp = p / (p - 1)
    qq = q / (q - 1)
    vol = grid.cell_volume
    gx = (vol * np.sum(g2.reshape(-1) ** p)) ** (1.0 / p)
    ux = (vol * np.sum(u.density.reshape(u.times.size, -1) ** pp,
                       axis=1)) ** (1.0 / pp)
    t = u.times
    if t.size == 1:
        span = T
        g_tq = gx * span ** (1.0 / q)
        u_tq = ux[0] * span ** (1.0 / qq)
    else:
        keep = t <= T + 1e-12
        tt, uu = t[keep], ux[keep]
        g_tq = (np.trapezoid(np.full_like(tt, gx ** q), tt)) ** (1.0 / q)
        u_tq = (np.trapezoid(uu ** qq, tt)) ** (1.0 / qq)
    rhs = float(g_tq * u_tq)
    return Report(
        name="holder_domination",
        passed=bool(lhs <= rhs * (1 + 1e-12)),
        details={"lhs": float(lhs), "rhs": rhs, "p": p, "q": q,
                 "ratio": float(lhs / rhs) if rhs > 0 else 0.0},
    )
