"""Grids, coefficient fields and mollification.

A field lives on a uniform tensor grid in dimension 1 or 2. Non-periodic
axes carry ``count + 1`` nodes including both endpoints; periodic axes carry
``count`` nodes (the right endpoint is identified with the left). Outside the
box a field is extended periodically or by its edge value, per axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import numpy as np
from scipy import ndimage

__all__ = [
    "Grid",
    "CoefficientField",
    "Mollifier",
    "make_grid",
    "preset_field",
    "mollify",
    "mollify_array",
    "PRESET_NAMES",
]

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    counts: tuple[int, ...]
    periodic: tuple[bool, ...]

    @property
    def d(self) -> int:
        return len(self.counts)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((u - l) / c for l, u, c in zip(self.lower, self.upper, self.counts))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c if p else c + 1 for c, p in zip(self.counts, self.periodic))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def nodes(self, axis: int = 0) -> np.ndarray:
        n = self.shape[axis]
        return self.lower[axis] + self.h[axis] * np.arange(n)

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.nodes(a) for a in range(self.d)), indexing="ij"))

    def extension_mode(self, axis: int = 0) -> str:
        """ndimage boundary mode implementing the extension rule."""
        return "wrap" if self.periodic[axis] else "nearest"

    @property
    def box_diameter(self) -> float:
        return float(np.hypot(*[u - l for l, u in zip(self.lower, self.upper)])) \
            if self.d == 2 else self.upper[0] - self.lower[0]


def make_grid(d, bounds, counts, periodic=False) -> Grid:
    """Build a uniform grid.

    bounds: (lo, hi) for d=1 or ((lo1, hi1), (lo2, hi2)) for d=2.
    counts: cell count per axis (scalar broadcasts).
    """
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if d == 1 and np.isscalar(bounds[0]):
        bounds = (bounds,)
    counts = (counts,) * d if np.isscalar(counts) else tuple(counts)
    periodic = (periodic,) * d if isinstance(periodic, bool) else tuple(periodic)
    if len(bounds) != d or len(counts) != d or len(periodic) != d:
        raise ValueError("bounds/counts/periodic must match dimension")
    lower, upper = [], []
    for (lo, hi) in bounds:
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("grid bounds must be finite")
        if not lo < hi:
            raise ValueError("grid bounds must satisfy lower < upper")
        lower.append(lo)
        upper.append(hi)
    for c in counts:
        if int(c) != c or c < MIN_CELLS:
            raise ValueError(f"cell count must be an integer >= {MIN_CELLS}, got {c}")
    return Grid(tuple(lower), tuple(upper), tuple(int(c) for c in counts), periodic)


def _check_psd(a: np.ndarray) -> None:
    # a has shape (..., d, d); for d<=2 the PSD test is cheap and explicit.
    d = a.shape[-1]
    if d == 1:
        ok = np.all(a[..., 0, 0] >= -1e-12)
    else:
        tr = a[..., 0, 0] + a[..., 1, 1]
        det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        ok = np.all(tr >= -1e-12) and np.all(det >= -1e-12 * (1.0 + tr ** 2))
    if not ok:
        raise ValueError("diffusion matrix a = sigma sigma*/2 is not positive semidefinite")


@dataclass(frozen=True)
class CoefficientField:
    """Drift F and diffusion sigma sampled on grid nodes (autonomous).

    drift has shape grid.shape + (d,), diffusion grid.shape + (d, r).
    ``provenance`` records the preset name, its parameters and the
    mollification scale delta (0 means unmollified).
    """

    grid: Grid
    drift: np.ndarray
    diffusion: np.ndarray
    provenance: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        d = self.grid.d
        drift = np.asarray(self.drift, dtype=float)
        diffusion = np.asarray(self.diffusion, dtype=float)
        if drift.shape != self.grid.shape + (d,):
            raise ValueError(f"drift shape {drift.shape} != {self.grid.shape + (d,)}")
        if diffusion.shape[:-1] != self.grid.shape + (d,) or diffusion.ndim != d + 2:
            raise ValueError(f"diffusion shape {diffusion.shape} invalid")
        if not (np.all(np.isfinite(drift)) and np.all(np.isfinite(diffusion))):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "diffusion", diffusion)
        _check_psd(self.a)

    @property
    def r(self) -> int:
        return self.diffusion.shape[-1]

    @property
    def a(self) -> np.ndarray:
        """a = sigma sigma*/2, shape grid.shape + (d, d)."""
        return 0.5 * np.einsum("...ik,...jk->...ij", self.diffusion, self.diffusion)

    @property
    def sup_drift(self) -> float:
        return float(np.max(np.linalg.norm(self.drift, axis=-1)))

    @property
    def sup_diffusion(self) -> float:
        return float(np.max(np.linalg.norm(self.diffusion, axis=(-2, -1))))

    @property
    def delta(self) -> float:
        return float(self.provenance.get("delta", 0.0))

    def dump_csv(self, path) -> None:
        """Node coordinates, drift components, diffusion components."""
        mesh = self.grid.meshgrid()
        coords = np.stack([m.ravel() for m in mesh], axis=1)
        drift = self.drift.reshape(-1, self.grid.d)
        diff = self.diffusion.reshape(coords.shape[0], -1)
        data = np.hstack([coords, drift, diff])
        header = ",".join(
            [f"x{i}" for i in range(self.grid.d)]
            + [f"F{i}" for i in range(self.grid.d)]
            + [f"sigma{i}{j}" for i in range(self.grid.d) for j in range(self.r)]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


PRESET_NAMES = (
    "ou",
    "heat",
    "sqrt_diffusion",
    "kink_drift",
    "degenerate_1d",
    "kinetic_langevin",
)


def _clip_abs(x):
    return np.minimum(np.abs(x), 1.0)


def preset_field(name: str, params: dict | None, grid: Grid) -> CoefficientField:
    """Analytic coefficient presets.

    ou:               F = -x, sigma = sqrt(2)            (stationary N(0,1))
    heat:             F = 0,  sigma = 1                  (a = 1/2)
    sqrt_diffusion:   F = 0,  sigma = sqrt(min(|x|,1)+kappa), kappa >= 0
    kink_drift:       F = beta*min(|x|,1)*sign(x), sigma = sigma0 (default 1)
    degenerate_1d:    F = 0,  sigma = min(|x|,1)         (a vanishes at 0)
    kinetic_langevin: on a 2-D (x,v) grid, the phase-space system
                      F = (v, -beta*min(|x|,1)*sign(x)), noise sqrt(2*temp)
                      acting on v only.
    """
    params = dict(params or {})
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")

    if name == "kinetic_langevin":
        if grid.d != 2:
            raise ValueError("kinetic_langevin needs a 2-D (x, v) phase-space grid")
        beta = float(params.pop("beta", 1.0))
        temp = float(params.pop("temp", 0.5))
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        if temp < 0:
            raise ValueError("temp must be >= 0")
        x, v = grid.meshgrid()
        drift = np.stack([v, -beta * _clip_abs(x) * np.sign(x)], axis=-1)
        diffusion = np.zeros(grid.shape + (2, 1))
        diffusion[..., 1, 0] = np.sqrt(2.0 * temp)
        prov = {"name": name, "params": {"beta": beta, "temp": temp}, "delta": 0.0}
        return CoefficientField(grid, drift, diffusion, prov)

    if name in ("ou", "heat"):
        # these two make sense in any dimension: isotropic noise, linear or
        # zero drift
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        pts = np.stack(grid.meshgrid(), axis=-1)
        scale = np.sqrt(2.0) if name == "ou" else 1.0
        drift = -pts if name == "ou" else np.zeros_like(pts)
        diffusion = np.broadcast_to(
            scale * np.eye(grid.d), grid.shape + (grid.d, grid.d)
        ).copy()
        prov = {"name": name, "params": {}, "delta": 0.0}
        return CoefficientField(grid, drift, diffusion, prov)

    if grid.d != 1:
        raise ValueError(f"preset {name!r} is one-dimensional")
    x = grid.nodes(0)
    if name == "sqrt_diffusion":
        kappa = float(params.pop("kappa", 0.0))
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        if kappa < 0:
            raise ValueError("kappa must be >= 0")
        F = np.zeros_like(x)
        sig = np.sqrt(_clip_abs(x) + kappa)
        used = {"kappa": kappa}
    elif name == "kink_drift":
        beta = float(params.pop("beta", 1.0))
        sigma0 = float(params.pop("sigma", 1.0))
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        F = beta * _clip_abs(x) * np.sign(x)
        sig = np.full_like(x, sigma0)
        used = {"beta": beta, "sigma": sigma0}
    else:  # degenerate_1d
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        F = np.zeros_like(x)
        sig = _clip_abs(x)
        used = {}
    prov = {"name": name, "params": used, "delta": 0.0}
    return CoefficientField(grid, F[:, None], sig[:, None, None], prov)


@dataclass(frozen=True)
class Mollifier:
    """Compactly supported smooth bump at scale delta, unit discrete mass."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("mollifier scale delta must be > 0")

    def profile(self, s: np.ndarray) -> np.ndarray:
        """Unnormalized bump exp(-1/(1-(s/delta)^2)) on |s| < delta."""
        s = np.asarray(s, dtype=float)
        q = (s / self.delta) ** 2
        out = np.zeros_like(q)
        inside = q < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - q[inside]))
        return out

    def taps_1d(self, h: float) -> np.ndarray:
        """Normalized discrete kernel at node offsets multiple of h."""
        if self.delta < 2.0 * h:
            raise ValueError(
                f"mollifier scale {self.delta} under-resolved on cell width {h}"
            )
        k = int(np.ceil(self.delta / h)) - 1
        w = self.profile(h * np.arange(-k, k + 1))
        total = w.sum()
        if total <= 0:
            raise ValueError("degenerate mollifier kernel")
        w = w / total
        assert abs(w.sum() - 1.0) < 1e-12
        return w

    def taps_radial(self, h: Sequence[float]) -> np.ndarray:
        """Normalized radial bump kernel on a 2-D cell lattice."""
        if self.delta < 2.0 * max(h):
            raise ValueError("mollifier scale under-resolved on this grid")
        ks = [int(np.ceil(self.delta / hi)) - 1 for hi in h]
        oi = h[0] * np.arange(-ks[0], ks[0] + 1)
        oj = h[1] * np.arange(-ks[1], ks[1] + 1)
        rr = np.hypot(oi[:, None], oj[None, :])
        w = self.profile(rr)
        total = w.sum()
        if total <= 0:
            raise ValueError("degenerate mollifier kernel")
        return w / total


def mollify_array(values: np.ndarray, grid: Grid, delta: float) -> np.ndarray:
    """Convolve node values with the unit-mass bump at scale delta.

    Trailing component axes (beyond grid.d) are smoothed independently.
    """
    moll = Mollifier(delta)
    values = np.asarray(values, dtype=float)
    extra = values.shape[grid.d:]
    flat = values.reshape(grid.shape + (-1,))
    out = np.empty_like(flat)
    if grid.d == 1:
        w = moll.taps_1d(grid.h[0])
        for c in range(flat.shape[-1]):
            out[:, c] = ndimage.correlate1d(
                flat[:, c], w, mode=grid.extension_mode(0)
            )
    else:
        w = moll.taps_radial(grid.h)
        modes = {grid.extension_mode(a) for a in range(2)}
        if len(modes) == 1:
            mode = modes.pop()
            for c in range(flat.shape[-1]):
                out[..., c] = ndimage.correlate(flat[..., c], w, mode=mode)
        else:
            ki, kj = (w.shape[0] - 1) // 2, (w.shape[1] - 1) // 2
            pad_modes = ["wrap" if grid.periodic[a] else "edge" for a in range(2)]
            for c in range(flat.shape[-1]):
                padded = np.pad(flat[..., c], ((ki, ki), (0, 0)), mode=pad_modes[0])
                padded = np.pad(padded, ((0, 0), (kj, kj)), mode=pad_modes[1])
                out[..., c] = ndimage.correlate(padded, w, mode="constant")[
                    ki:-ki or None, kj:-kj or None
                ]
    return out.reshape(values.shape)


def mollify(field: CoefficientField, delta: float) -> CoefficientField:
    """Smooth drift and diffusion at scale delta; provenance records delta."""
    drift = mollify_array(field.drift, field.grid, delta)
    diffusion = mollify_array(field.diffusion, field.grid, delta)
    prov = dict(field.provenance)
    prov["delta"] = float(delta)
    return replace(field, drift=drift, diffusion=diffusion, provenance=prov)
