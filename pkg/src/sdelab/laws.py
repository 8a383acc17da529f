"""Time-indexed probability laws on a grid.

A Law stores one density slice per time stamp, normalized so that
``cell_volume * sum(density) == 1`` (Riemann weights; presets keep their mass
well inside the box, so endpoint weighting is immaterial).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .fields import Grid

__all__ = ["Law"]


@dataclass(frozen=True)
class Law:
    grid: Grid
    times: np.ndarray       # (nt,)
    density: np.ndarray     # (nt, *grid.shape), >= 0, mass 1 per slice

    def __post_init__(self):
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        density = np.asarray(self.density, dtype=float)
        if density.shape != (times.size,) + self.grid.shape:
            raise ValueError(
                f"density shape {density.shape} != {(times.size,) + self.grid.shape}"
            )
        if np.any(density < 0):
            raise ValueError("density must be nonnegative")
        mass = self.grid.cell_volume * density.reshape(times.size, -1).sum(axis=1)
        if np.any(np.abs(mass - 1.0) > 1e-8):
            raise ValueError("law slices must have unit mass (normalize first)")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "density", density)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    # -- constructors ------------------------------------------------------

    @staticmethod
    def _normalize(grid: Grid, slices: np.ndarray) -> np.ndarray:
        mass = grid.cell_volume * slices.reshape(slices.shape[0], -1).sum(axis=1)
        if np.any(mass <= 0):
            raise ValueError("cannot normalize a zero-mass slice")
        return slices / mass.reshape((-1,) + (1,) * (slices.ndim - 1))

    @classmethod
    def from_slices(cls, grid: Grid, times, slices) -> "Law":
        slices = np.atleast_2d(np.asarray(slices, dtype=float)) \
            if grid.d == 1 else np.asarray(slices, dtype=float)
        if slices.ndim == grid.d:
            slices = slices[None]
        return cls(grid, np.atleast_1d(times), cls._normalize(grid, slices))

    @classmethod
    def uniform(cls, grid: Grid, times, support: tuple | None = None) -> "Law":
        """Uniform density, optionally restricted to a sub-box (d=1)."""
        if support is None:
            u = np.ones(grid.shape)
        else:
            lo, hi = support
            x = grid.nodes(0)
            u = ((x >= lo) & (x <= hi)).astype(float)
            if grid.d == 2:
                u = u[:, None] * np.ones(grid.shape[1])
        return cls.from_slices(grid, times, np.broadcast_to(
            u, (np.atleast_1d(times).size,) + grid.shape).copy())

    @classmethod
    def gaussian(cls, grid: Grid, times, mean: float = 0.0, std: float = 1.0) -> "Law":
        if grid.d != 1:
            raise ValueError("gaussian constructor is one-dimensional")
        x = grid.nodes(0)
        u = np.exp(-0.5 * ((x - mean) / std) ** 2)
        return cls.from_slices(grid, times, np.broadcast_to(
            u, (np.atleast_1d(times).size,) + grid.shape).copy())

    @classmethod
    def from_ensemble(cls, ensemble, grid: Grid | None = None,
                      bandwidth: float | None = None) -> "Law":
        """Histogram (optionally kernel-smoothed) law of a path ensemble.

        bandwidth, if given, is the standard deviation of a Gaussian
        smoothing kernel in coordinate units (the documented option is two
        cell widths).
        """
        if grid is None:
            grid = ensemble.grid
        edge_list = []
        for ax in range(grid.d):
            x = grid.nodes(ax)
            h = grid.h[ax]
            edge_list.append(np.concatenate([[x[0] - h / 2], x + h / 2]))
        slices = np.empty((ensemble.times.size,) + grid.shape)
        for k in range(ensemble.times.size):
            pts = [np.clip(ensemble.paths[:, k, ax],
                           edge_list[ax][0], edge_list[ax][-1])
                   for ax in range(grid.d)]
            counts, _ = np.histogramdd(pts, bins=edge_list)
            slices[k] = counts / (counts.sum() * grid.cell_volume)
        if bandwidth is not None:
            for ax in range(grid.d):
                slices = ndimage.gaussian_filter1d(
                    slices, bandwidth / grid.h[ax], axis=1 + ax, mode="nearest"
                )
        return cls(grid, ensemble.times, cls._normalize(grid, slices))

    @classmethod
    def from_density_evolution(cls, evolution, stride: int = 1) -> "Law":
        return cls(
            evolution.grid,
            evolution.times[::stride],
            cls._normalize(evolution.grid, evolution.density[::stride]),
        )

    # -- operations --------------------------------------------------------

    def smooth(self, delta: float) -> "Law":
        """Heat-kernel smoothing at scale delta (weak-* probe sequences)."""
        sig = [delta / hi for hi in self.grid.h]
        axes = list(range(1, 1 + self.grid.d))
        out = self.density
        for ax, s in zip(axes, sig):
            out = ndimage.gaussian_filter1d(out, s, axis=ax, mode="nearest")
        return Law(self.grid, self.times, self._normalize(self.grid, out))

    def expectation(self, values: np.ndarray) -> np.ndarray:
        """Per-stamp expectation of a grid function."""
        v = np.asarray(values, dtype=float)
        flat = self.density.reshape(self.times.size, -1)
        return self.grid.cell_volume * flat @ v.reshape(-1)

    def time_integral(self, values: np.ndarray, T: float | None = None) -> float:
        """int_0^T E[values(X_t)] dt by trapezoid over the stamps."""
        e = self.expectation(values)
        t = self.times
        if t.size == 1:
            # single-slice law: treated as time-constant on [0, T]
            return float((T if T is not None else 1.0) * e[0])
        if T is not None:
            if T > t[-1] + 1e-12:
                raise ValueError("law does not cover the requested horizon")
            keep = t <= T + 1e-12
            t, e = t[keep], e[keep]
        return float(np.trapezoid(e, t))

    def marginal(self, axis: int) -> "Law":
        """1-D marginal of a 2-D law."""
        if self.grid.d != 2:
            raise ValueError("marginal needs a 2-D law")
        other = 1 - axis
        g = self.grid
        sub = Grid((g.lower[axis],), (g.upper[axis],), (g.counts[axis],),
                   (g.periodic[axis],))
        dens = self.density.sum(axis=2 if other == 1 else 1) * g.h[other]
        return Law(sub, self.times, self._normalize(sub, dens))
