"""Checkerboard Monte Carlo for the finite-box Gibbs measure.

Heat bath is the default: the single-site conditional is a finite sum plus
a geometric tail in t, so it can be sampled exactly; Metropolis (+-1 moves,
reflecting at the wall) is kept for cross-validation.  Randomness comes
from a counter-based Philox stream keyed by the seed with the (sweep,
color) pair on the counter, so runs are reproducible and same-color sites
could be updated in parallel without changing the stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Box
from .params import ModelParams


@dataclass(frozen=True)
class ChainConfig:
    box: Box
    params: ModelParams
    sweeps: int
    burn_in: int
    thin: int = 1
    seed: int = 0
    proposal_cap: int = 1
    sampler: str = "heat_bath"
    z_max: int | None = None
    n_batches: int = 32

    def __post_init__(self):
        if not (self.sweeps > self.burn_in >= 0):
            raise ValueError("need sweeps > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.sampler not in ("heat_bath", "metropolis"):
            raise ValueError(f"unknown sampler {self.sampler}")


@dataclass
class ObservableSet:
    rho0: float
    rho0_se: float
    rho_z: np.ndarray
    level_histogram: np.ndarray
    level_se: np.ndarray
    majority_level: int
    not_at_n: float
    not_at_n_se: float
    n_samples: int
    site_rho0: np.ndarray  # per-site wall-contact frequency

    def checks(self) -> None:
        if abs(self.level_histogram.sum() - 1.0) > 1e-12:
            raise AssertionError("histogram not normalized")
        if np.any(np.diff(self.rho_z) < -1e-15):
            raise AssertionError("rho_z not monotone")


def _tail_extension(t: float) -> int:
    # each level above every neighbour costs a factor t^2; keep omitted
    # conditional mass below 1e-14
    return min(max(2, math.ceil(14.0 / (2.0 * -math.log10(t)))), 600)


def _philox(seed: int, sweep: int, color: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.uint64(seed), counter=[np.uint64(sweep), np.uint64(color), 0, 0])
    )


class _Lattice:
    """Mutable height grid with checkerboard site indexing."""

    def __init__(self, box: Box):
        self.box = box
        self.h = np.full((box.height, box.width), box.boundary_level, dtype=np.int64)
        yy, xx = np.mgrid[0:box.height, 0:box.width]
        self.color_masks = [((xx + yy) % 2 == c) for c in (0, 1)]

    def neighbor_heights(self) -> np.ndarray:
        """(H, W, 4) array of neighbour heights with boundary padding."""
        n = self.box.boundary_level
        p = np.pad(self.h, 1, constant_values=n)
        return np.stack(
            [p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, :-2], p[1:-1, 2:]], axis=-1
        )


def heat_bath_color(lat: _Lattice, params: ModelParams, rng: np.random.Generator, color: int) -> None:
    nb = lat.neighbor_heights()
    mask = lat.color_masks[color]
    nbc = nb[mask]  # (nc, 4)
    if not len(nbc):
        return
    amax = int(nbc.max()) + _tail_extension(params.t)
    a = np.arange(amax + 1)
    dist = np.abs(a[None, :, None] - nbc[:, None, :]).sum(axis=2)
    logw = -params.two_beta_J * dist
    logw[:, 0] += params.u
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    cdf = np.cumsum(w, axis=1)
    r = rng.random(len(nbc)) * cdf[:, -1]
    new = (cdf < r[:, None]).sum(axis=1)
    lat.h[mask] = new


def metropolis_color(lat: _Lattice, params: ModelParams, rng: np.random.Generator, color: int, cap: int) -> None:
    nb = lat.neighbor_heights()
    mask = lat.color_masks[color]
    nbc = nb[mask]
    if not len(nbc):
        return
    cur = lat.h[mask]
    step = rng.integers(1, cap + 1, size=len(cur)) * np.where(rng.random(len(cur)) < 0.5, -1, 1)
    prop = cur + step
    ok = prop >= 0
    d_cur = np.abs(cur[:, None] - nbc).sum(axis=1)
    d_prop = np.abs(prop[:, None] - nbc).sum(axis=1)
    dlog = -params.two_beta_J * (d_prop - d_cur) + params.u * ((prop == 0) * 1.0 - (cur == 0))
    accept = ok & (np.log(rng.random(len(cur)) + 1e-300) < dlog)
    lat.h[mask] = np.where(accept, prop, cur)


def heat_bath_site_distribution(neighbors, params: ModelParams) -> np.ndarray:
    """Exact conditional over 0..max(neighbors)+tail; reference for tests."""
    nbs = np.asarray(neighbors)
    amax = int(nbs.max()) + _tail_extension(params.t)
    a = np.arange(amax + 1)
    logw = -params.two_beta_J * np.abs(a[:, None] - nbs[None, :]).sum(axis=1)
    logw[0] += params.u
    w = np.exp(logw - logw.max())
    return w / w.sum()


def run_chain(chain: ChainConfig) -> ObservableSet:
    box, params = chain.box, chain.params
    n = box.boundary_level
    z_max = chain.z_max if chain.z_max is not None else n + 4
    lat = _Lattice(box)
    n_samples = (chain.sweeps - chain.burn_in + chain.thin - 1) // chain.thin
    nb_batches = min(chain.n_batches, n_samples)
    # per-batch accumulators over levels 0..z_max plus an overflow bin
    level_acc = np.zeros((nb_batches, z_max + 2))
    site_zero = np.zeros((box.height, box.width))
    sample_idx = 0
    for sweep in range(chain.sweeps):
        for color in (0, 1):
            rng = _philox(chain.seed, sweep, color)
            if chain.sampler == "heat_bath":
                heat_bath_color(lat, params, rng, color)
            else:
                metropolis_color(lat, params, rng, color, chain.proposal_cap)
        if sweep < chain.burn_in or (sweep - chain.burn_in) % chain.thin:
            continue
        b = sample_idx * nb_batches // n_samples
        clipped = np.minimum(lat.h, z_max + 1)
        level_acc[b] += np.bincount(clipped.ravel(), minlength=z_max + 2)
        site_zero += lat.h == 0
        sample_idx += 1
    assert sample_idx == n_samples
    per_batch = level_acc / (level_acc.sum(axis=1, keepdims=True))
    hist = level_acc.sum(axis=0) / level_acc.sum()
    level_se = per_batch.std(axis=0, ddof=1) / math.sqrt(nb_batches) if nb_batches > 1 else np.zeros_like(hist)
    rho_z = np.cumsum(hist[: z_max + 1])
    not_at_n = 1.0 - hist[n]
    majority = int(np.argmax(hist))
    return ObservableSet(
        rho0=float(hist[0]),
        rho0_se=float(level_se[0]),
        rho_z=rho_z,
        level_histogram=hist,
        level_se=level_se,
        majority_level=majority,
        not_at_n=float(not_at_n),
        not_at_n_se=float(level_se[n]),
        n_samples=n_samples,
        site_rho0=site_zero / n_samples,
    )


@dataclass
class RhoBoundReport:
    level: int
    rho0: float
    rho0_se: float
    floor: float
    passed: bool
    converged: bool


def rho_lower_bound_check(
    level: int,
    params: ModelParams,
    side: int = 12,
    sweeps: int = 40_000,
    burn_in: int = 4_000,
    seed: int = 1,
) -> RhoBoundReport:
    """Estimate rho_0 with boundary at `level` and compare against the
    0.5 t^{2 level} floor (a heuristic threshold, not a paper constant)."""
    chain = ChainConfig(
        box=Box(side, side, boundary_level=level),
        params=params,
        sweeps=sweeps,
        burn_in=burn_in,
        seed=seed,
        z_max=level + 4,
    )
    obs = run_chain(chain)
    floor = 0.5 * params.t ** (2 * level)
    converged = obs.rho0_se < max(obs.rho0, floor) * 0.5 + 1e-12
    return RhoBoundReport(
        level=level,
        rho0=obs.rho0,
        rho0_se=obs.rho0_se,
        floor=floor,
        passed=obs.rho0 >= floor,
        converged=converged,
    )
