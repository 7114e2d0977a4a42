"""Finite-box SOS model: configurations, energies, and a brute-force oracle.

Heights are nonnegative integers on the interior of a box; every site
outside the box is pinned at the boundary level n.  Energies are returned
as beta*H so the Gibbs weight is exp(-energy).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapNotConverged, EnumerationTooLarge
from .params import ModelParams

Site = tuple[int, int]


@dataclass(frozen=True)
class Box:
    width: int
    height: int
    boundary_level: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("box sides must be positive")
        if self.boundary_level < 0:
            raise ValueError("boundary level must be nonnegative")

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    def sites(self) -> list[Site]:
        """Row-major interior sites."""
        return [(x, y) for y in range(self.height) for x in range(self.width)]

    def site_index(self, site: Site) -> int:
        x, y = site
        return y * self.width + x

    def contains(self, site: Site) -> bool:
        x, y = site
        return 0 <= x < self.width and 0 <= y < self.height

    def bonds(self) -> list[tuple[int, int]]:
        """Bonds with at least one endpoint inside, as index pairs.

        Indices >= n_sites encode boundary sites (all at the boundary level);
        each boundary-crossing bond appears exactly once, so an exterior
        corner neighbour contributes through both of its bonds.
        """
        idx = {}
        pairs = []
        ext = self.n_sites
        for x, y in self.sites():
            i = self.site_index((x, y))
            for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
                q = (x + dx, y + dy)
                if self.contains(q):
                    j = self.site_index(q)
                    if i < j:
                        pairs.append((i, j))
                else:
                    pairs.append((i, ext))
        return pairs


@dataclass(frozen=True)
class HeightConfig:
    box: Box
    heights: tuple[int, ...]

    def __post_init__(self):
        if len(self.heights) != self.box.n_sites:
            raise ValueError("height array does not match box")
        if any(h < 0 for h in self.heights):
            raise ValueError("heights must be nonnegative")

    def height_at(self, site: Site) -> int:
        if self.box.contains(site):
            return self.heights[self.box.site_index(site)]
        return self.box.boundary_level


@dataclass(frozen=True)
class ExactOracleSettings:
    height_cap: int
    cap_tolerance: float = 1e-9
    state_guard: int = 10**9

    def __post_init__(self):
        if self.height_cap < 0:
            raise ValueError("height cap must be nonnegative")
        if self.cap_tolerance <= 0.0:
            raise ValueError("cap tolerance must be positive")


def gradient_sum(config: HeightConfig) -> int:
    """Sum of |phi_x - phi_x'| over bonds meeting the box (vertical plaquette count)."""
    box = config.box
    hs = config.heights
    n = box.boundary_level
    total = 0
    for i, j in box.bonds():
        hi = hs[i]
        hj = hs[j] if j < box.n_sites else n
        total += abs(hi - hj)
    return total


def wall_contacts(config: HeightConfig) -> int:
    return sum(1 for h in config.heights if h == 0)


def energy(config: HeightConfig, params: ModelParams) -> float:
    """beta*H from the bond form: 2bJ * sum|grad phi| - u * #(wall contacts)."""
    return params.two_beta_J * gradient_sum(config) - params.u * wall_contacts(config)


def interface_plaquettes(config: HeightConfig) -> tuple[int, int]:
    """(total plaquettes, plaquettes in the wall plane) of the interface surface.

    Built directly from the 3d surface: one horizontal plaquette per site at
    its height, and |phi_x - phi_x'| vertical plaquettes per bond.  Kept
    independent of the bond-sum energy so the two can cross-check.
    """
    box = config.box
    horizontal = box.n_sites
    at_wall = 0
    vertical = 0
    n = box.boundary_level
    hs = config.heights
    for (x, y) in box.sites():
        if hs[box.site_index((x, y))] == 0:
            at_wall += 1
    for i, j in box.bonds():
        hi = hs[i]
        hj = hs[j] if j < box.n_sites else n
        vertical += abs(hi - hj)
    return horizontal + vertical, at_wall


def energy_cylinder_form(config: HeightConfig, params: ModelParams) -> float:
    """beta*H from the interface-area form: 2bJ(|I| - |Lambda|) - u |I ∩ W|."""
    total, at_wall = interface_plaquettes(config)
    return params.two_beta_J * (total - config.box.n_sites) - params.u * at_wall


def _config_energies(box: Box, params: ModelParams, cap: int) -> np.ndarray:
    """beta*H for every height assignment in {0..cap}^Lambda, enumeration order
    = itertools.product over row-major sites."""
    m = box.n_sites
    base = cap + 1
    if base**m > 10**9:
        raise EnumerationTooLarge(f"{base}^{m} states exceed the guard")
    # chunk over the first site's height to bound memory
    rest = base ** (m - 1)
    bonds = box.bonds()
    n = box.boundary_level
    out = np.empty(base**m, dtype=np.float64)
    if m == 1:
        h0 = np.arange(base)
        grad = np.zeros(base)
        for i, j in bonds:
            grad += np.abs(h0 - n)
        out[:] = params.two_beta_J * grad - params.u * (h0 == 0)
        return out
    # heights of sites 1..m-1 for one chunk
    idx = np.arange(rest)
    cols = []
    for k in range(m - 1, 0, -1):
        cols.append((idx // base ** (m - 1 - k)) % base)
    cols.reverse()  # cols[k-1] = heights of site k
    tail = np.stack(cols, axis=0)  # shape (m-1, rest)
    for h0 in range(base):
        heights = np.vstack([np.full(rest, h0, dtype=np.int64), tail])
        grad = np.zeros(rest, dtype=np.int64)
        for i, j in bonds:
            hi = heights[i]
            hj = heights[j] if j < m else n
            grad = grad + np.abs(hi - hj)
        wall = (heights == 0).sum(axis=0)
        out[h0 * rest:(h0 + 1) * rest] = params.two_beta_J * grad - params.u * wall
    return out


def _log_partition_at_cap(box: Box, params: ModelParams, cap: int) -> float:
    e = _config_energies(box, params, cap)
    emin = e.min()
    return float(-emin + np.log(math.fsum(np.exp(-(e - emin)))))


def exact_partition(box: Box, params: ModelParams, settings: ExactOracleSettings) -> tuple[float, float]:
    """(Z, log Z) summed over all heights in {0..height_cap}^Lambda.

    Raises CapNotConverged unless raising the cap by one changes log Z by
    less than the declared tolerance.
    """
    log_z = _log_partition_at_cap(box, params, settings.height_cap)
    log_z_up = _log_partition_at_cap(box, params, settings.height_cap + 1)
    if abs(log_z_up - log_z) >= settings.cap_tolerance:
        raise CapNotConverged(
            f"log Z moved by {abs(log_z_up - log_z):.3e} when the cap rose "
            f"from {settings.height_cap} to {settings.height_cap + 1}"
        )
    return math.exp(log_z), log_z


def exact_expectation(
    box: Box,
    params: ModelParams,
    settings: ExactOracleSettings,
    observable: Callable[[np.ndarray], np.ndarray],
) -> float:
    """Gibbs expectation of `observable` under the finite-volume measure.

    `observable` must accept a heights array of shape (n_configs, n_sites)
    and return one value per configuration (vectorized over the leading
    axis).  Normalization and the cap-convergence check follow
    exact_partition.
    """
    exact_partition(box, params, settings)  # cap check
    cap = settings.height_cap
    base = cap + 1
    m = box.n_sites
    e = _config_energies(box, params, cap)
    emin = e.min()
    w = np.exp(-(e - emin))
    idx = np.arange(base**m)
    cols = [(idx // base ** (m - 1 - k)) % base for k in range(m)]
    heights = np.stack(cols, axis=1)  # (n_configs, m), row-major site order
    vals = np.asarray(observable(heights), dtype=np.float64)
    return float(np.dot(w, vals) / w.sum())


def exact_level_distribution(
    box: Box, params: ModelParams, settings: ExactOracleSettings, z_max: int
) -> np.ndarray:
    """P(phi_x = z) averaged over interior sites, for z = 0..z_max."""
    exact_partition(box, params, settings)
    cap = settings.height_cap
    base = cap + 1
    m = box.n_sites
    e = _config_energies(box, params, cap)
    emin = e.min()
    w = np.exp(-(e - emin))
    idx = np.arange(base**m)
    probs = np.zeros(z_max + 1)
    for k in range(m):
        hk = (idx // base ** (m - 1 - k)) % base
        for z in range(min(z_max, cap) + 1):
            probs[z] += np.dot(w, (hk == z).astype(np.float64))
    probs /= w.sum() * m
    return probs


def all_configs(box: Box, cap: int):
    """Iterate every HeightConfig with heights in {0..cap}; test helper."""
    for hs in itertools.product(range(cap + 1), repeat=box.n_sites):
        yield HeightConfig(box, hs)
