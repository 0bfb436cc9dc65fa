"""
Littlewood-Paley blocks and nonhomogeneous Besov norms on periodic grids.

The low-frequency cutoff ``chi`` equals 1 on |xi| <= 1 and vanishes for
|xi| >= 4/3; the annulus cutoff is ``phi(xi) = chi(xi/2) - chi(xi)``, which
equals 1 on 4/3 <= |xi| <= 2 and is supported in 3/4 <= |xi| <= 8/3. Block
j = -1 is ``chi(D)``, block j >= 0 is ``phi(2^-j D)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import Field, Grid1D, _irfft, _lp, _rfft, lp_norm

__all__ = [
    "smooth_step",
    "chi",
    "phi_lp",
    "LPFamily",
    "BesovParams",
    "build_family",
    "block",
    "blocks",
    "low_cutoff",
    "besov_norm",
    "besov_norm_from_blocks",
    "block_norms",
    "block_operator_norm",
    "product_estimate_ratio",
    "interpolation_ratio",
]


def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, G(t) + G(1-t) = 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = _h(t)
    b = _h(1.0 - t)
    return a / (a + b)


def chi(xi):
    return smooth_step((4.0 / 3.0 - np.abs(xi)) * 3.0)


def phi_lp(xi):
    return chi(np.asarray(xi, dtype=float) / 2.0) - chi(xi)


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = np.inf
    r: float = 1.0

    def __post_init__(self):
        if self.p < 1 or self.r < 1:
            raise ValueError(f"Besov exponents must satisfy p, r >= 1 (got p={self.p}, r={self.r})")


@dataclass(frozen=True)
class LPFamily:
    """The dyadic cutoff pair. Stateless; symbols are evaluated on demand."""

    def chi(self, xi):
        return chi(xi)

    def phi(self, xi):
        return phi_lp(xi)

    def j_max(self, grid: Grid1D) -> int:
        """Largest j whose annulus 3/4 * 2^j <= |xi| meets the grid's frequencies."""
        return int(np.floor(np.log2(grid.nyquist * 4.0 / 3.0)))

    def symbol(self, j: int, xi):
        xi = np.asarray(xi, dtype=float)
        if j <= -2:
            return np.zeros_like(xi)
        if j == -1:
            return chi(xi)
        return phi_lp(xi / 2.0**j)


def build_family() -> LPFamily:
    return LPFamily()


_FAMILY = LPFamily()


@lru_cache(maxsize=64)
def _block_symbols(grid: Grid1D) -> np.ndarray:
    """Rows are the block symbols for j = -1..j_max on the half spectrum."""
    jm = _FAMILY.j_max(grid)
    out = np.empty((jm + 2, grid.xi.size))
    for row, j in enumerate(range(-1, jm + 1)):
        out[row] = _FAMILY.symbol(j, grid.xi)
    out.setflags(write=False)
    return out


def block(f: Field, j: int) -> Field:
    grid = f.grid
    if j <= -2 or j > _FAMILY.j_max(grid):
        return Field.zeros(grid)
    sym = _block_symbols(grid)[j + 1]
    return Field(grid, _irfft(grid, sym * _rfft(grid, f.values)))


def blocks(f: Field) -> np.ndarray:
    """All block samples, shape (j_max + 2, N); row k holds block j = k - 1."""
    grid = f.grid
    coeffs = _rfft(grid, f.values)
    syms = _block_symbols(grid)
    return np.fft.irfft(syms * (coeffs * grid._phase * grid.N), n=grid.N, axis=-1)


def low_cutoff(f: Field, n: int) -> Field:
    """S_n f = sum of blocks -1 .. n-1."""
    if n < 0:
        raise ValueError(f"cutoff index must be >= 0, got {n}")
    grid = f.grid
    # telescoping: chi + sum_{q<n} phi(2^-q .) = chi(2^-n .)
    sym = chi(grid.xi / 2.0**n)
    return Field(grid, _irfft(grid, sym * _rfft(grid, f.values)))


def besov_norm_from_blocks(block_norms: np.ndarray, s: float, r: float) -> float:
    """Weighted l^r sum of per-block L^p norms (index 0 is j = -1)."""
    j = np.arange(-1, block_norms.size - 1)
    weighted = 2.0 ** (s * j) * block_norms
    if np.isinf(r):
        return float(weighted.max())
    if r == 1:
        return float(weighted.sum())
    return float(np.sum(weighted**r) ** (1.0 / r))


def block_norms(f: Field, p: float = np.inf) -> np.ndarray:
    """||Delta_j f||_{L^p} for j = -1..j_max."""
    dx = f.grid.dx
    return np.array([_lp(row, dx, p) for row in blocks(f)])


def besov_norm(f: Field, params: BesovParams | tuple) -> float:
    """Nonhomogeneous B^s_{p,r} norm, truncated at the grid's top block."""
    if not isinstance(params, BesovParams):
        params = BesovParams(*params)
    return besov_norm_from_blocks(block_norms(f, params.p), params.s, params.r)


def product_estimate_ratio(u: Field, v: Field, s: float, p: float = np.inf) -> float:
    """Empirical constant in ||uv||_B <= C (||u||_B ||v||_inf + ||v||_B ||u||_inf), B = B^s_{p,1}.

    The product is the exact pointwise product on the grid.
    """
    if s <= 0:
        raise ValueError("product estimate needs s > 0")
    prm = BesovParams(s, p, 1.0)
    bracket = besov_norm(u, prm) * lp_norm(v) + besov_norm(v, prm) * lp_norm(u)
    if bracket == 0:
        raise ZeroDivisionError("both fields vanish")
    uv = Field(u.grid, u.values * v.values)
    return besov_norm(uv, prm) / bracket


def interpolation_ratio(u: Field) -> float:
    """||u||_{B^1_{inf,1}} / sqrt(||u||_{B^0_{inf,inf}} ||u||_{B^2_{inf,inf}})."""
    norms = block_norms(u, np.inf)
    b0 = besov_norm_from_blocks(norms, 0.0, np.inf)
    if b0 == 0:
        raise ZeroDivisionError("interpolation ratio undefined for the zero field")
    b1 = besov_norm_from_blocks(norms, 1.0, 1.0)
    b2 = besov_norm_from_blocks(norms, 2.0, np.inf)
    return b1 / np.sqrt(b0 * b2)


def block_operator_norm(grid: Grid1D, j: int) -> float:
    """Exact L^inf -> L^inf norm of Delta_j on the grid (l^1 norm of its discrete kernel)."""
    delta = np.zeros(grid.N)
    delta[0] = 1.0
    kernel = block(Field(grid, delta), j).values
    return float(np.abs(kernel).sum())
