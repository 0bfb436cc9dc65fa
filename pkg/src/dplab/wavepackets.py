"""
Wavepacket families f_n, g_n built from a band-limited envelope.

The envelope phi is the inverse transform of a smooth even bump ``hat_phi``
that equals 1 on |xi| <= 1/4 and vanishes for |xi| >= 1/2. On the periodic
grid phi is defined spectrally, so it is exactly band-limited; the decay of
phi toward the interval ends is reported as ``tail_ratio``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .littlewood_paley import BesovParams, besov_norm, block_norms, besov_norm_from_blocks, smooth_step
from .spectral import Field, Grid1D, _irfft, derivative, lp_norm, make_grid

__all__ = [
    "CARRIER_RATIO",
    "hat_phi",
    "Envelope",
    "PacketParams",
    "make_envelope",
    "make_fn",
    "make_gn",
    "carrier",
    "grid_for_packets",
    "packet_diagnostics",
]

CARRIER_RATIO = 17.0 / 12.0
DEFAULT_L = 12.0 * np.pi
TAIL_POINTS = 5


def hat_phi(xi):
    """Even bump: 1 on |xi| <= 1/4, 0 on |xi| >= 1/2, smooth step in between."""
    return smooth_step((0.5 - np.abs(np.asarray(xi, dtype=float))) / 0.25)


def carrier(n: int) -> float:
    return CARRIER_RATIO * 2.0**n


def grid_for_packets(n_max: int, L: float = DEFAULT_L, nyquist_factor: float = 3.0) -> Grid1D:
    """Smallest power-of-two grid whose Nyquist frequency is >= nyquist_factor * carrier(n_max).

    With the 2/3 rule, a factor of 3 keeps the carrier's second harmonic inside
    the retained band.
    """
    target = nyquist_factor * carrier(n_max)
    N = 16
    while np.pi / L * (N // 2) < target:
        N *= 2
    return make_grid(L, N)


@dataclass(frozen=True)
class Envelope:
    grid: Grid1D
    phi: Field
    phi0: float
    tail_ratio: float
    hat_support: tuple = (0.25, 0.5)


@dataclass(frozen=True)
class PacketParams:
    n: int
    grid: Grid1D

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"packet index must be >= 1, got {self.n}")
        m = self.carrier / self.grid.dxi
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ValueError(f"carrier {self.carrier:g} is not a grid frequency (L={self.grid.L:g})")
        if self.grid.nyquist < 2.0 * self.carrier:
            raise ValueError(
                f"Nyquist {self.grid.nyquist:g} below twice the carrier {self.carrier:g}; increase N"
            )

    @property
    def carrier(self) -> float:
        return carrier(self.n)

    @property
    def amplitude_f(self) -> float:
        return 2.0 ** (-self.n)

    @property
    def amplitude_g(self) -> float:
        return 2.0 ** (-self.n) / CARRIER_RATIO


def make_envelope(grid: Grid1D, tail_tol: float | None = None) -> Envelope:
    """Sample hat_phi on the grid ladder and invert.

    Requires frequency spacing <= 1/12 so the glue region is resolved. When
    ``tail_tol`` is given, a tail ratio above it raises ``ValueError``.
    """
    if grid.dxi > 1.0 / 12.0 + 1e-15:
        raise ValueError(f"frequency spacing {grid.dxi:g} > 1/12; use L >= 12*pi")
    coeffs = hat_phi(grid.xi) / (2.0 * grid.L)
    phi = Field(grid, _irfft(grid, coeffs.astype(complex)))
    phi0 = float(np.sum(grid._weights * coeffs).real)
    edge = np.abs(np.concatenate([phi.values[: TAIL_POINTS + 1], phi.values[-TAIL_POINTS:]]))
    tail = float(edge.max() / phi0)
    if tail_tol is not None and tail > tail_tol:
        raise ValueError(
            f"envelope tail {tail:.2e} * phi(0) near +-L exceeds tolerance {tail_tol:.1e}; enlarge L"
        )
    return Envelope(grid=grid, phi=phi, phi0=phi0, tail_ratio=tail)


def make_fn(env: Envelope, n: int) -> Field:
    """f_n = 2^-n phi(x) sin(17/12 2^n x)."""
    prm = PacketParams(n, env.grid)
    x = env.grid.x
    return Field(env.grid, prm.amplitude_f * env.phi.values * np.sin(prm.carrier * x))


def make_gn(env: Envelope, n: int) -> Field:
    """g_n = (12/17) 2^-n phi(x)."""
    if n < 1:
        raise ValueError(f"packet index must be >= 1, got {n}")
    return Field(env.grid, 2.0 ** (-n) / CARRIER_RATIO * env.phi.values)


def packet_diagnostics(env: Envelope, n_range, sigma_list) -> list[dict]:
    """Norm table for the packet families.

    One row per (n, sigma) with keys ``n, sigma, norm_f, norm_g, linf_f,
    linf_g, prod_fg, prod_gg``; the last two are B^1_{inf,inf} norms of
    g_n d/dx f_n and g_n d/dx g_n and do not depend on sigma.
    """
    rows = []
    for n in n_range:
        f = make_fn(env, n)
        g = make_gn(env, n)
        bf = block_norms(f)
        bg = block_norms(g)
        # exact pointwise products; the spectra stay far below Nyquist
        gfx = Field(env.grid, g.values * derivative(f).values)
        ggx = Field(env.grid, g.values * derivative(g).values)
        prod_fg = besov_norm(gfx, BesovParams(1.0, np.inf, np.inf))
        prod_gg = besov_norm(ggx, BesovParams(1.0, np.inf, np.inf))
        for sigma in sigma_list:
            rows.append(
                dict(
                    n=int(n),
                    sigma=float(sigma),
                    norm_f=besov_norm_from_blocks(bf, sigma, 1.0),
                    norm_g=besov_norm_from_blocks(bg, sigma, 1.0),
                    linf_f=lp_norm(f),
                    linf_g=lp_norm(g),
                    prod_fg=prod_fg,
                    prod_gg=prod_gg,
                )
            )
    return rows
