"""
Periodic pseudo-spectral core.

Fields live on the periodic interval [-L, L) sampled at N points. Spectra are
stored as the non-negative half of the discrete Fourier series,

    u(x) = sum_m c_m exp(i xi_m x),    xi_m = pi m / L,

so that ``cos(3x)`` on ``L = pi`` has ``c_3 = 1/2``. Real inputs give
conjugate-symmetric spectra, and the half-spectrum storage keeps every
inverse transform real by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

__all__ = [
    "Grid1D",
    "Field",
    "Spectrum",
    "make_grid",
    "forward",
    "inverse",
    "apply_multiplier",
    "derivative",
    "helmholtz_inverse",
    "helmholtz_grad",
    "dealiased_product",
    "lp_norm",
    "integral_moment",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L, L) with N samples."""

    L: float
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or not _is_power_of_two(int(self.N)) or self.N < 16:
            raise ValueError(f"N must be a power of two >= 16, got {self.N!r}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        """Frequency spacing pi / L."""
        return np.pi / self.L

    @property
    def nyquist(self) -> float:
        return self.dxi * (self.N // 2)

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L + self.dx * np.arange(self.N)
        x.setflags(write=False)
        return x

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers of the stored half spectrum, 0..N/2."""
        m = np.arange(self.N // 2 + 1)
        m.setflags(write=False)
        return m

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequencies of the stored half spectrum."""
        xi = self.dxi * self.modes
        xi.setflags(write=False)
        return xi

    @cached_property
    def full_xi(self) -> np.ndarray:
        """Full frequency ladder pi m / L for m in [-N/2, N/2), ascending."""
        xi = self.dxi * np.arange(-(self.N // 2), self.N // 2)
        xi.setflags(write=False)
        return xi

    @cached_property
    def _phase(self) -> np.ndarray:
        # samples start at x_0 = -L, so exp(-i xi_m x_0) = (-1)^m
        ph = np.where(self.modes % 2 == 0, 1.0, -1.0)
        ph.setflags(write=False)
        return ph

    @cached_property
    def _weights(self) -> np.ndarray:
        # multiplicity of each stored coefficient in the full two-sided sum
        w = np.full(self.N // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        w.setflags(write=False)
        return w

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the 2/3 rule (|m| <= N/3)."""
        mask = self.modes <= self.N // 3
        mask.setflags(write=False)
        return mask

    @cached_property
    def _ik(self) -> np.ndarray:
        ik = 1j * self.xi
        ik[-1] = 0.0
        ik.setflags(write=False)
        return ik

    @cached_property
    def _helm(self) -> np.ndarray:
        s = 1.0 / (1.0 + self.xi**2)
        s.setflags(write=False)
        return s

    @cached_property
    def _helm_grad(self) -> np.ndarray:
        s = 1j * self.xi / (1.0 + self.xi**2)
        s[-1] = 0.0
        s.setflags(write=False)
        return s


def make_grid(L: float, N: int) -> Grid1D:
    """Build a periodic grid on [-L, L) with N (power of two, >= 16) samples."""
    return Grid1D(float(L), int(N))


class Field:
    """Real samples of a function on a :class:`Grid1D`.

    Arithmetic between fields requires the same grid; scalars broadcast.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid1D, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field samples must be finite")
        values = values.copy()
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid1D, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, func(grid.x))

    @classmethod
    def constant(cls, grid: Grid1D, c: float) -> "Field":
        return cls(grid, np.full(grid.N, float(c)))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(grid, np.zeros(grid.N))

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        if isinstance(other, Field):
            raise TypeError("use dealiased_product for field products")
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / other)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(L={self.grid.L:g}, N={self.grid.N}, max|u|={np.abs(self.values).max():.3e})"


class Spectrum:
    """Half-spectrum coefficients c_m, m = 0..N/2, of a real field."""

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: Grid1D, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (grid.N // 2 + 1,):
            raise ValueError(f"expected {grid.N // 2 + 1} coefficients, got shape {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("spectrum coefficients must be finite")
        self.grid = grid
        self.coeffs = coeffs

    def full(self) -> np.ndarray:
        """Two-sided coefficients on ``grid.full_xi`` (m = -N/2 .. N/2-1)."""
        c = self.coeffs
        neg = np.conj(c[1:-1][::-1])
        # the stored Nyquist entry stands for m = -N/2 and m = +N/2 together
        return np.concatenate([[c[-1]], neg, c[:-1]])

    def energy(self) -> float:
        """sum_m |c_m|^2 over the two-sided spectrum (= mean of u^2)."""
        return float(np.sum(self.grid._weights * np.abs(self.coeffs) ** 2))


def _rfft(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    return np.fft.rfft(values) * (grid._phase / grid.N)


def _irfft(grid: Grid1D, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.irfft(coeffs * (grid._phase * grid.N), n=grid.N)


def forward(f: Field) -> Spectrum:
    return Spectrum(f.grid, _rfft(f.grid, f.values))


def inverse(s: Spectrum) -> Field:
    return Field(s.grid, _irfft(s.grid, s.coeffs))


def _symbol_on_grid(grid: Grid1D, m: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    sym = np.asarray(m(grid.xi), dtype=complex)
    sym = np.broadcast_to(sym, grid.xi.shape).copy()
    if not np.all(np.isfinite(sym)):
        raise ValueError("multiplier is not finite at some grid frequency")
    # the Nyquist mode is a cosine; only the conjugate-even part survives
    sym[-1] = sym[-1].real
    return sym


def apply_multiplier(s: Spectrum, m: Callable[[np.ndarray], np.ndarray]) -> Spectrum:
    """Multiply coefficients by the symbol ``m(xi)`` evaluated at xi >= 0.

    ``m`` must satisfy m(-xi) = conj(m(xi)); only the half spectrum is stored,
    so the negative frequencies follow from that symmetry.
    """
    return Spectrum(s.grid, s.coeffs * _symbol_on_grid(s.grid, m))


def derivative(f: Field) -> Field:
    g = f.grid
    return Field(g, _irfft(g, g._ik * _rfft(g, f.values)))


def helmholtz_inverse(f: Field) -> Field:
    """Solve (1 - d^2/dx^2) g = f, i.e. convolve with the periodized 0.5*exp(-|x|)."""
    g = f.grid
    return Field(g, _irfft(g, g._helm * _rfft(g, f.values)))


def helmholtz_grad(f: Field) -> Field:
    """d/dx (1 - d^2/dx^2)^{-1} f, symbol i xi / (1 + xi^2)."""
    g = f.grid
    return Field(g, _irfft(g, g._helm_grad * _rfft(g, f.values)))


def dealiased_product(f: Field, g: Field) -> Field:
    """Pointwise product with the 2/3 rule applied to both factors and the result."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    mask = grid.dealias_mask
    a = _irfft(grid, _rfft(grid, f.values) * mask)
    b = _irfft(grid, _rfft(grid, g.values) * mask)
    return Field(grid, _irfft(grid, _rfft(grid, a * b) * mask))


def lp_norm(f: Field, p: float = np.inf) -> float:
    """Grid L^p norm: (dx sum |u|^p)^(1/p), or max |u| for p = inf."""
    return _lp(f.values, f.grid.dx, p)


def _lp(values: np.ndarray, dx: float, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(dx * a.sum())
    if p == 2:
        return float(np.sqrt(dx * np.dot(a, a)))
    return float((dx * np.sum(a**p)) ** (1.0 / p))


def integral_moment(f: Field, k: int) -> float:
    """Rectangle-rule integral of u^k over one period, k in {1, 3}."""
    if k not in (1, 3):
        raise ValueError(f"unsupported moment power {k}")
    return float(f.grid.dx * np.sum(f.values**k))
