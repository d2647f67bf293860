"""Spectral representation of periodic vector fields on the 2*pi box.

A field is stored as the complex Fourier coefficients w_hat(k) of a real,
zero-mean, 3-component field w(x) sampled on a uniform n^3 grid.  The
coefficients are normalized so that

    w(x)     = sum_k w_hat(k) exp(+i k.x),
    w_hat(k) = (2 pi)^-3 integral w(x) exp(-i k.x) dx,

which makes Parseval read (2 pi)^-3 int |w|^2 dx = sum_k |w_hat(k)|^2 and
turns Sobolev norms into plain weighted coefficient sums,

    ||w||_s^2 = sum_{k != 0} |k|^{2s} |w_hat(k)|^2.

Wavenumber components run over 0, 1, ..., n/2-1, -n/2, ..., -1 per axis
(FFT storage order).  The Nyquist planes (component exactly -n/2) are kept
in storage but the field constructors in this package pin them to zero, so
the active mode set is closed under negation as a real field requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
BOX_VOLUME = TWO_PI**3


class Grid:
    """Uniform n^3 Fourier grid with cached wavenumber arrays.

    The dealias cutoff retains modes with |k|_inf <= floor(dealias_fraction
    * n/2); the default fraction 2/3 is the classical rule that keeps
    quadratic products alias-free on the retained band.
    """

    def __init__(self, n: int, dealias_fraction: float = 2.0 / 3.0):
        if n % 2 != 0 or n < 4:
            raise ValueError(f"grid size must be even and >= 4, got {n}")
        if not 0.0 < dealias_fraction <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {dealias_fraction}")
        self.n = int(n)
        self.dealias_fraction = float(dealias_fraction)

        k1 = np.fft.fftfreq(n, 1.0 / n)  # 0, 1, ..., n/2-1, -n/2, ..., -1
        self.kx = k1.reshape(n, 1, 1)
        self.ky = k1.reshape(1, n, 1)
        self.kz = k1.reshape(1, 1, n)
        self.k_sq = self.kx**2 + self.ky**2 + self.kz**2
        self.k_mag = np.sqrt(self.k_sq)
        self.k_linf = np.maximum(np.abs(self.kx), np.maximum(np.abs(self.ky), np.abs(self.kz)))

        self.dealias_cutoff = int(np.floor(self.dealias_fraction * (n // 2)))
        self.dealias_mask = self.k_linf <= self.dealias_cutoff
        # Modes whose negation is also representable; excludes the -n/2 planes.
        self.negation_closed_mask = self.k_linf <= (n // 2 - 1)

        self._k_sq_safe = self.k_sq.copy()
        self._k_sq_safe[0, 0, 0] = 1.0

    def wavevectors(self):
        return self.kx, self.ky, self.kz

    def mode_index(self, k) -> tuple[int, int, int]:
        """Storage index of integer wavevector k (components may be negative)."""
        return tuple(int(c) % self.n for c in k)

    def mesh(self):
        """Physical collocation points as three (n, n, n) arrays."""
        x1 = TWO_PI * np.arange(self.n) / self.n
        return np.meshgrid(x1, x1, x1, indexing="ij")

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.n == other.n
            and self.dealias_fraction == other.dealias_fraction
        )

    def __repr__(self):
        return f"Grid(n={self.n}, dealias_fraction={self.dealias_fraction:g})"


@dataclass
class SpectralField:
    """Fourier coefficients of a real, zero-mean, 3-component field."""

    grid: Grid
    coeffs: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = self.grid.n
        c = np.asarray(self.coeffs)
        if c.shape != (3, n, n, n):
            raise ValueError(f"coefficients must have shape (3, {n}, {n}, {n}), got {c.shape}")
        if c.dtype != np.complex128:
            c = c.astype(np.complex128)
        self.coeffs = c

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.t)

    def with_coeffs(self, coeffs: np.ndarray, t: float | None = None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.t if t is None else t)


def zeros(grid: Grid, t: float = 0.0) -> SpectralField:
    return SpectralField(grid, np.zeros((3, grid.n, grid.n, grid.n), dtype=np.complex128), t)


def to_physical(f: SpectralField) -> np.ndarray:
    """Collocation samples of the field, shape (3, n, n, n), real."""
    n = f.grid.n
    return np.fft.ifftn(f.coeffs, axes=(1, 2, 3)).real * n**3


def from_physical(grid: Grid, samples: np.ndarray, t: float = 0.0) -> SpectralField:
    """Transform real collocation samples into a SpectralField."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (3, grid.n, grid.n, grid.n):
        raise ValueError(
            f"samples must have shape (3, {grid.n}, {grid.n}, {grid.n}), got {samples.shape}"
        )
    coeffs = np.fft.fftn(samples, axes=(1, 2, 3)) / grid.n**3
    return SpectralField(grid, coeffs, t)


def _mode_energy_density(f: SpectralField) -> np.ndarray:
    c = f.coeffs
    return c.real**2 + c.imag**2


def hs_norm(f: SpectralField, s: float) -> float:
    """Sobolev norm of order s; the k = 0 mode is always excluded.

    For s = 0 this is the L2 norm under the fixed (2 pi)^-3 normalization.
    """
    w2 = _mode_energy_density(f).sum(axis=0)
    g = f.grid
    if s == 0:
        total = w2.sum() - w2[0, 0, 0]
    elif s == 1:
        total = (w2 * g.k_sq).sum()
    elif s == 2:
        total = (w2 * g.k_sq**2).sum()
    else:
        with np.errstate(divide="ignore"):
            weights = np.where(g.k_sq > 0, g.k_mag ** (2.0 * s), 0.0)
        total = (w2 * weights).sum()
    return float(np.sqrt(total))


def energy(f: SpectralField) -> float:
    """Total kinetic energy (1/2) sum_k |w_hat(k)|^2."""
    return float(0.5 * _mode_energy_density(f).sum())


def inner(f: SpectralField, g: SpectralField) -> float:
    """Real L2 pairing (2 pi)^-3 int f.g dx = sum_k Re f_hat(k).conj(g_hat(k))."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    c, d = f.coeffs, g.coeffs
    return float((c.real * d.real + c.imag * d.imag).sum())


def shell_spectrum(f: SpectralField) -> np.ndarray:
    """Shell energies E(m), m = 1, 2, ..., with shell m holding m-1 < |k| <= m.

    The shell count follows the largest |k| present on the grid (the cube
    corners reach beyond n/2), so the shell energies regroup exactly the same
    summands as energy(): sum(shell_spectrum(f)) == energy(f) up to rounding.
    """
    density = 0.5 * _mode_energy_density(f).sum(axis=0)
    idx = np.ceil(f.grid.k_mag).astype(np.int64)
    shells = np.bincount(idx.ravel(), weights=density.ravel())
    return shells[1:]


def leray_project(f: SpectralField) -> SpectralField:
    """Projection onto divergence-free fields, mode by mode; k = 0 untouched."""
    g = f.grid
    c = f.coeffs.copy()
    dot = g.kx * c[0] + g.ky * c[1] + g.kz * c[2]
    factor = dot / g._k_sq_safe
    c[0] -= g.kx * factor
    c[1] -= g.ky * factor
    c[2] -= g.kz * factor
    return f.with_coeffs(c)


def project_pn(f: SpectralField, m: int) -> SpectralField:
    """Truncation to the cube of modes with |k|_inf <= m."""
    if m < 0:
        raise ValueError(f"truncation degree must be >= 0, got {m}")
    if m >= f.grid.n // 2:
        return f.copy()
    return f.with_coeffs(f.coeffs * (f.grid.k_linf <= m))


def project_ball(f: SpectralField, k_max: float) -> SpectralField:
    """Truncation to the ball of modes with Euclidean |k| <= k_max."""
    if k_max < 0:
        raise ValueError(f"ball radius must be >= 0, got {k_max}")
    return f.with_coeffs(f.coeffs * (f.grid.k_mag <= k_max))


def gradient(f: SpectralField) -> np.ndarray:
    """Spectral gradient; out[i, j] holds the coefficients of d_j f_i."""
    g = f.grid
    n = g.n
    out = np.empty((3, 3, n, n, n), dtype=np.complex128)
    for j, kj in enumerate(g.wavevectors()):
        out[:, j] = 1j * kj * f.coeffs
    return out


def laplacian(f: SpectralField) -> SpectralField:
    return f.with_coeffs(-f.grid.k_sq * f.coeffs)


def curl(f: SpectralField) -> SpectralField:
    g = f.grid
    c = f.coeffs
    out = np.empty_like(c)
    out[0] = 1j * (g.ky * c[2] - g.kz * c[1])
    out[1] = 1j * (g.kz * c[0] - g.kx * c[2])
    out[2] = 1j * (g.kx * c[1] - g.ky * c[0])
    return f.with_coeffs(out)


def divergence(f: SpectralField) -> np.ndarray:
    """Scalar coefficients of div f."""
    g = f.grid
    c = f.coeffs
    return 1j * (g.kx * c[0] + g.ky * c[1] + g.kz * c[2])


def reflected_conjugate(coeffs: np.ndarray) -> np.ndarray:
    """conj(a(-k)) arranged on the same storage layout as a(k)."""
    r = coeffs
    for ax in (1, 2, 3) if coeffs.ndim == 4 else (0, 1, 2):
        r = np.roll(np.flip(r, axis=ax), 1, axis=ax)
    return np.conj(r)


def symmetry_defect(f: SpectralField) -> float:
    """Max deviation from the conjugate symmetry of a real field."""
    return float(np.abs(f.coeffs - reflected_conjugate(f.coeffs)).max())


def solenoidal_defect(f: SpectralField) -> float:
    """Relative divergence content, ||(I - P) f|| / ||f|| with P the Leray projection."""
    norm = hs_norm(f, 0)
    if norm == 0.0:
        return 0.0
    residual = f.coeffs - leray_project(f).coeffs
    return float(np.sqrt((residual.real**2 + residual.imag**2).sum()) / norm)


def validate_field(
    f: SpectralField,
    solenoidal: bool = False,
    tol: float = 1e-12,
) -> None:
    """Assert the representation invariants; raises ValueError on violation."""
    c = f.coeffs
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients contain non-finite values")
    mean = np.abs(c[:, 0, 0, 0]).max()
    scale = max(np.abs(c).max(), 1.0)
    if mean > tol * scale:
        raise ValueError(f"k = 0 mode is not zero (|w_hat(0)| = {mean:g})")
    defect = symmetry_defect(f)
    if defect > tol * scale:
        raise ValueError(f"conjugate symmetry violated (defect {defect:g})")
    if solenoidal and solenoidal_defect(f) > tol:
        raise ValueError(f"field is not solenoidal (defect {solenoidal_defect(f):g})")
