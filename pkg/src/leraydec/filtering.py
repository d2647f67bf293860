"""Helmholtz differential filtering and van Cittert deconvolution.

On the periodic box every operator here is a diagonal multiplier on Fourier
coefficients.  Writing x = (delta k)^2, the filter (-delta^2 Lap + 1)^-1 has
multiplier

    g(k) = 1 / (1 + x),

N van Cittert corrections compose to the truncated geometric series

    d_N(k) = sum_{m=0..N} (1 - g)^m = (1 + x) * (1 - r^{N+1}),   r = x / (1 + x),

and the combined smoother (deconvolution after filtering) has

    h_N(k) = d_N(k) * g(k) = 1 - r^{N+1}.

Powers of r are evaluated through log1p/expm1 so that 1 - r^{N+1} keeps full
precision for large orders and large delta*k, where r is within rounding of
one.  The residual multiplier r^{N+1} is exactly the relative amplitude of
the deconvolution error w - d_N(filtered w), which is how the O(delta^{2N+2})
accuracy of the family shows up mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField

DEFAULT_MAX_ORDER = 64


@dataclass(frozen=True)
class FilterSpec:
    """Filter radius delta and deconvolution order, with a safety cap on order."""

    delta: float
    order: int = 0
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"filter radius must be positive, got {self.delta}")
        if self.order < 0:
            raise ValueError(f"deconvolution order must be >= 0, got {self.order}")
        if self.order > self.max_order:
            raise ValueError(
                f"deconvolution order {self.order} exceeds the configured max {self.max_order}"
            )


def _prepare(k):
    arr = np.asarray(k, dtype=np.float64)
    return arr, arr.ndim == 0


def _x_of(k: np.ndarray, spec: FilterSpec) -> np.ndarray:
    return (spec.delta * k) ** 2


def _ratio_power(x: np.ndarray, m: int) -> np.ndarray:
    """(x / (1 + x))^m, exact 0 at x = 0, full precision for x >> 1."""
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(divide="ignore"):
        out[pos] = np.exp(-m * np.log1p(1.0 / x[pos]))
    return out


def _one_minus_ratio_power(x: np.ndarray, m: int) -> np.ndarray:
    """1 - (x / (1 + x))^m without cancellation; exact 1 at x = 0."""
    out = np.ones_like(x)
    pos = x > 0
    with np.errstate(divide="ignore"):
        out[pos] = -np.expm1(-m * np.log1p(1.0 / x[pos]))
    return out


def transfer_g(k, spec: FilterSpec):
    """Multiplier of the differential filter, 1 / (1 + (delta k)^2)."""
    arr, scalar = _prepare(k)
    out = 1.0 / (1.0 + _x_of(arr, spec))
    return float(out) if scalar else out


def transfer_dn(k, spec: FilterSpec):
    """Multiplier of the order-N van Cittert deconvolution operator."""
    arr, scalar = _prepare(k)
    x = _x_of(arr, spec)
    out = (1.0 + x) * _one_minus_ratio_power(x, spec.order + 1)
    return float(out) if scalar else out


def transfer_hn(k, spec: FilterSpec):
    """Multiplier of the combined smoother, deconvolution applied after filtering."""
    arr, scalar = _prepare(k)
    out = _one_minus_ratio_power(_x_of(arr, spec), spec.order + 1)
    return float(out) if scalar else out


def deconv_error_multiplier(k, spec: FilterSpec):
    """Relative amplitude of w - D_N(filtered w) at wavenumber magnitude k."""
    arr, scalar = _prepare(k)
    out = _ratio_power(_x_of(arr, spec), spec.order + 1)
    return float(out) if scalar else out


def transfer_exact(k, spec: FilterSpec):
    """Multiplier of exact deconvolution, the inverse filter 1 + (delta k)^2."""
    arr, scalar = _prepare(k)
    out = 1.0 + _x_of(arr, spec)
    return float(out) if scalar else out


def apply_filter(f: SpectralField, spec: FilterSpec) -> SpectralField:
    """Differential filter as a diagonal multiply."""
    return f.with_coeffs(f.coeffs * transfer_g(f.grid.k_mag, spec))


def apply_dn(fbar: SpectralField, spec: FilterSpec) -> SpectralField:
    """Order-N deconvolution of an already filtered field, closed form."""
    return fbar.with_coeffs(fbar.coeffs * transfer_dn(fbar.grid.k_mag, spec))


def apply_hn(f: SpectralField, spec: FilterSpec) -> SpectralField:
    """Deconvolved filtering of an unfiltered field, closed form."""
    return f.with_coeffs(f.coeffs * transfer_hn(f.grid.k_mag, spec))


def van_cittert(fbar: SpectralField, spec: FilterSpec, iteration_hook=None) -> SpectralField:
    """Order-N deconvolution by fixed-point iteration.

    Starting from w_0 = fbar, each step adds the filtered residual,
    w_{m+1} = w_m + (fbar - G w_m); after N steps this equals the closed-form
    operator applied by apply_dn.  One filter application per iteration, so
    cost grows linearly with the order.  iteration_hook, when given, is
    called once per iteration (used by performance accounting and tests).
    """
    if spec.order > spec.max_order:
        raise ValueError(f"order {spec.order} exceeds the configured max {spec.max_order}")
    g = transfer_g(fbar.grid.k_mag, spec)
    w = fbar.coeffs.copy()
    for _ in range(spec.order):
        w += fbar.coeffs - g * w
        if iteration_hook is not None:
            iteration_hook()
    return fbar.with_coeffs(w)


def deconv_error_field(f: SpectralField, spec: FilterSpec) -> SpectralField:
    """f - D_N(filtered f), evaluated through the closed-form multiplier."""
    return f.with_coeffs(f.coeffs * deconv_error_multiplier(f.grid.k_mag, spec))


def cutoff_frequency_exact(spec: FilterSpec) -> float:
    """Closed-form root of h_N(k) = 1/2 in continuous k."""
    return (1.0 / spec.delta) * (2.0 ** (1.0 / (spec.order + 1)) - 1.0) ** -0.5


def cutoff_root(spec: FilterSpec) -> float:
    """Root of h_N(k) = 1/2 located by bisection on the monotone multiplier."""
    lo = 0.0
    hi = max(1.0, 1.0 / spec.delta)
    while transfer_hn(hi, spec) > 0.5:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if transfer_hn(mid, spec) > 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def cutoff_frequency(spec: FilterSpec) -> int:
    """Largest integer wavenumber the smoother passes at amplitude >= 1/2.

    The continuous root is found by bisection; the floor is taken with a
    1e-9 guard so roots that are integers up to rounding land on the integer.
    """
    return int(np.floor(cutoff_root(spec) + 1e-9))


def operator_norm_dn(spec: FilterSpec, k_max: float, samples: int = 4096) -> float:
    """Supremum of the deconvolution multiplier over 0 <= k <= k_max.

    d_N is nondecreasing in k and approaches N + 1 from below, so the sup
    sits at k_max; a sampled sweep is kept as a guard on that monotonicity.
    """
    ks = np.linspace(0.0, k_max, samples + 1)
    return float(transfer_dn(ks, spec).max())


def smoothing_constant(spec: FilterSpec, k) -> float:
    """sup over the given wavenumbers of h_N(k) * k^2.

    This is the norm gain of the smoother from H^s to H^{s+2} on the grid:
    two derivatives are absorbed at the price of this constant.
    """
    arr = np.asarray(k, dtype=np.float64)
    return float((transfer_hn(arr, spec) * arr**2).max())


@dataclass
class TransferTable:
    """Sampled transfer functions of filter, deconvolution, and smoother."""

    spec: FilterSpec
    k: np.ndarray
    g_hat: np.ndarray
    d_hat: np.ndarray
    h_hat: np.ndarray

    @classmethod
    def build(cls, spec: FilterSpec, k) -> "TransferTable":
        ks = np.asarray(k, dtype=np.float64)
        if ks.ndim != 1 or ks.size == 0:
            raise ValueError("k must be a non-empty 1-d array")
        if np.any(np.diff(ks) <= 0):
            raise ValueError("k must be strictly increasing")
        if ks[0] < 0:
            raise ValueError("k must be nonnegative")
        return cls(
            spec=spec,
            k=ks,
            g_hat=transfer_g(ks, spec),
            d_hat=transfer_dn(ks, spec),
            h_hat=transfer_hn(ks, spec),
        )

    def validate(self, tol: float = 1e-12) -> None:
        if np.any(self.g_hat <= 0) or np.any(self.g_hat > 1):
            raise ValueError("filter multiplier out of (0, 1]")
        if np.any(self.d_hat < 1) or np.any(self.d_hat >= self.spec.order + 1 + tol):
            raise ValueError("deconvolution multiplier out of [1, N + 1)")
        if np.any(self.h_hat <= 0) or np.any(self.h_hat > 1):
            raise ValueError("smoother multiplier out of (0, 1]")
        if np.abs(self.h_hat - self.d_hat * self.g_hat).max() > tol:
            raise ValueError("smoother multiplier is not the product of the factors")
