"""Initial-condition and forcing field construction.

Every constructor returns a solenoidal, zero-mean SpectralField whose modes
sit inside the negation-closed band (Nyquist planes zero), so the fields
satisfy the representation invariants by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .spectral import Grid, SpectralField

FIELD_KINDS = ("zero", "taylor_green", "single_mode", "random_solenoidal", "manufactured")


@dataclass(frozen=True)
class FieldSpec:
    """Recipe for an analytic or seeded random field.

    Used both for initial conditions and for steady forcing; the parameters
    beyond `kind` are read only by the kinds that need them.
    """

    kind: str = "zero"
    amplitude: float = 1.0
    mode: tuple[int, int, int] = (1, 0, 0)
    slope: float = -5.0 / 3.0
    seed: int = 0
    band: int | None = None
    expr: str = ""

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}, expected one of {FIELD_KINDS}")

    def evaluate(self, grid: Grid) -> SpectralField:
        return evaluate_field(self, grid)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """The classical Taylor-Green vortex, modes on the |k|^2 = 3 shell."""
    x, y, z = grid.mesh()
    u = np.empty((3, grid.n, grid.n, grid.n))
    u[0] = amplitude * np.sin(x) * np.cos(y) * np.cos(z)
    u[1] = -amplitude * np.cos(x) * np.sin(y) * np.cos(z)
    u[2] = 0.0
    return spectral.from_physical(grid, u)


def single_mode(grid: Grid, mode, amplitude: float = 1.0) -> SpectralField:
    """amplitude * p * cos(k.x) with polarization p perpendicular to k.

    The polarization axis is the coordinate direction of the smallest |k|
    component (lowest index on ties), projected perpendicular to k and
    normalized, so the construction is deterministic.
    """
    k = np.asarray(mode, dtype=np.int64)
    if k.shape != (3,) or not np.any(k):
        raise ValueError(f"mode must be a nonzero integer triple, got {mode}")
    if np.abs(k).max() > grid.n // 2 - 1:
        raise ValueError(f"mode {mode} does not fit the negation-closed band of n={grid.n}")
    axis = int(np.argmin(np.abs(k)))
    e = np.zeros(3)
    e[axis] = 1.0
    kk = k.astype(np.float64)
    p = e - (e @ kk) * kk / (kk @ kk)
    p /= np.sqrt(p @ p)

    f = spectral.zeros(grid)
    half = 0.5 * amplitude * p
    idx_plus = grid.mode_index(k)
    idx_minus = grid.mode_index(-k)
    for i in range(3):
        f.coeffs[(i, *idx_plus)] = half[i]
        f.coeffs[(i, *idx_minus)] = half[i]
    return f


def random_solenoidal(
    grid: Grid,
    seed: int = 0,
    slope: float = -5.0 / 3.0,
    amplitude: float = 1.0,
    band: int | None = None,
) -> SpectralField:
    """Seeded random divergence-free field with shell energies ~ |k|^slope.

    White noise is sampled on the collocation grid (which makes the
    coefficients conjugate-symmetric by construction), shaped per mode by
    |k|^{(slope - 2)/2} to account for the |k|^2 growth of shell populations,
    band-limited, projected, and rescaled to the requested L2 norm.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3, grid.n, grid.n, grid.n))
    f = spectral.from_physical(grid, noise)

    shaping = np.zeros_like(grid.k_sq)
    nonzero = grid.k_sq > 0
    shaping[nonzero] = grid.k_mag[nonzero] ** ((slope - 2.0) / 2.0)
    cut = grid.dealias_cutoff if band is None else int(band)
    shaping *= grid.k_linf <= min(cut, grid.n // 2 - 1)

    f = f.with_coeffs(f.coeffs * shaping)
    f = spectral.leray_project(f)
    norm = spectral.hs_norm(f, 0)
    if norm == 0.0:
        raise ValueError("random field collapsed to zero; widen the band")
    return f.with_coeffs(f.coeffs * (amplitude / norm))


def abc_flow(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """Equal-coefficient ABC flow, a Beltrami field on the |k| = 1 shell.

    curl u = u, so the advective nonlinearity is a pure gradient and the
    unforced viscous solution is the exact exponential decay exp(-nu t) u0.
    Useful as a manufactured solution for the time integrator.
    """
    x, y, z = grid.mesh()
    u = np.empty((3, grid.n, grid.n, grid.n))
    u[0] = amplitude * (np.sin(z) + np.cos(y))
    u[1] = amplitude * (np.sin(x) + np.cos(z))
    u[2] = amplitude * (np.sin(y) + np.cos(x))
    return spectral.from_physical(grid, u)


def shear_mode(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """Plane shear u = (0, amplitude cos x, 0); the simplest steady test field."""
    return single_mode(grid, (1, 0, 0), amplitude)


MANUFACTURED_FIELDS = {
    "abc_flow": abc_flow,
    "shear_mode": shear_mode,
}


def evaluate_field(spec: FieldSpec, grid: Grid) -> SpectralField:
    if spec.kind == "zero":
        return spectral.zeros(grid)
    if spec.kind == "taylor_green":
        return taylor_green(grid, spec.amplitude)
    if spec.kind == "single_mode":
        return single_mode(grid, spec.mode, spec.amplitude)
    if spec.kind == "random_solenoidal":
        return random_solenoidal(grid, spec.seed, spec.slope, spec.amplitude, spec.band)
    if spec.kind == "manufactured":
        try:
            builder = MANUFACTURED_FIELDS[spec.expr]
        except KeyError:
            known = sorted(MANUFACTURED_FIELDS)
            raise ValueError(f"unknown manufactured field {spec.expr!r}, expected one of {known}")
        return builder(grid, spec.amplitude)
    raise ValueError(f"unknown field kind {spec.kind!r}")
