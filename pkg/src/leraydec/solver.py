"""Pseudo-spectral time integration of the regularized momentum equation.

The state is the divergence-free spectral velocity w; each right-hand-side
evaluation deconvolves the advecting velocity (for the regularized model;
the plain equations advect with w itself), forms the advective product on
the collocation grid, dealiases, and Leray-projects:

    dw/dt = -P[(u_adv . grad) w] + nu Lap w + f,
    u_adv = D_N(filtered w)  or  w.

Time stepping is the three-stage low-storage Runge-Kutta of Williamson
combined with an exact integrating factor for the viscous term, so pure
viscous decay is reproduced to rounding and only decaying exponentials ever
multiply the state.  The deconvolution is performed by the van Cittert
iteration, one filter application per order, which keeps the advertised
linear-in-N cost model honest; the closed-form multiplier in `filtering`
is the cross-check.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import diagnostics, filtering, spectral
from .diagnostics import DiagRecord
from .fields import FieldSpec
from .filtering import FilterSpec
from .spectral import Grid, SpectralField

# Williamson low-storage RK3 coefficients (carry, weight, abscissa).
_RK_A = (0.0, -5.0 / 9.0, -153.0 / 128.0)
_RK_B = (1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0)
_RK_C = (0.0, 1.0 / 3.0, 3.0 / 4.0)

CONVECTIVE_FORMS = ("advective", "divergence")


class CFLAdvisory(UserWarning):
    """Raised as a warning when dt exceeds the advisory CFL limit."""


class BlowUpError(RuntimeError):
    """Non-finite state detected; carries the step index and partial trajectory."""

    def __init__(self, step: int, t: float, trajectory: "Trajectory"):
        super().__init__(f"solution blew up at step {step} (t = {t:g})")
        self.step = step
        self.t = t
        self.trajectory = trajectory


@dataclass(frozen=True)
class ModelKind:
    """Which momentum equation to integrate.

    family "nse" advects with the velocity itself; family "leray_deconv"
    advects with the order-N deconvolved filtered velocity (order 0 is the
    Leray-alpha regularization).
    """

    family: str
    order: int = 0

    def __post_init__(self):
        if self.family not in ("nse", "leray_deconv"):
            raise ValueError(f"unknown model family {self.family!r}")
        if self.order < 0:
            raise ValueError(f"deconvolution order must be >= 0, got {self.order}")

    @classmethod
    def nse(cls) -> "ModelKind":
        return cls("nse")

    @classmethod
    def leray_deconvolution(cls, order: int) -> "ModelKind":
        return cls("leray_deconv", order)

    @property
    def is_regularized(self) -> bool:
        return self.family == "leray_deconv"


@dataclass
class SolverConfig:
    grid: Grid
    model: ModelKind
    nu: float
    dt: float
    t_end: float
    filter: FilterSpec | None = None
    ic: FieldSpec = dataclass_field(default_factory=lambda: FieldSpec(kind="taylor_green"))
    forcing: FieldSpec = dataclass_field(default_factory=lambda: FieldSpec(kind="zero"))
    filter_forcing: bool = True
    filter_ic: bool = True
    dealias: bool = True
    conv_form: str = "advective"
    snapshot_every: int = 10

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"viscosity must be >= 0, got {self.nu}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end must be at least one step, got {self.t_end} < dt {self.dt}")
        if self.conv_form not in CONVECTIVE_FORMS:
            raise ValueError(f"conv_form must be one of {CONVECTIVE_FORMS}, got {self.conv_form!r}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.model.is_regularized:
            if self.filter is None:
                raise ValueError("regularized model requires a filter")
            if self.filter.order != self.model.order:
                raise ValueError(
                    f"filter order {self.filter.order} disagrees with model order {self.model.order}"
                )
        self.steps  # fail on a bad t_end/dt pair now, not at run time

    @property
    def steps(self) -> int:
        m = int(round(self.t_end / self.dt))
        if abs(m * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end {self.t_end} is not an integer multiple of dt {self.dt}")
        return max(m, 1)


@dataclass
class RunStats:
    steps: int = 0
    rhs_evals: int = 0
    filter_applications: int = 0
    deconv_seconds: float = 0.0
    wall_seconds: float = 0.0
    cfl_dt_max: float = float("inf")
    cfl_violated: bool = False


@dataclass
class Trajectory:
    config: SolverConfig
    times: list
    snapshots: list
    records: list
    stats: RunStats

    @property
    def terminal(self) -> SpectralField:
        return self.snapshots[-1]


def cfl_max_dt(state: SpectralField, courant: float = 1.0) -> float:
    """Advisory step limit courant * dx / max |u| at the given state."""
    u = spectral.to_physical(state)
    speed = float(np.sqrt((u**2).sum(axis=0)).max())
    dx = spectral.TWO_PI / state.grid.n
    return courant * dx / speed if speed > 0 else float("inf")


class _Stepper:
    """Precomputed multipliers, buffers, and counters for one run."""

    def __init__(self, config: SolverConfig, stats: RunStats | None = None):
        self.config = config
        self.grid = config.grid
        self.stats = stats if stats is not None else RunStats()
        g = self.grid

        self.mask = g.dealias_mask if config.dealias else g.negation_closed_mask
        self.g_hat = (
            filtering.transfer_g(g.k_mag, config.filter) if config.model.is_regularized else None
        )
        self.order = config.model.order if config.model.is_regularized else 0

        if config.nu > 0:
            gaps = (_RK_C[1] - _RK_C[0], _RK_C[2] - _RK_C[1], 1.0 - _RK_C[2])
            self.decays = [np.exp(-config.nu * g.k_sq * config.dt * gap) for gap in gaps]
        else:
            self.decays = None

        f_raw = config.forcing.evaluate(g)
        f = spectral.leray_project(f_raw).coeffs * self.mask
        if config.model.is_regularized and config.filter_forcing:
            f = f * filtering.transfer_hn(g.k_mag, config.filter)
        self.f_eff = f if np.any(f) else None

    def initial_state(self) -> SpectralField:
        ic = self.config.ic.evaluate(self.grid)
        coeffs = spectral.leray_project(ic).coeffs * self.mask
        if self.config.model.is_regularized and self.config.filter_ic:
            coeffs = coeffs * filtering.transfer_hn(self.grid.k_mag, self.config.filter)
        return SpectralField(self.grid, coeffs, 0.0)

    def advecting_velocity(self, w: np.ndarray) -> np.ndarray:
        """Deconvolved advecting velocity by van Cittert iteration, timed."""
        if self.g_hat is None:
            return w
        t0 = time.perf_counter()
        wbar = self.g_hat * w
        adv = wbar.copy()
        for _ in range(self.order):
            adv += wbar - self.g_hat * adv
        self.stats.deconv_seconds += time.perf_counter() - t0
        self.stats.filter_applications += self.order + 1
        return adv

    def nonlinear(self, w: np.ndarray, project: bool = True) -> np.ndarray:
        """-(u_adv . grad) w, dealiased, optionally Leray-projected."""
        g = self.grid
        n = g.n
        n3 = n**3
        self.stats.rhs_evals += 1

        adv = self.advecting_velocity(w)
        adv_phys = np.fft.ifftn(adv, axes=(1, 2, 3)).real * n3

        conv = np.zeros((3, n, n, n))
        if self.config.conv_form == "advective":
            for j, kj in enumerate(g.wavevectors()):
                dw_j = np.fft.ifftn(1j * kj * w, axes=(1, 2, 3)).real * n3
                conv += adv_phys[j] * dw_j
            out = -(np.fft.fftn(conv, axes=(1, 2, 3)) / n3)
        else:
            w_phys = np.fft.ifftn(w, axes=(1, 2, 3)).real * n3
            out = np.zeros((3, n, n, n), dtype=np.complex128)
            for j, kj in enumerate(g.wavevectors()):
                flux = np.fft.fftn(adv_phys[j] * w_phys, axes=(1, 2, 3)) / n3
                out -= 1j * kj * flux
        out *= self.mask

        if project:
            dot = g.kx * out[0] + g.ky * out[1] + g.kz * out[2]
            factor = dot / g._k_sq_safe
            out[0] -= g.kx * factor
            out[1] -= g.ky * factor
            out[2] -= g.kz * factor
        return out

    def rhs(self, w: np.ndarray) -> np.ndarray:
        out = self.nonlinear(w)
        if self.f_eff is not None:
            out += self.f_eff
        return out

    def advance(self, u: np.ndarray, p: np.ndarray) -> None:
        """One full RK3 step in place; p is the low-storage carry buffer."""
        dt = self.config.dt
        for s in range(3):
            if s > 0 and self.decays is not None:
                u *= self.decays[s - 1]
                p *= self.decays[s - 1]
            if s == 0:
                p[:] = dt * self.rhs(u)
            else:
                p *= _RK_A[s]
                p += dt * self.rhs(u)
            u += _RK_B[s] * p
        if self.decays is not None:
            u *= self.decays[2]


def nonlinear_term(
    state: SpectralField,
    model: ModelKind,
    filter_spec: FilterSpec | None = None,
    dealias: bool = True,
    conv_form: str = "advective",
) -> SpectralField:
    """Dealiased, Leray-projected advection term -(u_adv . grad) w.

    The input is truncated to the dealias band first, so the retained
    quadratic interactions are exactly the alias-free ones; with a
    solenoidal advecting velocity the result is L2-orthogonal to the state.
    """
    config = SolverConfig(
        grid=state.grid,
        model=model,
        nu=0.0,
        dt=1.0,
        t_end=1.0,
        filter=filter_spec,
        ic=FieldSpec(kind="zero"),
        dealias=dealias,
        conv_form=conv_form,
        filter_ic=False,
        filter_forcing=False,
    )
    stepper = _Stepper(config)
    w = state.coeffs * stepper.mask
    return state.with_coeffs(stepper.nonlinear(w))


def recover_pressure(
    state: SpectralField,
    model: ModelKind,
    filter_spec: FilterSpec | None = None,
    forcing: SpectralField | None = None,
    dealias: bool = True,
    conv_form: str = "advective",
) -> np.ndarray:
    """Scalar pressure coefficients from the unprojected right-hand side.

    q_hat(k) = -i k . R_hat(k) / |k|^2 where R is the dealiased advection
    term plus forcing before projection; grad q is then exactly the
    non-solenoidal part of R, and q_hat(0) = 0.
    """
    config = SolverConfig(
        grid=state.grid,
        model=model,
        nu=0.0,
        dt=1.0,
        t_end=1.0,
        filter=filter_spec,
        ic=FieldSpec(kind="zero"),
        dealias=dealias,
        conv_form=conv_form,
        filter_ic=False,
        filter_forcing=False,
    )
    stepper = _Stepper(config)
    g = state.grid
    w = state.coeffs * stepper.mask
    rhs = stepper.nonlinear(w, project=False)
    if forcing is not None:
        rhs = rhs + forcing.coeffs
    q = -1j * (g.kx * rhs[0] + g.ky * rhs[1] + g.kz * rhs[2]) / g._k_sq_safe
    q[0, 0, 0] = 0.0
    return q


def step(state: SpectralField, config: SolverConfig) -> SpectralField:
    """Advance a state by one step of the configured scheme."""
    stepper = _Stepper(config)
    u = (state.coeffs * stepper.mask).astype(np.complex128)
    p = np.zeros_like(u)
    stepper.advance(u, p)
    return SpectralField(config.grid, u, state.t + config.dt)


def run(config: SolverConfig) -> Trajectory:
    """Integrate from the configured initial condition to t_end.

    Diagnostics are recorded every step; spectral snapshots are retained
    every `snapshot_every` steps and always at t = 0 and t_end.  A
    non-finite state raises BlowUpError carrying the partial trajectory.
    """
    wall_start = time.perf_counter()
    stats = RunStats()
    stepper = _Stepper(config, stats)
    steps = config.steps

    state0 = stepper.initial_state()
    u = state0.coeffs.copy()
    p = np.zeros_like(u)

    f_field = (
        SpectralField(config.grid, stepper.f_eff, 0.0) if stepper.f_eff is not None else None
    )
    records = [diagnostics.energy_record(state0, config.nu, f_field)]
    snapshots = [state0.copy()]

    stats.cfl_dt_max = cfl_max_dt(state0)
    if config.dt > stats.cfl_dt_max:
        stats.cfl_violated = True
        warnings.warn(
            f"dt = {config.dt:g} exceeds the advisory CFL limit {stats.cfl_dt_max:.3g}",
            CFLAdvisory,
            stacklevel=2,
        )

    def build_trajectory() -> Trajectory:
        diagnostics.attach_balance_residuals(records)
        stats.steps = len(records) - 1
        stats.wall_seconds = time.perf_counter() - wall_start
        return Trajectory(
            config=config,
            times=[s.t for s in snapshots],
            snapshots=snapshots,
            records=records,
            stats=stats,
        )

    for m in range(1, steps + 1):
        stepper.advance(u, p)
        t = m * config.dt
        if not np.all(np.isfinite(u)):
            raise BlowUpError(m, t, build_trajectory())
        state = SpectralField(config.grid, u, t)
        records.append(diagnostics.energy_record(state, config.nu, f_field))
        if m % config.snapshot_every == 0 or m == steps:
            snapshots.append(state.copy())

    return build_trajectory()
