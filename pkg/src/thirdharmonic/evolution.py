"""Strang-split time integration with runtime monitors.

One step of size dt is

    nonlinear(dt/2) -> linear(dt) -> nonlinear(dt/2)

where the linear substep applies the exact unitary propagators

    u_hat *= exp(-i dt (|k|^2 + 1)),   v_hat *= exp(-i (dt/gamma) (|k|^2 + mu))

in the grid's diagonalizing basis (plane waves on Cart3D, the w = r u sine
basis on Radial3D), and the nonlinear substep integrates the pointwise ODE

    du/dt = i [ (|u|^2/9 + 2 |v|^2) u + conj(u)^2 v / 3 ]
    dv/dt = (i/gamma) [ (9 |v|^2 + 2 |u|^2) v + u^3 / 9 ]

with classical RK4 on four internal substeps.  The pointwise combination
|u|^2 + 3 gamma |v|^2 is invariant under the exact nonlinear flow and is
monitored, not projected.

Adaptivity halves dt whenever the kinetic term has grown by the trigger
factor since the last adaptation; hitting the dt floor terminates the run as
a blow-up signature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as sfft

from .errors import (
    ConfigurationError,
    NumericalFaultError,
    ShapeMismatchError,
    UnsupportedModeError,
)
from .grids import GridSpec, Mode, StatePair, check_support_margin
from .functionals import (
    FunctionalReport,
    interaction_morawetz,
    lebesgue_norm_p5,
    local_lebesgue,
    local_mass,
    report,
    virial_quantity,
)
from .operators import apply_multiplier, sine_coefficients, sine_synthesis
from .weights import MorawetzWeights, radial_virial_weight

KNOWN_MONITORS = ("virial", "local_mass", "l5", "coercivity", "local_l103", "interaction_morawetz")


class Termination(enum.Enum):
    HORIZON_REACHED = "horizon_reached"
    BLOWUP_DETECTED = "blowup_detected"
    DT_FLOOR = "dt_floor"
    NUMERICAL_FAULT = "numerical_fault"


@dataclass(frozen=True)
class BoostParams:
    """Galilean boost velocity parameter (wavenumber units)."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (3,):
            raise ConfigurationError("boost parameter must be a 3-vector")
        object.__setattr__(self, "xi", xi)


@dataclass
class EvolutionConfig:
    dt: float
    t_end: float
    output_stride: int = 1
    adapt_enabled: bool = True
    adapt_trigger: float = 2.0
    dt_floor: float = 1e-7
    blowup_trigger: float = 100.0
    epsilon: float = 0.25
    monitors: tuple[str, ...] = ("coercivity", "l5")
    virial_R: float | None = None
    local_mass_R: float | None = None
    local_l103_R: float | None = None
    morawetz_weights: MorawetzWeights | None = None
    omega: float = 0.0
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ConfigurationError("dt and t_end must be positive")
        if self.dt_floor >= self.dt:
            raise ConfigurationError("dt_floor must be below dt")
        if self.output_stride < 1:
            raise ConfigurationError("output_stride must be >= 1")
        unknown = set(self.monitors) - set(KNOWN_MONITORS)
        if unknown:
            raise ConfigurationError(f"unknown monitors: {sorted(unknown)}")


@dataclass
class TrajectoryRecord:
    reports: list[FunctionalReport]
    monitor_series: dict[str, list[float]]
    z_series: list[float]
    termination: Termination
    blowup_fired: bool
    blowup_time: float | None
    final_state: StatePair
    dt_final: float
    snapshots: dict[float, StatePair] = dc_field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.reports])

    def series(self, name: str) -> np.ndarray:
        if name in self.monitor_series:
            return np.array(self.monitor_series[name])
        if name in FunctionalReport.__dataclass_fields__:
            return np.array([getattr(r, name) for r in self.reports])
        raise KeyError(f"unknown series {name!r}")

    def mass_drift(self) -> float:
        m = self.series("mass_3gamma")
        return float(np.abs(m - m[0]).max() / max(abs(m[0]), 1e-300))

    def energy_drift(self) -> float:
        e = self.series("energy_mu")
        return float(np.abs(e - e[0]).max() / max(1.0, abs(e[0])))


# -- raw-array stepper ---------------------------------------------------------


class _Stepper:
    def __init__(self, grid: GridSpec, gamma: float, mu: float):
        if grid.mode not in (Mode.RADIAL3D, Mode.CART3D):
            raise UnsupportedModeError(
                "time evolution needs a multiplier-capable grid (Radial3D or Cart3D)"
            )
        self.grid = grid
        self.gamma = gamma
        self.mu = mu
        if grid.mode is Mode.RADIAL3D:
            self.k2 = grid.sine_wavenumbers**2
            self.r = grid.radii
        else:
            kx, ky, kz = grid.wavenumbers
            self.k2 = kx[:, None, None] ** 2 + ky[None, :, None] ** 2 + kz[None, None, :] ** 2
        self._mult_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _multipliers(self, dt: float):
        got = self._mult_cache.get(dt)
        if got is None:
            mu_u = np.exp(-1j * dt * (self.k2 + 1.0))
            mu_v = np.exp(-1j * (dt / self.gamma) * (self.k2 + self.mu))
            if len(self._mult_cache) > 64:
                self._mult_cache.clear()
            got = self._mult_cache[dt] = (mu_u, mu_v)
        return got

    def linear(self, u, v, dt):
        mu_u, mu_v = self._multipliers(dt)
        if self.grid.mode is Mode.RADIAL3D:
            au = sine_coefficients(self.r * u)
            av = sine_coefficients(self.r * v)
            return sine_synthesis(mu_u * au) / self.r, sine_synthesis(mu_v * av) / self.r
        return sfft.ifftn(mu_u * sfft.fftn(u)), sfft.ifftn(mu_v * sfft.fftn(v))

    def _rhs(self, u, v):
        au2 = u.real**2 + u.imag**2
        av2 = v.real**2 + v.imag**2
        fu = 1j * ((au2 / 9.0 + 2.0 * av2) * u + np.conj(u) ** 2 * v / 3.0)
        fv = (1j / self.gamma) * ((9.0 * av2 + 2.0 * au2) * v + u**3 / 9.0)
        return fu, fv

    def nonlinear(self, u, v, dt, substeps: int = 4):
        h = dt / substeps
        for _ in range(substeps):
            k1u, k1v = self._rhs(u, v)
            k2u, k2v = self._rhs(u + 0.5 * h * k1u, v + 0.5 * h * k1v)
            k3u, k3v = self._rhs(u + 0.5 * h * k2u, v + 0.5 * h * k2v)
            k4u, k4v = self._rhs(u + h * k3u, v + h * k3v)
            u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return u, v

    def strang(self, u, v, dt):
        u, v = self.nonlinear(u, v, 0.5 * dt)
        u, v = self.linear(u, v, dt)
        return self.nonlinear(u, v, 0.5 * dt)


def _is_finite_pair(u, v) -> bool:
    return bool(np.isfinite(np.abs(u).max()) and np.isfinite(np.abs(v).max()))


def detector_index(kinetic_series, trigger: float = 100.0) -> int | None:
    """Index of the first entry with K >= trigger * K[0], None if never."""
    series = np.asarray(kinetic_series, dtype=float)
    if series.size == 0 or series[0] <= 0:
        return None
    hits = np.nonzero(series >= trigger * series[0])[0]
    hits = hits[hits > 0]
    return int(hits[0]) if hits.size else None


# -- public stepping -------------------------------------------------------------


def linear_step(state: StatePair, dt: float) -> StatePair:
    """Exact linear propagators applied for time dt."""
    st = _Stepper(state.grid, state.gamma, state.mu)
    u, v = st.linear(state.u.samples, state.v.samples, dt)
    return state.with_fields(u, v, state.time + dt)


def nonlinear_step(state: StatePair, dt: float) -> StatePair:
    """Pointwise nonlinear flow for time dt (RK4, internal substep dt/4)."""
    st = _Stepper(state.grid, state.gamma, state.mu)
    u, v = st.nonlinear(state.u.samples, state.v.samples, dt)
    if not _is_finite_pair(u, v):
        raise NumericalFaultError("nonlinear substep produced NaN/Inf")
    return state.with_fields(u, v, state.time + dt)


def strang_step(state: StatePair, dt: float) -> StatePair:
    st = _Stepper(state.grid, state.gamma, state.mu)
    u, v = st.strang(state.u.samples, state.v.samples, dt)
    if not _is_finite_pair(u, v):
        raise NumericalFaultError("strang step produced NaN/Inf")
    return state.with_fields(u, v, state.time + dt)


# -- monitors ---------------------------------------------------------------------


def _monitor_context(state: StatePair, config: EvolutionConfig) -> dict:
    ctx: dict = {}
    grid = state.grid
    default_R = grid.extent[0] / 3.0
    if "virial" in config.monitors:
        R = config.virial_R or default_R
        ctx["virial_weight"] = radial_virial_weight(R, grid)
        ctx["virial_R"] = R
    if "local_mass" in config.monitors:
        ctx["local_mass_R"] = config.local_mass_R or default_R
    if "local_l103" in config.monitors:
        ctx["local_l103_R"] = config.local_l103_R or default_R
    if "interaction_morawetz" in config.monitors:
        if config.morawetz_weights is None:
            raise ConfigurationError("interaction_morawetz monitor needs prebuilt weights")
        ctx["morawetz_weights"] = config.morawetz_weights
    return ctx


def _run_monitors(state: StatePair, rep: FunctionalReport, config: EvolutionConfig, ctx: dict, out: dict):
    for name in config.monitors:
        if name == "virial":
            val = virial_quantity(state, ctx["virial_weight"].grad)
        elif name == "local_mass":
            val = local_mass(state, ctx["local_mass_R"])
        elif name == "l5":
            val = lebesgue_norm_p5(state)
        elif name == "coercivity":
            val = rep.pohozaev + config.epsilon * rep.kinetic
        elif name == "local_l103":
            val = local_lebesgue(state, ctx["local_l103_R"] / 2.0)
        else:
            val = interaction_morawetz(state, ctx["morawetz_weights"])
        out[name].append(float(val))


def evolve(state: StatePair, config: EvolutionConfig) -> TrajectoryRecord:
    """Integrate the state to the horizon, emitting reports and monitors.

    Termination: HorizonReached normally; BlowUpDetected when the kinetic
    term exceeds blowup_trigger times its initial value; DtFloor when
    adaptivity collapses the step (also flagged as blow-up); NumericalFault
    on NaN/Inf (the last finite state is kept).
    """
    check_support_margin(state)
    stepper = _Stepper(state.grid, state.gamma, state.mu)
    u = state.u.samples.copy()
    v = state.v.samples.copy()
    t = state.time
    dt = config.dt
    ctx = _monitor_context(state, config)

    reports: list[FunctionalReport] = []
    monitor_series: dict[str, list[float]] = {name: [] for name in config.monitors}
    z_series: list[float] = []
    snapshots: dict[float, StatePair] = {}
    pending_snapshots = sorted(config.snapshot_times)

    current = state
    rep = report(current, config.omega)
    reports.append(rep)
    _run_monitors(current, rep, config, ctx, monitor_series)
    z_series.append(0.0)
    k0 = rep.kinetic
    k_ref = rep.kinetic

    termination = Termination.HORIZON_REACHED
    blowup_fired = False
    blowup_time = None
    t_target = state.time + config.t_end
    step_count = 0
    eps_t = 1e-12 * max(1.0, abs(t_target))

    while t < t_target - eps_t:
        dt_step = min(dt, t_target - t)
        u_new, v_new = stepper.strang(u, v, dt_step)
        if not _is_finite_pair(u_new, v_new):
            termination = Termination.NUMERICAL_FAULT
            break
        u, v = u_new, v_new
        t += dt_step
        step_count += 1

        at_horizon = t >= t_target - eps_t
        if step_count % config.output_stride != 0 and not at_horizon:
            continue

        current = state.with_fields(u, v, t)
        rep = report(current, config.omega)
        reports.append(rep)
        _run_monitors(current, rep, config, ctx, monitor_series)
        if "virial" in config.monitors:
            mv = monitor_series["virial"]
            dt_rep = reports[-1].time - reports[-2].time
            z_series.append(z_series[-1] + 0.5 * dt_rep * (mv[-1] ** 2 + mv[-2] ** 2))
        else:
            z_series.append(0.0)

        while pending_snapshots and t >= pending_snapshots[0] - eps_t:
            snapshots[pending_snapshots.pop(0)] = current

        if k0 > 0 and detector_index([k0, rep.kinetic], config.blowup_trigger) is not None:
            termination = Termination.BLOWUP_DETECTED
            blowup_fired = True
            blowup_time = t
            break
        if config.adapt_enabled and k_ref > 0 and rep.kinetic >= config.adapt_trigger * k_ref:
            dt *= 0.5
            k_ref = rep.kinetic
            if dt < config.dt_floor:
                termination = Termination.DT_FLOOR
                blowup_fired = True
                blowup_time = t
                break

    return TrajectoryRecord(
        reports=reports,
        monitor_series=monitor_series,
        z_series=z_series,
        termination=termination,
        blowup_fired=blowup_fired,
        blowup_time=blowup_time,
        final_state=current,
        dt_final=dt,
        snapshots=snapshots,
    )


# -- symmetry / gauge maps ---------------------------------------------------------


def galilean_boost(state: StatePair, boost: BoostParams, t: float) -> StatePair:
    """The boost map (u, v) -> (e^{i x.xi - i t |xi|^2} u(x - 2 t xi),
    e^{3 i x.xi - 3 i t |xi|^2} v(x - 2 t xi)).

    Solution snapshots map to solution snapshots exactly when gamma = 3.
    Translation is spectral, so on-grid xi (multiples of pi / L per axis)
    keeps the modulation alias-free.
    """
    grid = state.grid
    if grid.mode is not Mode.CART3D:
        raise UnsupportedModeError("galilean boost needs Cart3D (Fourier shifts)")
    xi = boost.xi
    x, y, z = grid.axis_coords
    phase_x = (
        xi[0] * x[:, None, None] + xi[1] * y[None, :, None] + xi[2] * z[None, None, :]
    )
    xi2 = float(xi @ xi)
    shift = 2.0 * t * xi
    kx, ky, kz = grid.wavenumbers
    shift_mult = np.exp(
        -1j
        * (
            kx[:, None, None] * shift[0]
            + ky[None, :, None] * shift[1]
            + kz[None, None, :] * shift[2]
        )
    )
    u = sfft.ifftn(shift_mult * sfft.fftn(state.u.samples))
    v = sfft.ifftn(shift_mult * sfft.fftn(state.v.samples))
    u = np.exp(1j * phase_x) * np.exp(-1j * t * xi2) * u
    v = np.exp(3j * phase_x) * np.exp(-3j * t * xi2) * v
    return state.with_fields(u, v)


def scattering_profile(state: StatePair, t: float | None = None) -> StatePair:
    """Pull back by the free flow: (S1(-t) u, S2(-t) v)."""
    tt = state.time if t is None else t
    gamma, mu = state.gamma, state.mu
    u = apply_multiplier(state.u, lambda k: np.exp(1j * tt * (sum(kj**2 for kj in k) + 1.0)))
    v = apply_multiplier(
        state.v, lambda k: np.exp(1j * (tt / gamma) * (sum(kj**2 for kj in k) + mu))
    )
    return StatePair(u, v, gamma, mu, tt)


# -- post-hoc diagnostics ------------------------------------------------------------


def spacetime_norm_window(record: TrajectoryRecord, t_start: float | None = None, t_end: float | None = None) -> float:
    """Discrete L^5_{t,x} norm over a report window.

    Right-endpoint quadrature in t of the l5 monitor (the per-snapshot
    ||u||_L5^5 + ||v||_L5^5 sums), to the 1/5 power.
    """
    if "l5" not in record.monitor_series:
        raise ConfigurationError("the l5 monitor was not enabled for this run")
    times = record.times
    vals = record.series("l5")
    lo = times[0] if t_start is None else t_start
    hi = times[-1] if t_end is None else t_end
    acc = 0.0
    for i in range(1, len(times)):
        if lo < times[i] <= hi + 1e-15:
            acc += vals[i] * (times[i] - times[i - 1])
    return float(acc ** 0.2)


@dataclass(frozen=True)
class VirialRateReport:
    times: np.ndarray
    rate: np.ndarray              # d M_phi / dt by central differences
    eight_g: np.ndarray
    max_relative_error: float
    envelope_constant: float      # fitted C in rate <= 8G + C * envelope
    geometry: str


def virial_rate_check(record: TrajectoryRecord, R: float, geometry: str = "radial") -> VirialRateReport:
    """Compare the virial growth rate against 8G and fit the one-sided
    localization envelope (radial: R^-2 (K + 1); cylindrical: R^-1 K + R^-2)."""
    if "virial" not in record.monitor_series:
        raise ConfigurationError("the virial monitor was not enabled for this run")
    if geometry not in ("radial", "cylindrical"):
        raise ConfigurationError("geometry must be 'radial' or 'cylindrical'")
    times = record.times
    if len(times) < 3:
        raise ConfigurationError("virial rate check needs at least 3 reports")
    m = record.series("virial")
    g = record.series("pohozaev")
    k = record.series("kinetic")
    rate = np.gradient(m, times)
    inner = slice(1, -1)
    eight_g = 8.0 * g
    denom = np.abs(eight_g[inner])
    ok = denom > 1e-12
    rel = np.abs(rate[inner] - eight_g[inner])[ok] / denom[ok]
    max_rel = float(rel.max()) if rel.size else 0.0
    if geometry == "radial":
        env = (k[inner] + 1.0) / R**2
    else:
        env = k[inner] / R + 1.0 / R**2
    excess = (rate[inner] - eight_g[inner]) / env
    c_fit = float(max(0.0, excess.max()))
    return VirialRateReport(
        times=times[inner],
        rate=rate[inner],
        eight_g=eight_g[inner],
        max_relative_error=max_rel,
        envelope_constant=c_fit,
        geometry=geometry,
    )


@dataclass(frozen=True)
class BlowupReport:
    fired: bool
    fired_time: float | None
    termination: Termination
    ode_rate: float | None         # fitted A with M_phi <= -A z
    blowup_time_estimate: float | None
    coercivity_max: float | None   # max over reports of G + eps K
    coercivity_all_negative: bool | None


def blowup_monitor(record: TrajectoryRecord) -> BlowupReport:
    """Detector outcome plus the ODE-comparison blow-up time estimate.

    With z(t) the cumulative integral of |M_phi|^2, a fitted A > 0 with
    M_phi <= -A z on the tail yields the estimate t* = t1 + 1 / (A^2 z(t1))
    at the last report time t1.
    """
    coer_max = None
    coer_neg = None
    if "coercivity" in record.monitor_series:
        c = record.series("coercivity")
        coer_max = float(c.max())
        coer_neg = bool((c < 0).all())
    rate = None
    estimate = None
    if "virial" in record.monitor_series and len(record.z_series) >= 2:
        m = record.series("virial")
        z = np.array(record.z_series)
        usable = (z > 0) & (m < 0)
        if usable.any():
            rate = float((-m[usable] / z[usable]).min())
            if rate > 0 and z[-1] > 0:
                estimate = float(record.times[-1] + 1.0 / (rate**2 * z[-1]))
    return BlowupReport(
        fired=record.blowup_fired,
        fired_time=record.blowup_time,
        termination=record.termination,
        ode_rate=rate,
        blowup_time_estimate=estimate,
        coercivity_max=coer_max,
        coercivity_all_negative=coer_neg,
    )


@dataclass(frozen=True)
class MorawetzMonitorReport:
    time_average: float | None       # (1/T) int of the local L^{10/3} mass
    envelope: float | None           # R/T + R^-2
    envelope_constant: float | None  # ratio of the two
    interaction_max_over_R: float | None

def morawetz_monitor(record: TrajectoryRecord, R: float) -> MorawetzMonitorReport:
    """Time-averaged local L^{10/3} mass against the R/T + R^-2 envelope,
    and the interaction quantity's max_t |M2_R| / R when that monitor ran."""
    times = record.times
    avg = env = c_fit = None
    if "local_l103" in record.monitor_series and len(times) >= 2:
        series = record.series("local_l103")
        horizon = times[-1] - times[0]
        if horizon > 0:
            avg = float(np.trapezoid(series, times) / horizon)
            env = float(R / horizon + 1.0 / R**2)
            c_fit = avg / env
    inter = None
    if "interaction_morawetz" in record.monitor_series:
        inter = float(np.abs(record.series("interaction_morawetz")).max() / R)
    return MorawetzMonitorReport(
        time_average=avg, envelope=env, envelope_constant=c_fit, interaction_max_over_R=inter
    )
