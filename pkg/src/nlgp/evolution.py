"""Filtered pseudo-spectral time evolution of the (non)local GP equation.

The integrated system is  i psi_t = -psi_xx/2 + alpha*psi*(R*|psi|^2) + V*psi,
with the convolution acting as a Fourier multiplier on |psi|^2 and the
exponential filter applied to the nonlinear product.  Setting the kernel to
None selects the local cubic equation (R*|psi|^2 replaced by |psi|^2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .spectral import FilterSpec, PeriodicGrid, WaveField
from .waves import StationaryState


class StepSizeUnderflowError(RuntimeError):
    """The adaptive stepper stalled.  Carries the trajectory so far."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NonFiniteError(RuntimeError):
    """NaN/Inf appeared in the state, signalling blow-up.  Carries the
    trajectory accumulated before the failure."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class AdaptiveRK45:
    """Dormand-Prince embedded RK 4(5), the ode45 family."""

    rtol: float = 1e-10
    atol: float = 1e-10

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")


@dataclass(frozen=True)
class FixedRK4:
    """Classic fixed-step RK4, for reproducibility studies."""

    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class SineSquared:
    """Potential V(x) = V0 sin^2(kx)."""

    V0: float
    k: float

    def values(self, grid: PeriodicGrid) -> np.ndarray:
        # sin^2(kx) has period pi/k; it must tile the grid period.
        ratio = grid.period * self.k / np.pi
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"potential period pi/k = {np.pi/self.k:.6g} does not divide "
                f"grid period {grid.period:.6g}"
            )
        return self.V0 * np.sin(self.k * grid.points) ** 2


@dataclass(frozen=True)
class TabulatedPotential:
    """Smooth periodic potential given by its samples on the grid."""

    table: np.ndarray

    def values(self, grid: PeriodicGrid) -> np.ndarray:
        v = np.asarray(self.table, dtype=float)
        if v.shape != (grid.num_modes,):
            raise ValueError("potential table length does not match grid")
        return v


@dataclass(frozen=True)
class EvolutionConfig:
    grid: PeriodicGrid
    kernel: kernels.ScaledKernel | None  # None selects the local equation
    potential: SineSquared | TabulatedPotential | None
    alpha: int
    time_horizon: float = 30.0
    stepper: AdaptiveRK45 | FixedRK4 = AdaptiveRK45()
    filter: FilterSpec = FilterSpec()
    record_every: float = 0.25
    filter_mode: str = "per-rhs"  # "per-rhs" | "per-step" | "off"
    integrating_factor: bool = False

    def __post_init__(self):
        if self.alpha not in (+1, -1):
            raise ValueError(f"alpha must be +1 or -1, got {self.alpha}")
        if self.time_horizon <= 0:
            raise ValueError("time_horizon must be positive")
        if not 0 < self.record_every <= self.time_horizon:
            raise ValueError("record_every must lie in (0, time_horizon]")
        if self.filter_mode not in ("per-rhs", "per-step", "off"):
            raise ValueError(f"unknown filter_mode {self.filter_mode!r}")
        if self.filter_mode == "per-step" and not isinstance(self.stepper, FixedRK4):
            raise ValueError("filter_mode='per-step' requires the FixedRK4 stepper")
        if self.filter_mode == "per-step" and self.integrating_factor:
            raise ValueError("filter_mode='per-step' and integrating_factor are exclusive")


class _Workspace:
    """Precomputed arrays in unshifted FFT order for fast right-hand sides."""

    def __init__(self, cfg: EvolutionConfig):
        grid = cfg.grid
        N = grid.num_modes
        j = np.fft.fftfreq(N, d=1.0 / N)  # 0..N/2-1, -N/2..-1
        kappa = 2.0 * np.pi * j / grid.period
        self.half_ksq = 0.5 * kappa**2
        self.kappa = kappa
        if cfg.kernel is not None:
            self.mult = np.asarray(
                kernels.multiplier(cfg.kernel, kappa), dtype=float
            )
        else:
            self.mult = np.ones(N)
        self.V = cfg.potential.values(grid) if cfg.potential is not None else np.zeros(N)
        filt = cfg.filter.multipliers(grid)  # shifted order
        self.filt = np.fft.ifftshift(filt)
        self.filt[j == -N // 2] = 0.0  # unmatched Nyquist mode always dropped
        self.nyq_only = np.ones(N)
        self.nyq_only[j == -N // 2] = 0.0
        self.alpha = cfg.alpha
        self.h = grid.spacing
        self.product_filter = self.filt if cfg.filter_mode == "per-rhs" else self.nyq_only

    def rhs(self, t, y):
        q = y.real**2 + y.imag**2
        conv = np.fft.ifft(np.fft.fft(q) * self.mult)
        p = np.fft.ifft(np.fft.fft(y * conv) * self.product_filter)
        lin = np.fft.ifft(self.half_ksq * np.fft.fft(y))
        return -1j * (lin + self.alpha * p + self.V * y)

    def nonlinear_rhs_hat(self, t, y):
        """FFT of the non-Laplacian part of rhs (integrating-factor form)."""
        q = y.real**2 + y.imag**2
        conv = np.fft.ifft(np.fft.fft(q) * self.mult)
        p_hat = np.fft.fft(y * conv) * self.product_filter
        return -1j * (self.alpha * p_hat + np.fft.fft(self.V * y))

    def mass_energy(self, y):
        q = y.real**2 + y.imag**2
        mass = float(np.sum(q) * self.h)
        dpsi = np.fft.ifft(np.fft.fft(y) * (-1j * self.kappa))
        conv = np.fft.ifft(np.fft.fft(q) * self.mult).real
        dens = np.abs(dpsi) ** 2 + 2.0 * self.V * q + self.alpha * q * conv
        return mass, float(0.5 * np.sum(dens) * self.h)


def rhs(psi: WaveField, cfg: EvolutionConfig) -> WaveField:
    """One right-hand-side evaluation, -i*(-psi_xx/2 + alpha*psi*(R*|psi|^2) + V*psi)."""
    ws = _Workspace(cfg)
    return WaveField(cfg.grid, ws.rhs(0.0, psi.samples))


def conserved_quantities(psi: WaveField, cfg: EvolutionConfig) -> tuple[float, float]:
    """(mass, energy): the squared L2 norm and the Hamiltonian by grid quadrature."""
    ws = _Workspace(cfg)
    return ws.mass_energy(psi.samples)


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: list = dc_field(repr=False)
    mass: np.ndarray = dc_field(repr=False)
    energy: np.ndarray = dc_field(repr=False)

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / abs(self.mass[0]))

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])) / abs(self.energy[0]))

    def deviation_from(self, reference: WaveField) -> np.ndarray:
        """sup_x | |psi(t)| - |phi| | per snapshot: distance from the phase orbit."""
        ref = np.abs(reference.samples)
        return np.array(
            [np.max(np.abs(np.abs(s.samples) - ref)) for s in self.states]
        )


def _record_times(cfg: EvolutionConfig) -> np.ndarray:
    n = int(np.ceil(cfg.time_horizon / cfg.record_every - 1e-9))
    t = np.arange(n + 1) * cfg.record_every
    if t[-1] < cfg.time_horizon - 1e-12 * cfg.time_horizon:
        t = np.append(t, cfg.time_horizon)
    else:
        t[-1] = cfg.time_horizon
    return t


def _rk4_span(f, t0, t1, y, dt):
    nsteps = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / nsteps
    t = t0
    for _ in range(nsteps):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def evolve(psi0: WaveField, cfg: EvolutionConfig) -> Trajectory:
    """Integrate to cfg.time_horizon, recording snapshots every record_every.

    Raises NonFiniteError on blow-up and StepSizeUnderflowError on stepper
    stall; both carry the partial trajectory in their ``trajectory`` attribute.
    """
    if psi0.grid != cfg.grid:
        raise ValueError("initial state grid does not match config grid")
    ws = _Workspace(cfg)
    rec = _record_times(cfg)

    if cfg.integrating_factor:
        phase = ws.half_ksq  # linear symbol: psi_hat' = -i*phase*psi_hat + ...

        def f(t, u):
            e = np.exp(1j * phase * t)
            y = np.fft.ifft(u / e)
            return e * ws.nonlinear_rhs_hat(t, y)

        to_state = lambda t, u: np.fft.ifft(u / np.exp(1j * phase * t))
        y = np.fft.fft(psi0.samples.astype(complex))
    else:
        f = ws.rhs
        to_state = lambda t, u: u
        y = psi0.samples.astype(complex)

    times, states, masses, energies = [], [], [], []

    def snapshot(t, u):
        state = WaveField(cfg.grid, to_state(t, u))
        m, e = ws.mass_energy(state.samples)
        times.append(t)
        states.append(state)
        masses.append(m)
        energies.append(e)

    def partial():
        return Trajectory(np.array(times), states, np.array(masses), np.array(energies))

    snapshot(rec[0], y)
    for t0, t1 in zip(rec[:-1], rec[1:]):
        if isinstance(cfg.stepper, FixedRK4):
            if cfg.filter_mode == "per-step":
                nsteps = max(1, int(np.ceil((t1 - t0) / cfg.stepper.dt - 1e-12)))
                h = (t1 - t0) / nsteps
                t = t0
                for _ in range(nsteps):
                    y = _rk4_span(f, t, t + h, y, h)
                    y = np.fft.ifft(np.fft.fft(y) * ws.filt)
                    t += h
            else:
                y = _rk4_span(f, t0, t1, y, cfg.stepper.dt)
        else:
            sol = solve_ivp(f, (t0, t1), y, method="RK45",
                            rtol=cfg.stepper.rtol, atol=cfg.stepper.atol,
                            t_eval=(t1,), dense_output=False)
            if not sol.success:
                state_bad = not np.all(np.isfinite(sol.y[:, -1])) if sol.y.size else True
                if state_bad:
                    raise NonFiniteError(
                        f"non-finite state while integrating [{t0:.4g}, {t1:.4g}]: "
                        f"{sol.message}", trajectory=partial())
                raise StepSizeUnderflowError(
                    f"stepper stalled in [{t0:.4g}, {t1:.4g}]: {sol.message}",
                    trajectory=partial())
            y = sol.y[:, -1]
        if not np.all(np.isfinite(y)):
            raise NonFiniteError(
                f"non-finite state detected at t = {t1:.6g} (blow-up)",
                trajectory=partial())
        snapshot(t1, y)
    return partial()


@dataclass(frozen=True)
class PerturbationSpec:
    """Random perturbation nu*m(x)*exp(i*theta(x)) with ||m||_2 = 1."""

    nu: float
    seed: int
    mode_cutoff: int = 16

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.mode_cutoff < 1:
            raise ValueError("mode_cutoff must be positive")


def random_band_limited(grid: PeriodicGrid, seed: int, mode_cutoff: int) -> WaveField:
    """Real field with modes |j| <= mode_cutoff, seeded, normalized to ||m||_2 = 1."""
    if mode_cutoff >= grid.num_modes // 2:
        raise ValueError("mode_cutoff must be below the Nyquist index")
    rng = np.random.default_rng(seed)
    c = np.zeros(grid.num_modes, dtype=complex)
    modes = grid.modes
    c[modes == 0] = rng.normal()
    for m in range(1, mode_cutoff + 1):
        re, im = rng.normal(), rng.normal()
        c[modes == m] = (re + 1j * im) / 2.0
        c[modes == -m] = (re - 1j * im) / 2.0
    f = WaveField.from_coeffs(grid, c)
    return WaveField(grid, f.samples.real / f.l2_norm())


def perturbed_initial(state: StationaryState, spec: PerturbationSpec) -> WaveField:
    """phi + nu*m(x)*exp(i*theta(x)) with theta the phase of phi; deterministic per seed."""
    phi = state.field
    if spec.nu == 0:
        return phi
    m = random_band_limited(phi.grid, spec.seed, spec.mode_cutoff)
    theta = np.angle(phi.samples)
    return WaveField(phi.grid, phi.samples + spec.nu * m.samples * np.exp(1j * theta))


# ---------------------------------------------------------------------------
# CSV export


def write_trajectory_csv(traj: Trajectory, path):
    """Long format: one row per (t, grid index) with Re/Im of the state."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x_index", "re_psi", "im_psi"])
        for t, state in zip(traj.times, traj.states):
            for idx, val in enumerate(state.samples):
                w.writerow([repr(float(t)), idx, repr(float(val.real)),
                            repr(float(val.imag))])


def write_summary_csv(traj: Trajectory, path, reference: WaveField | None = None):
    """Per-snapshot mass/energy, plus orbit deviation when a reference is given."""
    dev = traj.deviation_from(reference) if reference is not None else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t", "mass", "energy"]
        if dev is not None:
            header.append("mod_deviation")
        w.writerow(header)
        for i, t in enumerate(traj.times):
            row = [repr(float(t)), repr(float(traj.mass[i])), repr(float(traj.energy[i]))]
            if dev is not None:
                row.append(repr(float(dev[i])))
            w.writerow(row)
