"""Exact traveling-wave states of the periodic (non)local GP equation.

For the potential V(x) = V0 sin^2(kx) the equation admits the stationary
profile (in the frame rotating at frequency omega)

    phi(x) = sqrt(B) cos(kx) + i sqrt(B+A) sin(kx),

where A = -V0/(alpha*beta(k; eps)) and beta is the kernel multiplier at
s = 2k.  The family exists whenever beta != 0 and B >= max(-A, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectral import PeriodicGrid, WaveField


class BetaZeroError(ValueError):
    """beta(k; eps) vanishes, so A = -V0/(alpha*beta) is undefined."""


class OffsetTooSmallError(ValueError):
    """The offset B violates B >= max(-A, 0)."""


class PeriodMismatchError(ValueError):
    """Grid period is not an integer multiple of the solution period 2*pi/k."""


_BETA_FLOOR = 1e-12


@dataclass(frozen=True)
class SolutionParams:
    """Inputs (B, V0, k, alpha, kernel) with the derived (beta, A, D, omega).

    Build through :func:`solution_params`; the constructor does not validate.
    D = sqrt(1 + A/B) is None at B = 0, where the modulus has no background
    offset and the linearization uses the canonical block form directly.
    """

    B: float
    V0: float
    k: float
    alpha: int
    kernel: kernels.ScaledKernel
    beta: float
    A: float
    D: float | None
    omega: float

    @property
    def epsilon(self) -> float:
        return self.kernel.epsilon


def solution_params(B, V0, k, alpha, kernel: kernels.ScaledKernel) -> SolutionParams:
    """Validate the input tuple and fill in beta, A, D, omega."""
    if k <= 0:
        raise ValueError(f"wavenumber k must be positive, got {k}")
    if alpha not in (+1, -1):
        raise ValueError(f"alpha must be +1 or -1, got {alpha}")
    if B < 0:
        raise OffsetTooSmallError(f"offset B must be nonnegative, got {B}")
    bta = kernels.beta(kernel, k)
    if V0 == 0.0:
        # A = -V0/(alpha beta) and the V0/(2 beta) frequency term both vanish
        # identically, so a degenerate beta (huge eps) is harmless here.
        A = 0.0
        omega_pot = 0.0
    else:
        if abs(bta) < _BETA_FLOOR:
            raise BetaZeroError(
                f"beta(k={k}, eps={kernel.epsilon}) = {bta:.3e} vanishes; "
                "the solution family is undefined there"
            )
        A = -V0 / (alpha * bta)
        omega_pot = -V0 / (2.0 * bta)
    if B < max(-A, 0.0) - 1e-12:
        raise OffsetTooSmallError(
            f"need B >= max(-A, 0) = {max(-A, 0.0):.6g}, got B = {B}"
        )
    D = float(np.sqrt(1.0 + A / B)) if B > 0 else None
    omega = (V0 + k**2) / 2.0 + alpha * B + omega_pot
    # For kernels of non-unit mass, stationarity shifts the rotation frequency
    # by a constant: the textbook formula above assumes zeta_hat(0) = 1.
    zh0 = float(kernel.base.zeta_hat(0.0))
    omega += alpha * (zh0 - 1.0) * (B + A / 2.0)
    return SolutionParams(float(B), float(V0), float(k), int(alpha), kernel,
                          float(bta), float(A), D, float(omega))


@dataclass(frozen=True, eq=False)
class StationaryState:
    params: SolutionParams
    field: WaveField

    @property
    def grid(self) -> PeriodicGrid:
        return self.field.grid

    def intensity(self) -> np.ndarray:
        """Closed-form |phi|^2 = B + A sin^2(kx) on the grid."""
        p = self.params
        return p.B + p.A * np.sin(p.k * self.grid.points) ** 2

    def l2_norm_closed_form(self) -> float:
        """||phi||_2 = sqrt(T*(B + A/2)) from integrating the intensity."""
        p = self.params
        return float(np.sqrt(self.grid.period * (p.B + p.A / 2.0)))

    def phase(self) -> np.ndarray:
        return np.angle(self.field.samples)


def _check_commensurate(grid: PeriodicGrid, k: float):
    ratio = grid.period * k / (2.0 * np.pi)
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise PeriodMismatchError(
            f"grid period {grid.period:.6g} is not an integer multiple of 2*pi/k = "
            f"{2*np.pi/k:.6g}"
        )


def build_solution(B, V0, k, alpha, kernel: kernels.ScaledKernel,
                   grid: PeriodicGrid) -> StationaryState:
    """Construct the stationary state on ``grid``; validates all constraints."""
    params = solution_params(B, V0, k, alpha, kernel)
    _check_commensurate(grid, params.k)
    x = grid.points
    samples = (np.sqrt(params.B) * np.cos(params.k * x)
               + 1j * np.sqrt(params.B + params.A) * np.sin(params.k * x))
    return StationaryState(params, WaveField(grid, samples))


def sine_squared_potential(params: SolutionParams, grid: PeriodicGrid) -> np.ndarray:
    return params.V0 * np.sin(params.k * grid.points) ** 2


def stationary_residual(state: StationaryState) -> float:
    """L2 norm of -phi''/2 + alpha*phi*(R*|phi|^2) + V*phi - omega*phi.

    Evaluated pseudo-spectrally; for the band-limited exact profile this
    measures discretization error only and sits near machine precision.
    """
    p = state.params
    phi = state.field
    grid = phi.grid
    lap = phi.derivative(2)
    modsq = WaveField(grid, np.abs(phi.samples) ** 2)
    conv = kernels.convolve_periodic(p.kernel, modsq)
    V = sine_squared_potential(p, grid)
    r = (-0.5 * lap.samples
         + p.alpha * phi.samples * conv.samples
         + V * phi.samples
         - p.omega * phi.samples)
    return WaveField(grid, r).l2_norm()
