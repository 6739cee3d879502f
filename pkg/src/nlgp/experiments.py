"""Scripted reproductions: the AES epsilon-sweep, the four figure regimes,
and stability maps over the (B, V0) plane.

Every runner can write its artifacts (CSV tables, a config echo, and a
matplotlib plot script) into an output directory; identical inputs and seed
produce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bloch, evolution, kernels, waves
from ._config import format_flat_config
from .spectral import PeriodicGrid, WaveField

# Parameter sets of the four published stability figures (k = 1, alpha = 1,
# 128 modes on [0, 8*pi], perturbations with 16 modes).
FIGURE_REGIMES = {
    "1a": {"B": 0.01, "V0": -2.46, "eps": 0.0, "nu": 0.01},
    "1b": {"B": 1.0, "V0": -0.01, "eps": 0.01, "nu": 0.01},
    "2a": {"B": 1.0, "V0": -1.0, "eps": 0.01, "nu": 0.01},
    "2b": {"B": 1.0, "V0": -1.0, "eps": 0.01, "nu": 0.1},
}

DEFAULT_SEED = 1234


@dataclass(frozen=True)
class ExperimentPlan:
    """Resolved settings of one experiment run, echoed next to its outputs."""

    name: str
    settings: dict
    outputs: Path | None
    seed: int


def _write_outputs(plan: ExperimentPlan, writers: dict):
    if plan.outputs is None:
        return
    out = Path(plan.outputs)
    out.mkdir(parents=True, exist_ok=True)
    echo = dict(plan.settings)
    echo["experiment.name"] = plan.name
    echo["experiment.seed"] = plan.seed
    (out / f"{plan.name}.plan.cfg").write_text(format_flat_config(echo))
    for fname, writer in writers.items():
        writer(out / fname)


# ---------------------------------------------------------------------------
# AES sweep


@dataclass(frozen=True)
class AesRow:
    epsilon: float
    err_linf: float
    err_h1: float


@dataclass(frozen=True)
class AesTable:
    rows: tuple

    def orders(self) -> list:
        """Empirical convergence orders log2(E(2 eps)/E(eps)) between halvings."""
        rows = [r for r in self.rows if r.epsilon > 0]
        out = []
        for a, b in zip(rows[:-1], rows[1:]):
            if abs(a.epsilon - 2.0 * b.epsilon) < 1e-12 and b.err_linf > 0:
                out.append(float(np.log2(a.err_linf / b.err_linf)))
        return out

    def strictly_decreasing(self) -> bool:
        errs = [r.err_linf for r in self.rows if r.epsilon > 0]
        return all(a > b for a, b in zip(errs[:-1], errs[1:]))


def run_aes_sweep(epsilons=(0.1, 0.05, 0.025, 0.0125), *, B=1.0, V0=-1.0, k=1.0,
                  alpha=1, base: kernels.KernelSpec | None = None, horizon=5.0,
                  num_modes=64, rtol=1e-10, atol=1e-10, record_every=0.2,
                  out_dir=None, seed=DEFAULT_SEED) -> AesTable:
    """Evolve nonlocal vs local flows from identical initial data.

    The initial state is the exact local-equation profile; for each eps the
    nonlocal flow is compared against the local one in sup norm over both
    time and space (and in H1).  The table is sorted by decreasing eps; an
    eps = 0 entry runs the nonlocal code path with the delta-limit kernel.
    """
    if base is None:
        base = kernels.KernelSpec.gaussian_normalized()
    eps_sorted = sorted(set(float(e) for e in epsilons), reverse=True)
    if any(e < 0 for e in eps_sorted):
        raise ValueError("epsilons must be nonnegative")
    grid = PeriodicGrid(2.0 * np.pi / k, num_modes)
    local_kernel = kernels.ScaledKernel(kernels.KernelSpec.gaussian_normalized(), 0.0)
    state = waves.build_solution(B, V0, k, alpha, local_kernel, grid)
    psi0 = state.field
    stepper = evolution.AdaptiveRK45(rtol=rtol, atol=atol)

    def config_for(kern):
        return evolution.EvolutionConfig(
            grid=grid, kernel=kern, potential=evolution.SineSquared(V0, k),
            alpha=alpha, time_horizon=horizon, stepper=stepper,
            record_every=record_every)

    ref = evolution.evolve(psi0, config_for(None))
    rows = []
    for eps in eps_sorted:
        kern = kernels.ScaledKernel(base, eps)
        traj = evolution.evolve(psi0, config_for(kern))
        err_linf = 0.0
        err_h1 = 0.0
        for sa, sb in zip(traj.states, ref.states):
            diff = sa - sb
            err_linf = max(err_linf, diff.linf_norm())
            err_h1 = max(err_h1, diff.hs_norm(1.0))
        rows.append(AesRow(eps, err_linf, err_h1))
    table = AesTable(tuple(rows))

    plan = ExperimentPlan(
        name="aes-sweep",
        settings={
            "aes.B": B, "aes.V0": V0, "aes.k": k, "aes.alpha": alpha,
            "aes.kernel": base.family, "aes.horizon": horizon,
            "aes.num_modes": num_modes, "aes.record_every": record_every,
            "aes.epsilons": ",".join(repr(e) for e in eps_sorted),
            "evolution.rtol": rtol, "evolution.atol": atol,
        },
        outputs=out_dir, seed=seed)
    _write_outputs(plan, {
        "aes.csv": lambda p: _write_aes_csv(table, p),
        "plot_aes.py": _write_aes_plot_script,
    })
    return table


def _write_aes_csv(table: AesTable, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "sup_t_err_linf", "sup_t_err_h1"])
        for r in table.rows:
            w.writerow([repr(float(r.epsilon)), repr(float(r.err_linf)),
                        repr(float(r.err_h1))])


def _write_aes_plot_script(path):
    Path(path).write_text('''"""Log-log error-vs-epsilon plot for the AES sweep."""
import csv
import matplotlib.pyplot as plt

eps, e_inf, e_h1 = [], [], []
with open("aes.csv") as fh:
    for row in csv.DictReader(fh):
        if float(row["epsilon"]) > 0:
            eps.append(float(row["epsilon"]))
            e_inf.append(float(row["sup_t_err_linf"]))
            e_h1.append(float(row["sup_t_err_h1"]))
plt.loglog(eps, e_inf, "o-", label="sup-t Linf error")
plt.loglog(eps, e_h1, "s--", label="sup-t H1 error")
plt.xlabel("epsilon")
plt.ylabel("error vs local flow")
plt.legend()
plt.grid(True, which="both", alpha=0.3)
plt.savefig("aes.png", dpi=150, bbox_inches="tight")
''')


# ---------------------------------------------------------------------------
# Figure regimes


@dataclass(frozen=True, eq=False)
class FigureRegimeResult:
    regime: str
    params: waves.SolutionParams
    nu: float
    trajectory: evolution.Trajectory
    reports: list
    deviations: np.ndarray
    abscissa: float
    growth_rate: float | None
    warnings: tuple


def fit_growth_rate(times, deviations, nu: float, phi_sup: float) -> float | None:
    """Least-squares slope of log(deviation) over the window [3 nu, 0.3 sup|phi|].

    Returns None when fewer than three samples fall inside the window (no
    resolvable exponential stage).
    """
    t = np.asarray(times, float)
    d = np.asarray(deviations, float)
    mask = (d >= 3.0 * nu) & (d <= 0.3 * phi_sup) & (d > 0)
    if mask.sum() < 3:
        return None
    slope = np.polyfit(t[mask], np.log(d[mask]), 1)[0]
    return float(slope)


def run_figure_regime(which: str, *, kernel_base: kernels.KernelSpec | None = None,
                      seed=DEFAULT_SEED, horizon=30.0, num_modes=128, n_periods=4,
                      truncation=64, rtol=1e-10, atol=1e-10, record_every=0.25,
                      mode_cutoff=16, out_dir=None, threads=1) -> FigureRegimeResult:
    """Reproduce one published regime: perturbed evolution plus Bloch spectra.

    The regimes run with k = 1, alpha = 1 on [0, 8*pi].  The default kernel
    is the raw Gaussian used by the published numerics; pass a normalized
    base to get the theory-valid variant (the choice lands in the run
    metadata either way).
    """
    if which not in FIGURE_REGIMES:
        raise ValueError(f"unknown regime {which!r}; expected one of "
                         f"{sorted(FIGURE_REGIMES)}")
    reg = FIGURE_REGIMES[which]
    base = kernel_base if kernel_base is not None else kernels.KernelSpec.gaussian_raw()
    k, alpha = 1.0, 1
    grid = PeriodicGrid(8.0 * np.pi, num_modes)
    kern = kernels.ScaledKernel(base, reg["eps"])
    state = waves.build_solution(reg["B"], reg["V0"], k, alpha, kern, grid)
    psi0 = evolution.perturbed_initial(
        state, evolution.PerturbationSpec(nu=reg["nu"], seed=seed,
                                          mode_cutoff=mode_cutoff))
    cfg = evolution.EvolutionConfig(
        grid=grid, kernel=kern, potential=evolution.SineSquared(reg["V0"], k),
        alpha=alpha, time_horizon=horizon,
        stepper=evolution.AdaptiveRK45(rtol=rtol, atol=atol),
        record_every=record_every)
    traj = evolution.evolve(psi0, cfg)
    deviations = traj.deviation_from(state.field)

    reports = bloch.full_period_spectrum(n_periods, state.params, truncation,
                                         max_workers=threads)
    abscissa = max(rep.max_real_part for rep in reports)
    sigma = fit_growth_rate(traj.times, deviations, reg["nu"],
                            state.field.linf_norm())
    warnings = []
    if sigma is not None and sigma > 1e-2 and abscissa < sigma / 2.0:
        warnings.append(
            f"dynamics grow at fitted rate {sigma:.3g} but spectral abscissa is "
            f"only {abscissa:.3g}; linear theory and dynamics disagree")

    result = FigureRegimeResult(
        regime=which, params=state.params, nu=reg["nu"], trajectory=traj,
        reports=reports, deviations=deviations, abscissa=abscissa,
        growth_rate=sigma, warnings=tuple(warnings))

    plan = ExperimentPlan(
        name=f"figure-{which}",
        settings={
            "regime.B": reg["B"], "regime.V0": reg["V0"], "regime.eps": reg["eps"],
            "regime.nu": reg["nu"], "regime.k": k, "regime.alpha": alpha,
            "regime.kernel": base.family, "grid.num_modes": num_modes,
            "grid.period": grid.period, "evolution.horizon": horizon,
            "evolution.rtol": rtol, "evolution.atol": atol,
            "evolution.record_every": record_every,
            "perturbation.mode_cutoff": mode_cutoff,
            "spectrum.n_periods": n_periods, "spectrum.truncation": truncation,
        },
        outputs=out_dir, seed=seed)
    _write_outputs(plan, {
        "trajectory.csv": lambda p: evolution.write_trajectory_csv(traj, p),
        "summary.csv": lambda p: evolution.write_summary_csv(traj, p,
                                                             reference=state.field),
        "spectrum.csv": lambda p: bloch.write_eigen_csv(reports, p),
        "report.json": lambda p: _write_regime_json(result, p),
        "plot_regime.py": _write_regime_plot_script,
    })
    return result


def _write_regime_json(result: FigureRegimeResult, path):
    summary = bloch.eigen_summary(result.reports, result.params)
    payload = {
        "regime": result.regime,
        "nu": result.nu,
        "max_deviation": float(np.max(result.deviations)),
        "final_deviation": float(result.deviations[-1]),
        "growth_rate": result.growth_rate,
        "warnings": list(result.warnings),
        "spectrum": summary,
        "mass_drift": result.trajectory.mass_drift(),
        "energy_drift": result.trajectory.energy_drift(),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_regime_plot_script(path):
    Path(path).write_text('''"""Orbit deviation and Bloch spectrum plots for one figure regime."""
import csv
import matplotlib.pyplot as plt

t, dev = [], []
with open("summary.csv") as fh:
    for row in csv.DictReader(fh):
        t.append(float(row["t"]))
        dev.append(float(row["mod_deviation"]))
re, im = [], []
with open("spectrum.csv") as fh:
    for row in csv.DictReader(fh):
        re.append(float(row["re_lambda"]))
        im.append(float(row["im_lambda"]))

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.semilogy(t, dev)
ax1.set_xlabel("t")
ax1.set_ylabel("sup | |psi| - |phi| |")
ax1.grid(alpha=0.3)
ax2.plot(re, im, ".", markersize=3)
ax2.set_xlabel("Re lambda")
ax2.set_ylabel("Im lambda")
ax2.grid(alpha=0.3)
fig.savefig("regime.png", dpi=150, bbox_inches="tight")
''')


# ---------------------------------------------------------------------------
# Stability map


@dataclass(frozen=True, eq=False)
class StabilityMap:
    B_values: np.ndarray
    V0_values: np.ndarray
    abscissa: np.ndarray  # shape (len(B), len(V0)); NaN where no solution exists
    A_values: np.ndarray  # A for each V0
    b_star: float | None
    a_crit: float


def stability_map(B_values, V0_values, *, k=1.0, eps=0.0, alpha=1,
                  base: kernels.KernelSpec | None = None, n_periods=1,
                  truncation=32, out_dir=None, threads=1,
                  seed=DEFAULT_SEED) -> StabilityMap:
    """Spectral abscissa over a (B, V0) grid, with threshold annotations."""
    if base is None:
        base = kernels.KernelSpec.gaussian_normalized()
    B_values = np.asarray(sorted(set(float(b) for b in B_values)))
    V0_values = np.asarray(sorted(set(float(v) for v in V0_values)))
    if B_values.size == 0 or V0_values.size == 0:
        raise ValueError("B_values and V0_values must be nonempty")
    kern = kernels.ScaledKernel(base, eps)

    def point(args):
        B, V0 = args
        try:
            params = waves.solution_params(B, V0, k, alpha, kern)
        except (waves.OffsetTooSmallError, waves.BetaZeroError):
            return np.nan
        reports = bloch.full_period_spectrum(n_periods, params, truncation)
        return max(rep.max_real_part for rep in reports)

    tasks = [(B, V0) for B in B_values for V0 in V0_values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(point, tasks))
    else:
        flat = [point(t) for t in tasks]
    grid_vals = np.array(flat).reshape(len(B_values), len(V0_values))

    bta = kernels.beta(kern, k)
    A_values = -V0_values / (alpha * bta)
    try:
        bs = bloch.b_star(k, kern)
    except kernels.NonpositiveMultiplierError:
        bs = None
    result = StabilityMap(B_values, V0_values, grid_vals, A_values, bs,
                          bloch.a_crit(k))

    plan = ExperimentPlan(
        name="stability-map",
        settings={
            "map.k": k, "map.eps": eps, "map.alpha": alpha,
            "map.kernel": base.family, "map.n_periods": n_periods,
            "map.truncation": truncation,
            "map.B_values": ",".join(repr(float(b)) for b in B_values),
            "map.V0_values": ",".join(repr(float(v)) for v in V0_values),
        },
        outputs=out_dir, seed=seed)
    _write_outputs(plan, {
        "stability_map.csv": lambda p: _write_map_csv(result, p),
        "plot_map.py": _write_map_plot_script,
    })
    return result


def _write_map_csv(m: StabilityMap, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["B", "V0", "A", "abscissa", "above_b_star", "above_a_crit"])
        for i, B in enumerate(m.B_values):
            for j, V0 in enumerate(m.V0_values):
                above_bs = "" if m.b_star is None else int(B > m.b_star)
                above_ac = int(m.A_values[j] >= m.a_crit)
                w.writerow([repr(float(B)), repr(float(V0)),
                            repr(float(m.A_values[j])),
                            repr(float(m.abscissa[i, j])), above_bs, above_ac])


def _write_map_plot_script(path):
    Path(path).write_text('''"""Heat map of the spectral abscissa over the (B, V0) plane."""
import csv
import numpy as np
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("stability_map.csv")))
B = sorted({float(r["B"]) for r in rows})
V0 = sorted({float(r["V0"]) for r in rows})
Z = np.full((len(B), len(V0)), np.nan)
for r in rows:
    Z[B.index(float(r["B"])), V0.index(float(r["V0"]))] = float(r["abscissa"])
plt.pcolormesh(V0, B, np.log10(np.maximum(Z, 1e-16)), shading="nearest")
plt.colorbar(label="log10 spectral abscissa")
plt.xlabel("V0")
plt.ylabel("B")
plt.savefig("stability_map.png", dpi=150, bbox_inches="tight")
''')
