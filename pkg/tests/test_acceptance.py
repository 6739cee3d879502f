"""End-to-end acceptance checks.

Twelve numbered criteria cover the toolkit's contracts: the convolution
multiplier identity, exact-solution residuals, conservation, the
nonlocal-to-local convergence sweep, closed-form spectra and Krein forms,
the four published regimes, the instability threshold constant, the Hill
quadratic form, and the zero-mode structure.  Each test prints one
PASS/FAIL line (bypassing capture) with the measured numbers and elapsed
time, then asserts the documented bound together with its runtime budget.
"""

import time

import numpy as np

from nlgp import (
    AdaptiveRK45,
    EvolutionConfig,
    KernelSpec,
    PeriodicGrid,
    PerturbationSpec,
    ScaledKernel,
    SineSquared,
    WaveField,
    a_crit,
    analytic_spectrum_V0_zero,
    assemble,
    b_star,
    build_solution,
    convolve_periodic,
    evolve,
    generalized_zero_mode,
    hill_quadratic_form,
    krein_form,
    match_spectra,
    matrix_quadratic_form,
    multiplier,
    perturbed_initial,
    phase_zero_mode,
    run_aes_sweep,
    run_figure_regime,
    solution_params,
    spectrum,
    stationary_residual,
)
from nlgp.experiments import DEFAULT_SEED, FIGURE_REGIMES

_NORMALIZED = KernelSpec.gaussian_normalized()
_RAW = KernelSpec.gaussian_raw()


def _verdict(capsys, num, ok, detail):
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


def test_criterion_01_multiplier_convolution_identity(capsys, tmp_path):
    # three kernel families with closed-form or tabulated symbols; the
    # quadrature-backed algebraic family has its own oracle test and is
    # far too slow for this 1 s budget
    s_tab = np.linspace(0.0, 40.0, 2001)
    table = tmp_path / "bump.csv"
    table.write_text("\n".join(
        f"{float(a)!r},{float(b)!r}"
        for a, b in zip(s_tab, np.exp(-(s_tab**2) / 5.0))) + "\n")
    families = [_NORMALIZED, _RAW, KernelSpec.from_table(table)]
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(200):
        base = families[i % 3]
        eps = 0.0 if i % 10 == 0 else float(rng.uniform(0.0, 2.0))
        period = float(rng.choice([2.0 * np.pi, 5.0, 4.0 * np.pi]))
        grid = PeriodicGrid(period, 128)
        j = int(rng.integers(-63, 64))
        kern = ScaledKernel(base, eps)
        e_j = WaveField.basis_mode(grid, j)
        r_hat = float(multiplier(kern, 2.0 * np.pi * j / period))
        err = (convolve_periodic(kern, e_j) - e_j * r_hat).l2_norm()
        worst = max(worst, err)
    dt = time.perf_counter() - t0
    ok = worst < 1e-12 and dt < 1.0
    _verdict(capsys, 1, ok,
             f"200 triples, worst identity error {worst:.3e} "
             f"(< 1e-12), {dt:.2f}s (< 1s)")


def test_criterion_02_exact_solution_residual(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    grid = PeriodicGrid(2.0 * np.pi, 256)
    worst = 0.0
    for i in range(50):
        k = float(rng.choice([1.0, 2.0]))
        eps = 0.0 if i % 5 == 0 else float(rng.uniform(0.0, 0.5))
        kern = ScaledKernel(_NORMALIZED, eps)
        if i % 7 == 0:
            # repulsive potential: A < 0, so B must sit above -A
            from nlgp import beta
            V0 = float(rng.uniform(0.05, 0.5))
            B = V0 / beta(kern, k) + float(rng.uniform(0.1, 2.0))
        else:
            V0 = -float(10.0 ** rng.uniform(-1.3, 0.3))
            B = float(10.0 ** rng.uniform(-1.0, 0.7))
        state = build_solution(B, V0, k, 1, kern, grid)
        worst = max(worst, stationary_residual(state))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 5.0
    _verdict(capsys, 2, ok,
             f"50 tuples at N=256, worst residual {worst:.3e} "
             f"(< 1e-9), {dt:.2f}s (< 5s)")


def test_criterion_03_conservation_in_regime_1b(capsys):
    t0 = time.perf_counter()
    p = FIGURE_REGIMES["1b"]
    grid = PeriodicGrid(8.0 * np.pi, 128)
    kern = ScaledKernel(_RAW, p["eps"])
    state = build_solution(p["B"], p["V0"], 1.0, 1, kern, grid)
    psi0 = perturbed_initial(state, PerturbationSpec(
        nu=p["nu"], seed=DEFAULT_SEED, mode_cutoff=16))
    traj = evolve(psi0, EvolutionConfig(
        grid=grid, kernel=kern, potential=SineSquared(p["V0"], 1.0), alpha=1,
        time_horizon=10.0, record_every=0.5,
        stepper=AdaptiveRK45(rtol=1e-10, atol=1e-10)))
    mass = traj.mass_drift()
    energy = traj.energy_drift()
    dt = time.perf_counter() - t0
    ok = mass < 1e-8 and energy < 1e-6 and dt < 60.0
    _verdict(capsys, 3, ok,
             f"T=10 drifts: mass {mass:.3e} (< 1e-8), "
             f"energy {energy:.3e} (< 1e-6), {dt:.1f}s (< 60s)")


def test_criterion_04_aes_convergence_sweep(capsys):
    t0 = time.perf_counter()
    table = run_aes_sweep((0.1, 0.05, 0.025, 0.0125))
    orders = table.orders()
    errs = ", ".join(f"{r.epsilon:g}:{r.err_linf:.2e}" for r in table.rows)
    dt = time.perf_counter() - t0
    ok = (table.strictly_decreasing() and len(orders) == 3
          and min(orders) >= 0.8 and dt < 600.0)
    _verdict(capsys, 4, ok,
             f"errors {{{errs}}} strictly decreasing, orders "
             f"{[round(o, 2) for o in orders]} (>= 0.8), {dt:.0f}s (< 600s)")


def _spectrum_tuples(count=20):
    rng = np.random.default_rng(777)
    out = []
    for i in range(count):
        B = float(10.0 ** rng.uniform(-0.7, 0.5))
        eps = 0.0 if i % 5 == 0 else float(rng.uniform(0.0, 1.0))
        mu = float(rng.uniform(0.05, 0.95))
        k = float(rng.choice([1.0, 2.0]))
        out.append((B, eps, mu, k))
    return out


def test_criterion_05_analytic_vs_matrix_spectra(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for B, eps, mu, k in _spectrum_tuples():
        params = solution_params(B, 0.0, k, 1, ScaledKernel(_NORMALIZED, eps))
        analytic = analytic_spectrum_V0_zero(range(-16, 17), mu, params)
        report = spectrum(assemble(mu, 64, params))
        _, gap = match_spectra(analytic, report, gap_tol=1e-4)
        worst = max(worst, gap)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 30.0
    _verdict(capsys, 5, ok,
             f"20 tuples, M=64, |n|<=16: worst eigenvalue gap {worst:.3e} "
             f"(< 1e-6), {dt:.1f}s (< 30s)")


def test_criterion_06_krein_form_and_b_star_chain(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for B, eps, mu, k in _spectrum_tuples():
        params = solution_params(B, 0.0, k, 1, ScaledKernel(_NORMALIZED, eps))
        op = assemble(mu, 64, params)
        for ae in analytic_spectrum_V0_zero(range(-16, 17), mu, params):
            closed = krein_form(ae.n, ae.branch, mu, params)
            direct = matrix_quadratic_form(op, ae.eigenvector(64))
            worst = max(worst,
                        abs(closed - direct) / max(1.0, abs(closed)))
    signs_ok = True
    for k, eps in ((1.0, 0.0), (1.0, 0.5), (2.0, 0.25)):
        kern = ScaledKernel(_NORMALIZED, eps)
        B = 1.3 * b_star(k, kern)
        params = solution_params(B, 0.0, k, 1, kern)
        for mu in (0.2, 0.5, 0.8):
            report = spectrum(assemble(mu, 32, params))
            signs_ok = (signs_ok and report.counts == (0, 0, 0, 0)
                        and all(s == 1.0 for s in report.krein))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and signs_ok and dt < 30.0
    _verdict(capsys, 6, ok,
             f"worst quadratic-form gap {worst:.3e} (< 1e-8); "
             f"B > B* all-positive Krein and n(L)=0: {signs_ok}, "
             f"{dt:.1f}s (< 30s)")


def test_criterion_07_unstable_regime_1a(capsys):
    t0 = time.perf_counter()
    result = run_figure_regime("1a")
    nu = FIGURE_REGIMES["1a"]["nu"]
    max_dev = float(np.max(result.deviations))
    dt = time.perf_counter() - t0
    ok = result.abscissa > 1e-3 and max_dev > 10.0 * nu and dt < 120.0
    _verdict(capsys, 7, ok,
             f"abscissa {result.abscissa:.3e} (> 1e-3), max deviation "
             f"{max_dev:.3g} (> 10 nu = {10 * nu:g}), {dt:.1f}s (< 120s)")


def test_criterion_08_stable_regime_1b(capsys):
    t0 = time.perf_counter()
    result = run_figure_regime("1b")
    nu = FIGURE_REGIMES["1b"]["nu"]
    max_dev = float(np.max(result.deviations))
    dt = time.perf_counter() - t0
    ok = result.abscissa < 1e-8 and max_dev < 5.0 * nu and dt < 120.0
    _verdict(capsys, 8, ok,
             f"abscissa {result.abscissa:.3e} (< 1e-8), max deviation "
             f"{max_dev:.3g} (< 5 nu = {5 * nu:g}), {dt:.1f}s (< 120s)")


def test_criterion_09_robust_regimes_2a_2b(capsys):
    t0 = time.perf_counter()
    devs = {}
    for which in ("2a", "2b"):
        result = run_figure_regime(which)
        devs[which] = (float(np.max(result.deviations)),
                       FIGURE_REGIMES[which]["nu"])
    dt = time.perf_counter() - t0
    ok = all(d < 10.0 * nu for d, nu in devs.values()) and dt < 240.0
    shown = ", ".join(f"{w}: {d:.3g} (< {10 * nu:g})"
                      for w, (d, nu) in devs.items())
    _verdict(capsys, 9, ok, f"max deviations {shown}, {dt:.0f}s (< 240s)")


def test_criterion_10_instability_threshold_constant(capsys):
    t0 = time.perf_counter()
    vals = [a_crit(k) / k**2 for k in (1.0, 2.0, 3.7)]
    gap = max(abs(v - 2.4533) for v in vals)
    dt = time.perf_counter() - t0
    ok = gap < 5e-4 and dt < 5.0
    _verdict(capsys, 10, ok,
             f"A_crit/k^2 = {vals[0]:.6f}, deviation {gap:.2e} "
             f"(< 5e-4), {dt:.2f}s")


def test_criterion_11_hill_quadratic_form_and_index(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1111)
    M = 24
    size = 2 * M + 1
    kern0 = ScaledKernel(_NORMALIZED, 0.0)
    worst = 0.0
    for case in range(100):
        A = float(rng.uniform(0.05, 3.0))
        params = solution_params(0.0, -A, 1.0, 1, kern0)
        op = assemble(0.0, M, params)
        l_minus = op.L_matrix[size:, size:]
        js = rng.choice(np.arange(-M + 4, M - 3), size=6, replace=False)
        g = {int(j): complex(rng.normal(), rng.normal()) for j in js}
        vec = np.zeros(size, dtype=complex)
        for j, gj in g.items():
            vec[M + j] = gj
        direct = float(np.real(vec.conj() @ (l_minus @ vec)))
        summed = hill_quadratic_form(g, A, 1.0)
        worst = max(worst, abs(direct - summed) / max(1.0, abs(summed)))
    index_ok = True
    for A in (0.1, 0.25, 0.45):
        params = solution_params(0.0, -A, 1.0, 1, kern0)
        for mu in (0.25, 0.5, 0.75):
            op = assemble(mu, M, params)
            ev = np.linalg.eigvalsh(op.L_matrix[:size, :size])
            index_ok = index_ok and int(np.sum(ev < -1e-8)) == 2
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and index_ok and dt < 10.0
    _verdict(capsys, 11, ok,
             f"100 vectors, worst form gap {worst:.3e} (< 1e-10); "
             f"n(L+)=2 for A in (0, k^2/2): {index_ok}, {dt:.1f}s (< 10s)")


def test_criterion_12_zero_mode_structure(capsys):
    t0 = time.perf_counter()
    worst_ker = 0.0
    for B, V0, eps in ((1.0, -1.0, 0.3), (0.7, 0.25, 0.0), (1.3, 0.0, 0.4)):
        params = solution_params(B, V0, 1.0, 1, ScaledKernel(_NORMALIZED, eps))
        op = assemble(0.0, 16, params)
        v = phase_zero_mode(op)
        worst_ker = max(worst_ker, float(np.max(np.abs(op.JL_matrix @ v))))
    worst_gen = 0.0
    for eps in (0.0, 0.4):
        B = 1.3
        params = solution_params(B, 0.0, 1.0, 1, ScaledKernel(_NORMALIZED, eps))
        op = assemble(0.0, 16, params)
        g = generalized_zero_mode(op)  # (cos x, sin x) since D = 1
        worst_gen = max(worst_gen,
                        float(np.max(np.abs(op.L_matrix @ g - 2.0 * B * g))))
    dt = time.perf_counter() - t0
    ok = worst_ker < 1e-10 and worst_gen < 1e-10 and dt < 5.0
    _verdict(capsys, 12, ok,
             f"|JL (D sin, -cos)| {worst_ker:.3e} and "
             f"|L (cos, sin) - 2B (cos, sin)| {worst_gen:.3e} "
             f"(both < 1e-10), {dt:.2f}s")
