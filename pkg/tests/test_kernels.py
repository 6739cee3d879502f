import numpy as np
import pytest
from scipy.special import k1

from nlgp.kernels import (
    KernelSpec,
    NonpositiveMultiplierError,
    ScaledKernel,
    beta,
    convolve_periodic,
    kernel_from_name,
    lipschitz_gap,
    multiplier,
    validate_hypotheses,
    x_weighted_l1,
)
from nlgp.spectral import PeriodicGrid, WaveField


def test_gaussian_normalized_closed_forms():
    base = KernelSpec.gaussian_normalized()
    assert abs(base.zeta(0.0) - 1.0 / np.sqrt(np.pi)) < 1e-14
    assert abs(base.zeta_hat(0.0) - 1.0) < 1e-14
    assert abs(base.zeta_hat(2.0) - np.exp(-1.0)) < 1e-14
    assert base.l1_norm == 1.0
    assert abs(x_weighted_l1(base) - 1.0 / np.sqrt(np.pi)) < 1e-6


def test_gaussian_raw_closed_forms():
    base = KernelSpec.gaussian_raw()
    assert abs(base.zeta(0.0) - 1.0) < 1e-14
    assert abs(base.zeta_hat(0.0) - np.sqrt(np.pi)) < 1e-14
    assert abs(base.l1_norm - np.sqrt(np.pi)) < 1e-14
    assert abs(x_weighted_l1(base) - 1.0) < 1e-6


def test_algebraic_decay_transform_values():
    # p = 3: zeta(x) = 1/(2 (1+x^2)^{3/2}) and the cosine transform is |s| K_1(|s|)
    base = KernelSpec.algebraic_decay(3.0)
    assert abs(base.zeta(0.0) - 0.5) < 1e-12
    x = np.linspace(-60, 60, 20001)
    mass = np.trapezoid(base.zeta(x), x)
    assert abs(mass - 1.0) < 1e-3
    assert abs(base.zeta_hat(0.0) - 1.0) < 1e-8
    assert abs(base.zeta_hat(1.0) - k1(1.0)) < 1e-8
    assert abs(base.zeta_hat(2.5) - 2.5 * k1(2.5)) < 1e-8


def test_algebraic_decay_requires_integrable_tail():
    with pytest.raises(ValueError):
        KernelSpec.algebraic_decay(1.0)
    with pytest.raises(ValueError):
        KernelSpec.algebraic_decay(0.5)


def test_kernel_from_name():
    assert kernel_from_name("gaussian-normalized").family == "gaussian-normalized"
    assert kernel_from_name("gaussian-raw").family == "gaussian-raw"
    assert kernel_from_name("algebraic:2.5").family == "algebraic:2.5"
    with pytest.raises(ValueError):
        kernel_from_name("triangle")


def test_scaled_kernel_rejects_negative_epsilon():
    base = KernelSpec.gaussian_normalized()
    with pytest.raises(ValueError):
        ScaledKernel(base, -0.1)


def test_multiplier_is_transform_at_scaled_argument():
    base = KernelSpec.gaussian_normalized()
    kern = ScaledKernel(base, 0.7)
    s = np.array([0.0, 1.0, -2.3, 5.0])
    assert np.max(np.abs(multiplier(kern, s) - np.exp(-((0.7 * s) ** 2) / 4))) < 1e-14


def test_epsilon_zero_multiplier_is_kernel_mass():
    for name in ("gaussian-normalized", "gaussian-raw"):
        kern = ScaledKernel(kernel_from_name(name), 0.0)
        zh0 = kern.base.zeta_hat(0.0)
        s = np.linspace(-40, 40, 17)
        assert np.max(np.abs(multiplier(kern, s) - zh0)) < 1e-14


def test_convolution_acts_as_multiplier_on_basis_modes():
    # the core identity: R_eps * e_j = zeta_hat(2 pi j eps / T) e_j
    rng = np.random.default_rng(17)
    grid = PeriodicGrid(2 * np.pi, 64)
    bases = [KernelSpec.gaussian_normalized(), KernelSpec.gaussian_raw(),
             KernelSpec.algebraic_decay(2.5)]
    for _ in range(20):
        base = bases[rng.integers(len(bases))]
        eps = float(rng.uniform(0.0, 2.0))
        j = int(rng.integers(-32, 32))
        kern = ScaledKernel(base, eps)
        e_j = WaveField.basis_mode(grid, j)
        out = convolve_periodic(kern, e_j)
        r_hat = multiplier(kern, 2 * np.pi * j / grid.period)
        assert (out - r_hat * e_j).l2_norm() < 1e-12


def test_convolution_of_constant_is_mass_multiple():
    grid = PeriodicGrid(2 * np.pi, 32)
    one = WaveField.from_samples(grid, np.ones(32, complex))
    kern = ScaledKernel(KernelSpec.gaussian_raw(), 0.4)
    out = convolve_periodic(kern, one)
    assert np.max(np.abs(out.samples - np.sqrt(np.pi))) < 1e-12


def test_multiplier_decays_monotonically_in_epsilon():
    kern_vals = []
    for eps in (1.0, 10.0, 100.0, 1000.0):
        kern = ScaledKernel(KernelSpec.gaussian_normalized(), eps)
        kern_vals.append(float(multiplier(kern, 1.3)))
    # non-increasing and vanishing; the tail underflows to exactly zero
    assert all(a >= b for a, b in zip(kern_vals[:-1], kern_vals[1:]))
    assert kern_vals[0] > kern_vals[1]
    assert kern_vals[-1] < 1e-300


def test_beta_is_multiplier_at_twice_wavenumber():
    kern = ScaledKernel(KernelSpec.gaussian_normalized(), 0.25)
    k = 1.5
    assert beta(kern, k) == pytest.approx(float(multiplier(kern, 2 * k)), rel=1e-14)


def test_multiplier_lipschitz_in_epsilon():
    # |zeta_hat(eps1 s) - zeta_hat(eps2 s)| <= |eps1 - eps2| |s| ||x zeta||_1
    rng = np.random.default_rng(23)
    base = KernelSpec.gaussian_normalized()
    bound_const = x_weighted_l1(base)
    for _ in range(50):
        e1, e2 = rng.uniform(0.0, 3.0, 2)
        s = float(rng.uniform(-10, 10))
        gap = lipschitz_gap(ScaledKernel(base, e1), ScaledKernel(base, e2), s)
        actual = abs(float(multiplier(ScaledKernel(base, e1), s))
                     - float(multiplier(ScaledKernel(base, e2), s)))
        assert gap == pytest.approx(actual, abs=1e-15)
        assert gap <= abs(e1 - e2) * abs(s) * bound_const + 1e-12


def test_lipschitz_gap_rejects_family_mismatch():
    a = ScaledKernel(KernelSpec.gaussian_normalized(), 0.1)
    b = ScaledKernel(KernelSpec.gaussian_raw(), 0.1)
    with pytest.raises(ValueError):
        lipschitz_gap(a, b, 1.0)


def _write_table(tmp_path, rows, name="kern.csv"):
    path = tmp_path / name
    path.write_text("\n".join(f"{s},{v}" for s, v in rows) + "\n")
    return path


def test_from_table_interpolates_transform(tmp_path):
    s_grid = np.linspace(0, 12, 1201)
    rows = list(zip(s_grid, np.exp(-(s_grid**2) / 4)))
    base = KernelSpec.from_table(_write_table(tmp_path, rows))
    s = np.linspace(0, 10, 101)
    assert np.max(np.abs(base.zeta_hat(s) - np.exp(-(s**2) / 4))) < 1e-4
    # reconstructed zeta should resemble the normalized Gaussian
    x = np.linspace(-4, 4, 81)
    assert np.max(np.abs(base.zeta(x) - np.exp(-(x**2)) / np.sqrt(np.pi))) < 1e-3


def test_from_table_input_validation(tmp_path):
    with pytest.raises(ValueError):
        KernelSpec.from_table(_write_table(tmp_path, [(0.0, 1.0)]))
    with pytest.raises(ValueError):
        KernelSpec.from_table(_write_table(tmp_path, [(-1.0, 1.0), (0.0, 1.0)]))
    # out-of-order rows are sorted on load, not rejected
    base = KernelSpec.from_table(
        _write_table(tmp_path, [(0.0, 1.0), (2.0, 0.5), (1.0, 0.8)]))
    assert abs(base.zeta_hat(1.5) - 0.65) < 1e-12


def test_validate_normalized_gaussian_passes_both_sets():
    kern = ScaledKernel(KernelSpec.gaussian_normalized(), 1.0)
    for which in ("H", "Hprime"):
        report = validate_hypotheses(kern, which=which)
        assert report.all_passed, report.lines()


def test_validate_raw_gaussian_fails_unit_mass():
    kern = ScaledKernel(KernelSpec.gaussian_raw(), 1.0)
    report = validate_hypotheses(kern, which="H")
    failed = [c.name for c in report.checks if not c.passed]
    assert failed == ["unit L1 mass"]
    assert not report.all_passed


def test_validate_algebraic_passes_H():
    kern = ScaledKernel(KernelSpec.algebraic_decay(3.0), 1.0)
    report = validate_hypotheses(kern, which="H")
    assert report.all_passed, report.lines()


def test_validate_oscillating_table_fails_positivity(tmp_path):
    # a transform that dips negative violates the strict-positivity hypothesis
    s_grid = np.linspace(0, 20, 2001)
    vals = np.exp(-(s_grid**2) / 16) * np.cos(1.5 * s_grid)
    base = KernelSpec.from_table(_write_table(tmp_path, list(zip(s_grid, vals))))
    report = validate_hypotheses(ScaledKernel(base, 1.0), which="Hprime")
    by_name = {c.name: c.passed for c in report.checks}
    assert not by_name["zeta_hat > 0"]
    assert not report.all_passed


def test_validate_asymmetric_kernel_fails_evenness():
    skew = KernelSpec(
        family="test-skew",
        zeta=lambda x: np.exp(-np.square(x - 0.5)) / np.sqrt(np.pi),
        zeta_hat=lambda s: np.exp(-np.square(s) / 4),
        l1_norm=1.0,
    )
    report = validate_hypotheses(ScaledKernel(skew, 1.0), which="Hprime")
    by_name = {c.name: c.passed for c in report.checks}
    assert not by_name["evenness"]


def test_validation_report_lines_are_informative():
    kern = ScaledKernel(KernelSpec.gaussian_raw(), 1.0)
    report = validate_hypotheses(kern, which="H")
    lines = report.lines()
    assert any("FAIL" in ln for ln in lines)
    assert any("pass" in ln for ln in lines)
    assert len(lines) == len(report.checks)
