import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plasmonres import problem1 as p1
from plasmonres.fourier_core import (
    FieldRegion,
    HarmonicField,
    ModalCoefficients,
    evaluate_polar,
    h_half_norm,
    polar_gradient,
)
from plasmonres.oracle import QuadratureGrid, cartesian_gradient, mode_transmission_oracle, quadrature_energy

R3 = 3.0


def solve(h, R, d, N=None):
    return p1.solve_modes(h, p1.SolverConfig(R, d, N or h.N))


# --- truncation order -----------------------------------------------------

@pytest.mark.parametrize("R,k", [(3.0, 5), (2.0, 7), (1.5, 11), (10.0, 3)])
def test_truncation_order_exact_powers(R, k):
    assert p1.truncation_order(R ** (-2 * k), R) == k


def test_truncation_order_examples():
    # ceil(14 ln 10 / (2 ln 3)) = ceil(14.67)
    assert p1.truncation_order(1e-14, 3.0) == 15
    assert p1.truncation_order(0.999999, 3.0) == 1
    with pytest.raises(ValueError):
        p1.truncation_order(0.0, 3.0)


def test_solver_config_validation_and_autosize():
    with pytest.raises(ValueError):
        p1.SolverConfig(1.0, 0.1)
    with pytest.raises(ValueError):
        p1.SolverConfig(3.0, 1.0)
    with pytest.raises(ValueError):
        p1.SolverConfig(3.0, 0.1, 0)
    assert p1.SolverConfig(3.0, 1e-14).N == 4 * 15


# --- solve_modes ----------------------------------------------------------

def test_constant_data_gives_constant_field():
    sol = solve(ModalCoefficients(2.5, np.zeros(4), np.zeros(4)), R3, 1e-3)
    assert sol.c.zero_mode == 2.5 and sol.a.zero_mode == 2.5 and sol.b.zero_mode == 0
    assert not np.any(sol.c.plus) and not np.any(sol.a.minus) and not np.any(sol.b.plus)
    f = p1.assemble_field(sol)
    assert np.allclose(evaluate_polar(f, np.linspace(0, 3, 7), np.linspace(0, 6, 7)), 2.5)


def test_c1_hand_value():
    # n=1, R=2, delta=1, h=1 (the formula evaluated at delta = 1)
    c = p1.core_coefficients(1.0, 1, 2.0, 1.0)
    assert c == pytest.approx(0.6153846153846154 - 0.9230769230769231j, rel=1e-14)
    assert c == pytest.approx(8 / 13 - 12j / 13, rel=1e-14)


def test_small_loss_limit_matches_oracle():
    sol = solve(ModalCoefficients(0, [1.0], [0.0]), R3, 1e-12)
    c, p, q = mode_transmission_oracle(1, 1.0, R3, 1e-12)
    assert sol.c.plus[0] == pytest.approx(3.0, rel=1e-10)
    assert abs(sol.b.plus[0]) < 1e-10
    assert sol.c.plus[0] == pytest.approx(complex(c), rel=1e-10)
    assert sol.b.plus[0] == pytest.approx(complex(p), rel=1e-10)


@given(
    st.integers(1, 60),
    st.floats(1e-14, 0.99),
    st.sampled_from([1.2, 1.5, 2.0, 3.0, 10.0]),
    st.integers(0, 2**31 - 1),
)
def test_solution_invariants_hold_exactly(n, d, R, seed):
    rng = np.random.default_rng(seed)
    plus = np.zeros(n, complex)
    plus[-1] = complex(rng.normal(), rng.normal())
    h = ModalCoefficients(complex(rng.normal()), plus, np.conj(plus))
    sol = solve(h, R, d)
    c = sol.c.plus[-1]
    assert sol.b.zero_mode == 0 and sol.a.zero_mode == sol.c.zero_mode == h.zero_mode
    assert sol.a.plus[-1] == pytest.approx((2 - 1j * d) * c / 2, rel=1e-13)
    assert sol.b.plus[-1] == pytest.approx(1j * d * c / 2, rel=1e-13)
    # (1/2)[(2 - i d) R^-n + i d R^n] c = h, checked in R^-n scaled form
    t = R ** -float(n)
    lhs = 0.5 * ((2 - 1j * d) * t * t + 1j * d) * c
    assert lhs == pytest.approx(plus[-1] * t, rel=1e-13)


def test_truncating_data_warns():
    with pytest.warns(UserWarning):
        p1.solve_modes(p1.inverse_square_data(50), p1.SolverConfig(3.0, 0.1, 10))


# --- assembled field ------------------------------------------------------

def test_boundary_trace_reproduces_data(rng):
    N = 12
    h = ModalCoefficients(rng.normal(), rng.normal(size=N) + 1j * rng.normal(size=N), rng.normal(size=N))
    sol = solve(h, R3, 1e-6)
    t = 2 * np.pi * np.arange(64) / 64
    u = evaluate_polar(p1.assemble_field(sol), np.full(64, R3), t)
    assert np.max(np.abs(u - h.synthesize(t))) <= 1e-12 * max(1, np.max(np.abs(u)))


@pytest.mark.parametrize("d", [0.5, 1e-3, 1e-8])
def test_transmission_conditions_on_unit_circle(d):
    h = p1.inverse_square_data(30)
    sol = solve(h, R3, d)
    t = 2 * np.pi * np.arange(128) / 128
    one = np.ones(128)
    disk = HarmonicField([FieldRegion(0.0, 1.0, sol.c)])
    ext = p1.exterior_field(sol)
    ui, uo = evaluate_polar(disk, one, t), evaluate_polar(ext, one, t)
    gi, _ = polar_gradient(disk, one, t)
    go, _ = polar_gradient(ext, one, t)
    scale = np.max(np.abs(ui))
    assert np.max(np.abs(ui - uo)) <= 1e-10 * scale
    # eps flux continuity: (-1 + i d) du_in/dr = du_out/dr
    assert np.max(np.abs((-1 + 1j * d) * gi - go)) <= 1e-10 * np.max(np.abs(go))
    # Kelvin form of the same condition on v = u o F^{-1}
    v = p1.kelvin_field(sol)
    gv, _ = polar_gradient(v, one, t)
    assert np.max(np.abs(gv - (1 - 1j * d) * gi)) <= 1e-10 * np.max(np.abs(gv))


def test_reference_configuration_bounded_core_and_large_annulus():
    h = p1.inverse_square_data(100)
    sol = p1.solve_modes(h, p1.SolverConfig.for_data(R3, 1e-14, h))
    f = p1.assemble_field(sol)
    t = 2 * np.pi * np.arange(256) / 256
    v = p1.limit_field_v(h, R3)
    vmax = np.max(np.abs(evaluate_polar(v, np.full(256, 1 / R3), t)))
    r_core = np.linspace(0, 1 / (2 * R3), 20)
    Rg, Tg = np.meshgrid(r_core, t)
    assert np.max(np.abs(evaluate_polar(f, Rg, Tg))) <= 2 * vmax
    r_ann = np.linspace(1 / R3, R3, 200)
    Rg, Tg = np.meshgrid(r_ann, t)
    assert np.max(np.abs(evaluate_polar(f, Rg, Tg))) > 1e3


def test_trace_on_inner_circle_matches_gap_multipliers():
    h = p1.inverse_square_data(100)
    sol = p1.solve_modes(h, p1.SolverConfig.for_data(R3, 1e-14, h))
    t = 2 * np.pi * np.arange(64) / 64
    u = evaluate_polar(p1.assemble_field(sol), np.full(64, 1 / R3), t)
    m = p1.gap_multipliers(h.orders, R3, 1e-14)
    expect = (h + h.map_modes(0.0, m)).synthesize(t)
    assert np.max(np.abs(u - expect)) <= 1e-10


def test_real_data_real_limits_complex_solution():
    h = p1.design_incompatible_data(0.25, R3, 20)
    pts = (np.array([0.2, 0.3]), np.array([0.3, 1.0]))
    for f in (p1.limit_field_v(h, R3), p1.limit_field_u0(h, R3)):
        assert f.real_valued and np.isrealobj(evaluate_polar(f, *pts))
    # the lossy permittivity makes u_delta genuinely complex even for real data
    f = p1.assemble_field(solve(h, R3, 1e-4))
    assert not f.real_valued
    assert np.max(np.abs(evaluate_polar(f, *pts).imag)) > 0


# --- power and energies ---------------------------------------------------

def test_power_of_constant_is_zero():
    assert p1.power(solve(ModalCoefficients(1.0, [0.0], [0.0]), R3, 0.1)) == 0


def test_power_single_mode_against_quadrature():
    sol = solve(ModalCoefficients(0, [1.0], [0.0]), R3, 0.1)
    assert p1.power(sol) == pytest.approx(0.1 * 2 * np.pi * abs(sol.c.plus[0]) ** 2, rel=1e-14)
    disk = HarmonicField([FieldRegion(0.0, 1.0, sol.c)])
    q = quadrature_energy(cartesian_gradient(disk), ("annulus", 0.0, 1.0), QuadratureGrid(32, 16))
    assert p1.power(sol) == pytest.approx(0.1 * q, rel=1e-10)


def test_grad_energy_against_quadrature():
    h = p1.inverse_square_data(12)
    sol = solve(h, R3, 1e-3)
    f = p1.assemble_field(sol)
    g = cartesian_gradient(f)
    grid = QuadratureGrid(64, 64)
    q = quadrature_energy(g, ("annulus", 0.0, 1.0), grid) + quadrature_energy(g, ("annulus", 1.0, R3), grid)
    assert p1.grad_energy(sol) == pytest.approx(q, rel=1e-8)


def test_power_decays_for_designer_data():
    fit = p1.delta_sweep(lambda N: p1.design_incompatible_data(0.25, R3, N), R3, np.logspace(-10, -4, 13), "power")
    assert fit.slope == pytest.approx(0.5, abs=0.015)


# --- limit fields and the gap ---------------------------------------------

def test_limit_field_v_examples():
    v = p1.limit_field_v(ModalCoefficients(4.0, [0.0], [0.0]), 2.0)
    assert evaluate_polar(v, np.array([0.3]), np.array([1.0]))[0] == 4.0
    v = p1.limit_field_v(ModalCoefficients(0, [1.0], [0.0]), 2.0)
    t = np.linspace(0, 6, 9)
    assert np.allclose(evaluate_polar(v, np.full(9, 0.25), t), 0.5 * np.exp(1j * t), rtol=1e-15)
    assert np.allclose(evaluate_polar(v, np.full(9, 0.5), t), np.exp(1j * t), rtol=1e-15)


def test_limit_trace_norm_is_h_half_norm():
    h = p1.inverse_square_data(40)
    v = p1.limit_field_v(h, R3)
    # re-project the trace of v at r = 1/R and take its discrete norm
    from plasmonres.fourier_core import project_boundary
    tr = project_boundary(lambda t: evaluate_polar(v, np.full(t.shape, 1 / R3), t), 40)
    assert h_half_norm(tr) == pytest.approx(h_half_norm(h), rel=1e-12)


def test_gap_small_multiplier_regime():
    n = np.arange(1, 6)
    d = 1e-12
    m = p1.gap_multipliers(n, R3, d)
    approx = d * (R3 ** (2 * n) - 1) / 2
    assert np.allclose(np.abs(m), approx, rtol=1e-6)


def test_gap_multiplier_modulus_never_exceeds_one():
    n = np.arange(1, 501)[:, None]
    d = np.concatenate([np.logspace(-20, np.log10(0.9), 400), [0.9]])[None, :]
    for R in (1.01, 1.5, 3.0, 10.0):
        m = p1.gap_multiplier_modulus(n, R, d)
        assert np.all(m <= 1.0)
        assert np.allclose(m, np.abs(p1.gap_multipliers(n, R, d)), rtol=1e-12, atol=0)


def test_gap_of_zero_data_is_zero():
    assert p1.localized_resonance_gap(solve(ModalCoefficients.zeros(5), R3, 1e-3)) == 0


def test_gap_bounded_and_decreasing():
    h = p1.inverse_square_data(100)
    vals = []
    for k in range(4, 21):
        d = 10.0 ** -k
        vals.append(p1.localized_resonance_gap(p1.solve_modes(h, p1.SolverConfig.for_data(R3, d, h))))
    assert all(v <= h_half_norm(h) for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_u0_limit_is_approached():
    h = ModalCoefficients(0.5, [1.0, 0.3j, 0, 0, 0.1], [0.2, 0, 0, 0, 0])
    u0 = p1.limit_field_u0(h, R3)
    errs = [p1.field_h1_norm(p1.assemble_field(solve(h, R3, d)) - u0) for d in (1e-4, 1e-8, 1e-12)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-5


# --- compatibility --------------------------------------------------------

def test_classify_trig_polynomial_compatible():
    h = ModalCoefficients(1.0, [1.0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0], np.zeros(10))
    assert p1.classify_compatibility(h, R3).verdict is p1.Verdict.COMPATIBLE


def test_classify_inverse_square_incompatible():
    v = p1.classify_compatibility(p1.inverse_square_data(100), R3)
    assert v.verdict is p1.Verdict.INCOMPATIBLE
    assert v.decay_rate > 0.9


def test_classify_fast_geometric_compatible():
    n = np.arange(1, 101)
    h = ModalCoefficients(0, R3 ** (-2.0 * n), np.zeros(100))
    v = p1.classify_compatibility(h, R3)
    assert v.verdict is p1.Verdict.COMPATIBLE
    assert v.decay_rate == pytest.approx(1 / 9, rel=1e-6)
    # summability oracle: partial sums of n R^{2n} |h_n|^2 settle
    terms = n * R3 ** (2.0 * n) * R3 ** (-4.0 * n)
    assert np.cumsum(terms)[-1] - np.cumsum(terms)[49] < 1e-20


def test_classify_generator_and_descriptor():
    v = p1.classify_compatibility(lambda n: 1.0 / n ** 2, R3)
    assert v.verdict is p1.Verdict.INCOMPATIBLE
    d = p1.TailDescriptor(rate=1 / R3, power=-2.0)
    assert p1.classify_compatibility(ModalCoefficients.zeros(1), R3, d).verdict is p1.Verdict.COMPATIBLE
    d = p1.TailDescriptor(rate=1 / R3, power=0.0)
    assert p1.classify_compatibility(ModalCoefficients.zeros(1), R3, d).verdict is p1.Verdict.INCOMPATIBLE


def test_classify_borderline_and_indeterminate():
    n = np.arange(1, 41)
    edge = ModalCoefficients(0, R3 ** -n.astype(float), np.zeros(40))
    assert p1.classify_compatibility(edge, R3).verdict is p1.Verdict.BORDERLINE
    short = ModalCoefficients(0, 0.5 ** np.arange(1, 11.0), np.zeros(10))
    v = p1.classify_compatibility(short, R3)
    assert v.verdict is p1.Verdict.INDETERMINATE and "reason" in v.evidence


# --- designer data and sweeps ----------------------------------------------

def test_designer_examples():
    h = p1.design_incompatible_data(0.25, R3, 50)
    assert h.plus[0] == pytest.approx(3 ** -0.5, rel=1e-15) and h.zero_mode == 0
    assert np.array_equal(h.plus, h.minus)
    # sum_n n R^{-2 n gamma} / n, both signs
    gamma = 0.5
    assert h_half_norm(h) == pytest.approx(2 * np.sum(R3 ** (-2 * gamma * np.arange(1, 51))), rel=1e-13)
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            p1.design_incompatible_data(bad, R3, 10)


def test_sweep_compatible_data_is_bounded():
    h = ModalCoefficients(0.0, [1.0, 0.5, 0.25], [0.0, 0.1, 0.0])
    # every mode is past its transition (delta << R^-6) on this window
    fit = p1.delta_sweep(h, R3, np.logspace(-10, -4, 7))
    assert abs(fit.slope) <= 0.02


def test_sweep_designer_alpha_04():
    fit = p1.delta_sweep(lambda N: p1.design_incompatible_data(0.4, R3, N), R3, np.logspace(-10, -4, 13))
    assert fit.slope == pytest.approx(-0.8, rel=0.03)


@pytest.mark.parametrize("make", [
    lambda N: p1.inverse_square_data(N),
    lambda N: p1.design_incompatible_data(0.1, R3, N),
    lambda N: p1.design_incompatible_data(0.45, R3, N),
])
def test_sweep_power_never_blows_up(make):
    fit = p1.delta_sweep(make, R3, np.logspace(-16, -2, 8), "power")
    assert fit.slope >= -0.05


def test_sweep_grid_validation():
    h = p1.inverse_square_data(10)
    with pytest.raises(ValueError):
        p1.delta_sweep(h, R3, [1e-4, 1e-3, 1e-2])
    with pytest.raises(ValueError):
        p1.delta_sweep(h, R3, np.logspace(-4, -2, 6))


def test_sweep_threads_bitwise_identical():
    make = lambda N: p1.design_incompatible_data(0.25, R3, N)
    grid = np.logspace(-10, -4, 13)
    a = p1.delta_sweep(make, R3, grid, threads=1)
    b = p1.delta_sweep(make, R3, grid, threads=4)
    assert a == b


def test_incompatible_grad_energy_grows_monotonically():
    h = p1.inverse_square_data(100)
    vals = [p1.grad_energy(p1.solve_modes(h, p1.SolverConfig.for_data(R3, 10.0 ** -k, h))) for k in range(2, 21, 2)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
