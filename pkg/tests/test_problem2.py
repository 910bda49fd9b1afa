import numpy as np
import pytest

from plasmonres import problem2 as p2
from plasmonres.fourier_core import ModalCoefficients
from plasmonres.oracle import fd_radial_bvp
from plasmonres.regions import AnnularSector, Disk, Rectangle, tensor_rule


@pytest.fixture(scope="module")
def cutoff():
    return p2.prepare_source(p2.cutoff_source(100))


@pytest.fixture(scope="module")
def bump():
    return p2.prepare_source(p2.compatible_bump_source())


def manufactured(table):
    """SourceProfiles on [0, 1] from ``{n: f_n}``."""
    N = max(abs(k) for k in table)

    def func(rho):
        rho = np.asarray(rho, float)
        out = np.zeros((2 * N + 1,) + rho.shape, complex)
        for k, f in table.items():
            out[N + k] = f(rho)
        return out

    return p2.SourceProfiles(0.0, 1.0, N, func, 1.0)


# --- sources --------------------------------------------------------------

def test_source_spec_validation():
    with pytest.raises(ValueError):
        p2.SourceSpec(1.0, 2.0, evaluator=lambda x, y: 0 * x)
    with pytest.raises(ValueError):
        p2.SourceSpec(2.0, 3.0)
    with pytest.raises(ValueError):
        p2.SourceSpec(2.0, 3.0, profiles=lambda r: r)


def test_zero_source_gives_zero_profiles():
    src = p2.SourceSpec(2.0, 3.0, evaluator=lambda x, y: 0.0 * x, n_modes=4)
    prof = p2.pushforward_source(src)
    assert np.all(prof(np.linspace(1 / 3, 0.5, 11)) == 0)
    profiles, trace = p2.solve_w(prof, M=64)
    assert np.all(trace.to_signed() == 0)
    assert np.all(profiles.evaluate(np.linspace(0, 1, 21)) == 0)


def test_radial_source_has_only_mode_zero():
    # f = Laplacian of a radial bump supported in 2 <= r <= 3: zero mean by construction
    def f(x, y):
        r = np.hypot(x, y)
        u, v = r - 2, 3 - r
        d1 = 4 * u ** 3 * v ** 3 * (v - u)
        d2 = 12 * u ** 2 * v ** 4 - 32 * u ** 3 * v ** 3 + 12 * u ** 4 * v ** 2
        return np.where((u >= 0) & (v >= 0), d2 + d1 / r, 0.0)

    prof = p2.pushforward_source(p2.SourceSpec(2.0, 3.0, evaluator=f, n_modes=4))
    vals = prof(np.linspace(0.34, 0.49, 9))
    assert np.max(np.abs(vals[4])) > 1
    assert np.max(np.abs(np.delete(vals, 4, axis=0))) < 1e-12 * np.max(np.abs(vals[4]))


def test_nonzero_mean_rejected():
    src = p2.SourceSpec(2.0, 3.0, evaluator=lambda x, y: np.where(np.hypot(x, y) > 2, 1.0, 0.0), n_modes=2)
    with pytest.raises(ValueError, match="zero mean"):
        p2.pushforward_source(src)
    with pytest.raises(ValueError):
        p2.pushforward_source(p2.cutoff_source(4), M=32)


def test_cutoff_source_support_and_paths_agree():
    src = p2.cutoff_source(6)
    closed = p2.pushforward_source(src)
    assert (closed.rho_lo, closed.rho_hi) == (pytest.approx(1 / 3), pytest.approx(0.5))
    rho = np.linspace(0.34, 0.49, 13)
    sampled = p2.pushforward_source(p2.SourceSpec(2.0, 3.0, evaluator=src.evaluator, n_modes=6))
    ref = closed(rho)
    assert np.max(np.abs(sampled(rho) - ref)) <= 1e-12 * np.max(np.abs(ref))
    # the cut-off kills the profiles outside the mapped support
    assert np.max(np.abs(closed(np.array([0.2, 0.3, 0.55, 0.9])))) == 0


def test_zero_mean_preserved_by_pushforward():
    src = p2.cutoff_source(3)
    # int over the exterior of f, by polar quadrature on 2 <= r <= 3
    x, y, w = tensor_rule(AnnularSector(2.0, 3.0), 64, 64)
    outside = np.sum(w * src.evaluator(x, y))
    x, y, w = tensor_rule(AnnularSector(1 / 3, 0.5), 64, 64)
    rho, th = np.hypot(x, y), np.arctan2(y, x)
    inside = np.sum(w * src.evaluator(x / rho ** 2, y / rho ** 2) / rho ** 4)
    assert abs(outside) < 1e-10 and abs(inside) < 1e-10


# --- solve_w ----------------------------------------------------------------

def test_manufactured_modes_recovered():
    # w1 = rho - rho^3/3, w2 = rho^2 - rho^4/2, w0 = rho^2/2 - rho^4/4 - 1/6 (zero disk mean)
    src = manufactured({
        1: lambda r: -8 * r / 3,
        -2: lambda r: -6 * r ** 2,
        0: lambda r: 2 - 4 * r ** 2,
    })
    prof, trace = p2.solve_w(src)
    rho = np.linspace(0, 1, 401)
    W = prof.evaluate(rho)
    assert np.max(np.abs(W[3] - (rho - rho ** 3 / 3))) < 1e-8
    assert np.max(np.abs(W[0] - (rho ** 2 - rho ** 4 / 2))) < 1e-8
    assert np.max(np.abs(W[2] - (rho ** 2 / 2 - rho ** 4 / 4 - 1 / 6))) < 1e-8
    assert trace.plus[0] == pytest.approx(2 / 3, abs=1e-12)
    assert trace.minus[1] == pytest.approx(0.5, abs=1e-12)
    # log(s) in the first panel limits the constant to ~1e-9
    assert prof.at_origin() == pytest.approx(-1 / 6, abs=1e-8)


def test_cutoff_traces_match_green_identity(cutoff):
    # int_2^3 r^{1-n} f_n dr = -2n / 6^n, so w_n(1) = 2 / 6^n
    n = np.arange(1, 11)
    assert np.allclose(cutoff.w_trace.plus[:10], 2.0 / 6.0 ** n, rtol=1e-10, atol=0)
    assert np.all(cutoff.w_trace.minus == 0)
    assert abs(cutoff.w_origin) < 1e-12


def test_traces_match_finite_differences(cutoff):
    prof = p2.pushforward_source(p2.cutoff_source(100))
    N = prof.N
    for n in (1, 2, 3, 5):
        def f(r, n=n):
            out = np.zeros(r.shape, complex)
            m = (r >= prof.rho_lo) & (r <= prof.rho_hi)
            out[m] = prof(r[m])[N + n]
            return out
        _, w = fd_radial_bvp(n, f, 10_000)
        assert abs(w[-1] - cutoff.w_trace.plus[n - 1]) <= 1e-6


def test_profile_structure(cutoff):
    prof = cutoff.profiles
    N = prof.N
    # Neumann condition
    assert np.max(np.abs(prof.derivative(np.array([1.0])))) < 1e-12
    # w_n ~ rho^n near the origin
    r = np.array([1e-3, 1e-2, 0.1])
    W = prof.evaluate(r)
    for n in (1, 2, 4):
        ratio = W[N + n] / r ** n
        assert np.allclose(ratio, ratio[0], rtol=1e-12)
    # zero disk mean of the zero mode
    x, w = np.polynomial.legendre.leggauss(64)
    rr = 0.5 * (x + 1)
    assert abs(np.sum(0.5 * w * rr * prof.evaluate(rr)[N])) < 1e-12


def test_modal_ode_residual(cutoff):
    prof = cutoff.profiles
    src = cutoff.source
    N = prof.N
    rho = np.linspace(0.2, 0.95, 301)
    # the stencil must not straddle the support edges, where w''' jumps
    h = 1e-5
    rho = rho[(np.abs(rho - 1 / 3) > 3 * h) & (np.abs(rho - 0.5) > 3 * h)]
    F = src(rho)
    W = prof.evaluate(rho)
    dW = prof.derivative(rho)
    D = [prof.derivative(rho + k * h) for k in (-2, -1, 1, 2)]
    d2 = (D[0] - 8 * D[1] + 8 * D[2] - D[3]) / (12 * h)
    for n in (1, 2, 5, 10):
        res = d2[N + n] + dW[N + n] / rho - n ** 2 * W[N + n] / rho ** 2 - F[N + n]
        assert np.max(np.abs(res)) <= 1e-6 * np.max(np.abs(F[N + n]))


# --- compatibility ---------------------------------------------------------

def test_classify_compatibility2_cases(cutoff, bump):
    z = ModalCoefficients(1.0, np.zeros(3), np.zeros(3))
    assert p2.classify_compatibility2(z, 1e-8).verdict is p2.Compatibility2.COMPATIBLE
    assert cutoff.compat.verdict is p2.Compatibility2.INCOMPATIBLE
    assert cutoff.compat.dominant_mode == 1
    assert bump.compat.verdict is p2.Compatibility2.COMPATIBLE
    assert bump.compat.magnitude < 1e-12


# --- coefficients and fields -----------------------------------------------

def test_solve_modes2_examples():
    tr = ModalCoefficients(0.0, [1.0], [0.0])
    c = p2.solve_modes2(tr, 0.0, 0.1)
    assert c.a.plus[0] == pytest.approx(-10j, rel=1e-15)
    assert c.b.plus[0] == pytest.approx(-1 - 10j, rel=1e-15)
    with pytest.raises(ValueError):
        p2.solve_modes2(tr, 0.0, 0.0)
    c = p2.solve_modes2(ModalCoefficients(0.3, [0.0], [0.0]), 0.7, 0.1)
    assert not np.any(c.a.plus) and not np.any(c.b.minus)
    assert c.b0 == -0.7 and c.a0 == pytest.approx(-0.4)


def test_blowup_exactly_first_order(cutoff):
    ref = None
    for d in np.logspace(-12, -1, 12):
        prod = d * p2.solve_plane(cutoff, d).coeffs.a.to_signed()
        if ref is None:
            ref = prod
        assert np.max(np.abs(prod - ref)) <= 1e-14 * np.max(np.abs(ref))


@pytest.mark.parametrize("d", [1e-2, 1e-6])
def test_jump_relations_on_unit_circle(cutoff, d):
    F = p2.assemble_field2(p2.solve_plane(cutoff, d))
    t = 2 * np.pi * np.arange(128) / 128
    one = np.ones(128)
    ui, uo = F.evaluate_interior(one, t), F.evaluate_exterior(one, t)
    gi, _ = F.gradient_interior(one, t)
    go, _ = F.gradient_exterior(one, t)
    assert np.max(np.abs(uo - ui)) <= 1e-8 * np.max(np.abs(ui))
    assert np.max(np.abs(go - (-1 + 1j * d) * gi)) <= 1e-8 * np.max(np.abs(gi))


def test_decay_at_infinity(cutoff):
    F = p2.assemble_field2(p2.solve_plane(cutoff, 1e-3))
    t = 2 * np.pi * np.arange(64) / 64
    C = 2 * np.max(1e3 * np.abs(F.evaluate_polar(np.full(64, 1e3), t)))
    for r in (1e3, 1e4, 1e5):
        assert np.max(r * np.abs(F.evaluate_polar(np.full(64, r), t))) <= C


def test_compatible_field_is_w_of_kelvin_image(bump):
    psi = p2.bump_w()
    rng = np.random.default_rng(7)
    r = np.concatenate([rng.uniform(0.1, 1, 40), rng.uniform(1, 4, 80)])
    t = rng.uniform(0, 2 * np.pi, r.size)
    expect = np.where(r > 1, psi(1 / r) * np.cos(t), 0.0)
    for d in (1e-2, 1e-8):
        u = p2.assemble_field2(p2.solve_plane(bump, d)).evaluate_polar(r, t)
        assert np.max(np.abs(u - expect)) <= 1e-8


def test_power_on_region_zero_and_closed_forms(cutoff, bump):
    sol = p2.solve_plane(bump, 1e-4)
    assert p2.power_on_region(sol, Disk(0.5)) == 0
    sol = p2.solve_plane(cutoff, 1e-2)
    closed = p2.power_on_region(sol, Disk(1.0))
    a = sol.coeffs.a
    n = a.orders
    assert closed == pytest.approx(2 * np.pi * np.sum(n * (np.abs(a.plus) ** 2 + np.abs(a.minus) ** 2)), rel=1e-14)
    x, y, w = tensor_rule(Disk(1.0), 48, 4 * a.N + 8)
    quad = np.sum(w * p2.assemble_field2(sol).grad_sq(x, y))
    assert closed == pytest.approx(quad, rel=1e-10)
    ann = p2.power_on_region(sol, AnnularSector(0.2, 0.7))
    x, y, w = tensor_rule(AnnularSector(0.2, 0.7), 48, 4 * a.N + 8)
    assert ann == pytest.approx(np.sum(w * p2.assemble_field2(sol).grad_sq(x, y)), rel=1e-10)


def test_degenerate_regions_rejected():
    with pytest.raises(ValueError):
        Disk(0.0)
    with pytest.raises(ValueError):
        AnnularSector(1.0, 1.0)
    with pytest.raises(ValueError):
        Rectangle(0, 0, 0, 1)


def test_plane_sweep_slope_and_threads(cutoff):
    grid = np.logspace(-8, -3, 4)
    a = p2.plane_sweep(cutoff, Disk(0.5), grid)
    b = p2.plane_sweep(cutoff, Disk(0.5), grid, threads=3)
    assert a == b
    assert a.slope == pytest.approx(-2, rel=0.02)
    with pytest.raises(ValueError):
        p2.plane_sweep(cutoff, Disk(0.5), [1e-4, 1e-3])
