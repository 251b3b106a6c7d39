import numpy as np
import pytest

from fica import SignalSample, eval_basis, fit_coefficients, make_basis
from fica.errors import (
    FitSingularError,
    InvalidConfigError,
    InvalidInputError,
    OutOfDomainError,
)


def de_boor_point(knots, order, coefs, x):
    """Spline evaluation by the de Boor triangle (repeated knot insertion)."""
    deg = order - 1
    t = knots
    k = int(np.searchsorted(t, x, side="right") - 1)
    k = min(max(k, deg), len(coefs) - 1)
    d = [coefs[j + k - deg] for j in range(order)]
    for r in range(1, order):
        for j in range(deg, r - 1, -1):
            denom = t[j + 1 + k - r] - t[j + k - deg]
            alpha = 0.0 if denom == 0.0 else (x - t[j + k - deg]) / denom
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j]
    return d[deg]


class TestMakeBasis:
    def test_order1_gram_is_diagonal_quarter(self):
        basis = make_basis((0.0, 1.0), 4, 1)
        assert np.allclose(basis.gram, np.diag([0.25] * 4), atol=1e-14)

    def test_second_difference_penalty_p4(self):
        basis = make_basis((0.0, 1.0), 4, 2, penalty_order=2)
        expected = np.array(
            [[1, -2, 1, 0], [-2, 5, -4, 1], [1, -4, 5, -2], [0, 1, -2, 1]], dtype=float
        )
        assert np.array_equal(basis.penalty, expected)

    def test_gram_matches_dense_quadrature_oracle(self):
        # composite Simpson on ~10k points: rule bias ~h^4 sits far below the
        # 1e-10 comparison; trapezoid at the same density has O(h^2) ~ 3.5e-8
        # intrinsic error and is cross-checked at its own attainable accuracy
        basis = make_basis((0.0, 1.0), 10, 4)
        ts = np.linspace(0.0, 1.0, 10_001)
        B = eval_basis(basis, ts)
        prods = B[:, :, None] * B[:, None, :]
        h = ts[1] - ts[0]
        simpson = (
            h / 3.0 * (prods[0] + prods[-1] + 4 * prods[1:-1:2].sum(axis=0) + 2 * prods[2:-1:2].sum(axis=0))
        )
        assert np.abs(basis.gram - simpson).max() < 1e-10
        trapz = np.trapezoid(prods, ts, axis=0)
        assert np.abs(basis.gram - trapz).max() < 5e-8

    def test_gram_bandwidth(self):
        basis = make_basis((0.0, 1.0), 12, 4)
        i, j = np.indices(basis.gram.shape)
        assert np.all(basis.gram[np.abs(i - j) >= 4] == 0.0)

    @pytest.mark.parametrize("p,order", [(3, 4), (1, 2)])
    def test_p_below_order_rejected(self, p, order):
        with pytest.raises(InvalidConfigError):
            make_basis((0.0, 1.0), p, order)

    def test_degenerate_domain_rejected(self):
        with pytest.raises(InvalidConfigError):
            make_basis((1.0, 1.0), 8, 4)

    def test_penalty_order_bounds(self):
        with pytest.raises(InvalidConfigError):
            make_basis((0.0, 1.0), 4, 2, penalty_order=4)


class TestEvalBasis:
    def test_order1_indicator(self):
        basis = make_basis((0.0, 1.0), 4, 1)
        row = eval_basis(basis, [0.1])[0]
        assert np.array_equal(row, [1.0, 0.0, 0.0, 0.0])

    @pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
    def test_partition_of_unity(self, order):
        basis = make_basis((0.0, 1.0), order + 4, order)
        pts = np.concatenate([[0.0, 1.0], np.linspace(0.013, 0.987, 41)])
        rows = eval_basis(basis, pts)
        assert np.abs(rows.sum(axis=1) - 1.0).max() < 1e-12

    def test_matches_knot_insertion_oracle(self):
        basis = make_basis((0.0, 1.0), 8, 4)
        pts = np.linspace(0.0, 1.0, 50)
        computed = eval_basis(basis, pts)
        for j in range(basis.p):
            unit = np.zeros(basis.p)
            unit[j] = 1.0
            oracle = [de_boor_point(basis.knots, 4, unit, x) for x in pts]
            assert np.abs(computed[:, j] - oracle).max() < 1e-12

    def test_sparsity(self):
        basis = make_basis((0.0, 1.0), 10, 4)
        rows = eval_basis(basis, np.linspace(0.0, 1.0, 17))
        assert int((rows != 0).sum(axis=1).max()) <= basis.order

    def test_out_of_domain(self):
        basis = make_basis((0.0, 1.0), 6, 3)
        with pytest.raises(OutOfDomainError):
            eval_basis(basis, [0.5, 1.2])


class TestFitCoefficients:
    def test_exact_basis_function_recovered(self):
        basis = make_basis((0.0, 1.0), 6, 4)
        ts = np.linspace(0.0, 1.0, 300)
        y = eval_basis(basis, ts)[:, 1]
        sample = SignalSample([y], [ts])
        exp = fit_coefficients(sample, basis, center=False)
        unit = np.zeros(6)
        unit[1] = 1.0
        assert np.abs(exp.coefs[0] - unit).max() < 1e-10
        assert exp.rss[0] < 1e-10

    def test_centering_identical_curves(self):
        basis = make_basis((0.0, 1.0), 5, 3)
        ts = np.linspace(0.0, 1.0, 80)
        y = np.sin(2 * np.pi * ts)
        exp = fit_coefficients(SignalSample([y, y], [ts, ts]), basis, center=True)
        assert np.abs(exp.coefs).max() < 1e-12
        assert exp.centered and np.abs(exp.coefs.mean(axis=0)).max() < 1e-10

    def test_matches_normal_equation_oracle(self, rng):
        basis = make_basis((0.0, 1.0), 20, 4)
        ts = np.linspace(0.0, 1.0, 400)
        y = np.sin(2 * np.pi * 3 * ts) + 0.3 * rng.standard_normal(ts.size)
        exp = fit_coefficients(SignalSample([y], [ts]), basis, center=False)
        design = eval_basis(basis, ts)
        oracle = np.linalg.solve(design.T @ design, design.T @ y)
        assert np.abs(exp.coefs[0] - oracle).max() < 1e-8

    def test_too_few_samples_names_curve(self):
        basis = make_basis((0.0, 1.0), 8, 4)
        ts = np.linspace(0.0, 1.0, 5)
        with pytest.raises(FitSingularError, match="short"):
            fit_coefficients(
                SignalSample([np.ones(5)], [ts], labels=["short"]), basis
            )

    def test_per_curve_grids(self):
        basis = make_basis((0.0, 1.0), 6, 4)
        t1 = np.linspace(0.0, 1.0, 60)
        t2 = np.linspace(0.0, 1.0, 91)
        exp = fit_coefficients(
            SignalSample([np.cos(t1), np.cos(t2)], [t1, t2]), basis, center=False
        )
        assert np.abs(exp.coefs[0] - exp.coefs[1]).max() < 1e-6

    def test_sample_outside_basis_domain(self):
        basis = make_basis((0.0, 0.5), 6, 4)
        with pytest.raises(OutOfDomainError):
            fit_coefficients(SignalSample([np.ones(30)]), basis)


class TestInvariants:
    @pytest.mark.parametrize("p,order", [(6, 2), (9, 3), (12, 4), (15, 5)])
    def test_gram_positive_definite(self, p, order):
        basis = make_basis((0.0, 1.0), p, order)
        assert np.linalg.eigvalsh(basis.gram)[0] > 0.0

    def test_penalty_null_space_exact(self):
        basis = make_basis((0.0, 1.0), 11, 4, penalty_order=2)
        ones = np.ones(11)
        ramp = np.arange(1.0, 12.0)
        assert np.linalg.norm(basis.penalty @ ones) == 0.0
        assert np.linalg.norm(basis.penalty @ ramp) == 0.0

    def test_fit_optimality_under_perturbation(self, rng):
        basis = make_basis((0.0, 1.0), 8, 4)
        ts = np.linspace(0.0, 1.0, 120)
        y = rng.standard_normal(ts.size)
        exp = fit_coefficients(SignalSample([y], [ts]), basis, center=False)
        design = eval_basis(basis, ts)
        best = ((y - design @ exp.coefs[0]) ** 2).sum()
        for _ in range(25):
            direction = rng.standard_normal(8)
            direction /= np.linalg.norm(direction)
            for delta in (1e-4, -1e-4):
                rss = ((y - design @ (exp.coefs[0] + delta * direction)) ** 2).sum()
                assert rss >= best

    def test_in_span_curve_reproduced(self, rng):
        basis = make_basis((0.0, 1.0), 9, 4)
        ts = np.linspace(0.0, 1.0, 200)
        target = rng.standard_normal(9)
        y = eval_basis(basis, ts) @ target
        exp = fit_coefficients(SignalSample([y], [ts]), basis, center=False)
        assert np.abs(exp.coefs[0] - target).max() < 1e-10


class TestSignalSample:
    def test_default_times_unit_interval(self):
        s = SignalSample([np.arange(5.0)])
        assert np.array_equal(s.times[0], np.linspace(0, 1, 5))
        assert s.domain == (0.0, 1.0)

    def test_nonincreasing_times_rejected(self):
        with pytest.raises(InvalidInputError):
            SignalSample([np.ones(3)], [np.array([0.0, 0.5, 0.5])])

    def test_shared_times_detection(self):
        ts = np.linspace(0, 1, 9)
        assert SignalSample.from_matrix(np.ones((3, 9)), ts).shared_times() is not None
        mixed = SignalSample([np.ones(9), np.ones(5)], [ts, np.linspace(0, 1, 5)])
        assert mixed.shared_times() is None
