import itertools
import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gspquant import (
    Allocation,
    FunctionalQuantizer,
    ProcessParams,
    allocate,
    build,
    codebook_paths,
    exact_distortion,
    nearest,
    optimize,
    spectrum_batch,
    trace,
)

from conftest import gauss_legendre


@pytest.fixture(scope="module")
def spec_wiener():
    return spectrum_batch(ProcessParams(0.0, 1.0), 64)


@pytest.fixture(scope="module")
def spec_half():
    return spectrum_batch(ProcessParams(0.5, 1.0), 64)


class TestAllocation:
    def test_validates_shape(self):
        Allocation(levels=(4, 2, 2), budget=16)
        with pytest.raises(ValueError):
            Allocation(levels=(2, 4), budget=16)
        with pytest.raises(ValueError):
            Allocation(levels=(2, 1), budget=16)
        with pytest.raises(ValueError):
            Allocation(levels=(8, 4), budget=16)

    def test_codebook_size(self):
        assert Allocation(levels=(3, 2), budget=8).codebook_size == 6
        assert Allocation(levels=(), budget=1).codebook_size == 1


class TestAllocate:
    def test_unit_budget_gives_empty_allocation(self, spec_wiener):
        assert allocate(spec_wiener, 1).levels == ()

    def test_budget_two_spends_on_leading_coordinate(self, spec_wiener):
        assert allocate(spec_wiener, 2).levels == (2,)

    def test_greedy_close_to_exhaustive_at_sixteen(self, spec_wiener):
        exh = exact_distortion(build(spec_wiener, allocate(spec_wiener, 16, "exhaustive")))[1]
        gre = exact_distortion(build(spec_wiener, allocate(spec_wiener, 16, "greedy")))[1]
        assert gre <= 1.01 * exh

    @pytest.mark.parametrize("budget", [2, 3, 6, 12, 24, 48])
    def test_exhaustive_matches_brute_force_oracle(self, spec_half, budget):
        # Independent enumeration of every non-increasing level vector.
        lam = spec_half.lambdas
        dist = {1: 1.0}
        for n in range(2, budget + 1):
            dist[n] = optimize(n).distortion

        def vectors(rem, cap):
            yield ()
            for v in range(2, min(cap, rem) + 1):
                for rest in vectors(rem // v, v):
                    yield (v,) + rest

        def objective(levels):
            return sum(lam[j] * (dist[v] - 1.0) for j, v in enumerate(levels))

        brute = min(vectors(budget, budget), key=lambda lv: (objective(lv), lv))
        got = allocate(spec_half, budget).levels
        assert objective(got) == pytest.approx(objective(brute), abs=1e-15)

    def test_rejects_bad_budget_and_short_spectrum(self, spec_wiener):
        with pytest.raises(ValueError):
            allocate(spec_wiener, 0)
        short = spectrum_batch(ProcessParams(0.0, 1.0), 2)
        with pytest.raises(ValueError, match="at least 6"):
            allocate(short, 64)

    def test_exhaustive_budget_cap(self, spec_wiener):
        with pytest.raises(ValueError, match="greedy"):
            allocate(spec_wiener, 2**14 + 1, "exhaustive")

    def test_unknown_method_rejected(self, spec_wiener):
        with pytest.raises(ValueError):
            allocate(spec_wiener, 4, "anneal")


class TestBuild:
    def test_single_pair_coordinate_scaling(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(2,), budget=2))
        lam1 = spec_wiener.lambdas[0]
        expected = math.sqrt(lam1) * math.sqrt(2.0 / math.pi)
        assert pq.quantizers[0].points[1] == pytest.approx(expected, rel=1e-12)
        assert pq.distortion_core == pytest.approx(lam1 * (1.0 - 2.0 / math.pi), rel=1e-12)

    def test_empty_allocation_collapses_to_exact_trace(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(), budget=1))
        lo, hi = exact_distortion(pq)
        assert lo == hi == trace(spec_wiener.params)

    def test_two_by_two_core(self, spec_half):
        pq = build(spec_half, Allocation(levels=(2, 2), budget=4))
        lam = spec_half.lambdas
        d2 = optimize(2).distortion
        assert pq.codebook_size == 4
        assert pq.distortion_core == pytest.approx((lam[0] + lam[1]) * d2, rel=1e-12)

    def test_allocation_longer_than_spectrum_rejected(self):
        tiny = spectrum_batch(ProcessParams(0.0, 1.0), 1)
        with pytest.raises(ValueError):
            build(tiny, Allocation(levels=(2, 2), budget=4))


class TestExactDistortion:
    def test_single_coordinate_bracket_contains_closed_form(self, spec_wiener):
        # True distortion: lambda_1 (1 - 2/pi) plus the exact series tail
        # 1/2 - lambda_1 of the k = 0 spectrum.  At k = 0 the bracket's lower
        # edge equals the truth in exact arithmetic, hence the ulp headroom.
        pq = build(spec_wiener, Allocation(levels=(2,), budget=2))
        lam1 = spec_wiener.lambdas[0]
        truth = lam1 * (1.0 - 2.0 / math.pi) + (0.5 - lam1)
        lo, hi = exact_distortion(pq)
        assert lo - 1e-12 <= truth <= hi
        assert hi - lo < 1e-4

    def test_upper_non_increasing_along_budget_sequence(self, spec_half):
        uppers = []
        for budget in (1, 2, 4, 8, 16, 32, 64, 128, 256):
            pq = build(spec_half, allocate(spec_half, budget))
            uppers.append(exact_distortion(pq)[1])
        assert all(a >= b for a, b in zip(uppers, uppers[1:]))

    def test_bracket_shrinks_with_longer_spectrum(self):
        p = ProcessParams(0.5, 1.0)
        widths = []
        for length in (16, 64, 256):
            spec = spectrum_batch(p, length)
            pq = build(spec, Allocation(levels=(4, 2), budget=8))
            lo, hi = exact_distortion(pq)
            widths.append(hi - lo)
        assert widths[0] > widths[1] > widths[2]

    def test_scaling_by_horizon(self):
        # k/T fixed, T doubled: every eigenvalue and both bracket ends x4.
        a = build(spectrum_batch(ProcessParams(0.5, 1.0), 64), Allocation(levels=(4, 2), budget=8))
        b = build(spectrum_batch(ProcessParams(1.0, 2.0), 64), Allocation(levels=(4, 2), budget=8))
        lo_a, hi_a = exact_distortion(a)
        lo_b, hi_b = exact_distortion(b)
        assert lo_b == pytest.approx(4.0 * lo_a, rel=1e-12)
        assert hi_b == pytest.approx(4.0 * hi_a, rel=1e-12)


class TestCodebookPaths:
    def test_unit_budget_renders_zero_path(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(), budget=1))
        paths = codebook_paths(pq, np.linspace(0.0, 1.0, 9))
        assert len(paths) == 1
        assert np.all(paths[0].values == 0.0)

    def test_two_level_paths_are_scaled_sine(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(2,), budget=2))
        t = np.linspace(0.0, 1.0, 33)
        paths = codebook_paths(pq, t)
        amp = math.sqrt(spec_wiener.lambdas[0]) * math.sqrt(2.0 / math.pi) * math.sqrt(2.0)
        expected = amp * np.sin(math.pi * t / 2.0)
        assert np.max(np.abs(paths[0].values + expected)) < 1e-12
        assert np.max(np.abs(paths[1].values - expected)) < 1e-12

    def test_two_by_two_paths_distinct(self, spec_half):
        pq = build(spec_half, Allocation(levels=(2, 2), budget=4))
        paths = codebook_paths(pq, np.linspace(0.0, 1.0, 17))
        assert len(paths) == 4
        for a, b in itertools.combinations(paths, 2):
            assert np.max(np.abs(a.values - b.values)) > 1e-3

    def test_rendering_cap_enforced(self, spec_half):
        pq = build(spec_half, Allocation(levels=(128, 64), budget=8192))
        with pytest.raises(ValueError, match="cap"):
            codebook_paths(pq, np.linspace(0.0, 1.0, 8))

    def test_grid_validation(self, spec_half):
        pq = build(spec_half, Allocation(levels=(2,), budget=2))
        with pytest.raises(ValueError):
            codebook_paths(pq, np.array([0.0, 1.5]))
        with pytest.raises(ValueError):
            codebook_paths(pq, np.array([0.5, 0.5]))


class TestNearest:
    def test_tie_at_zero_goes_to_lower_index(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(2,), budget=2))
        assert nearest(pq, [0.0]) == (0,)

    def test_large_positive_coefficient(self, spec_wiener):
        pq = build(spec_wiener, Allocation(levels=(2,), budget=2))
        assert nearest(pq, [3.0]) == (1,)

    def test_short_vector_rejected(self, spec_half):
        pq = build(spec_half, Allocation(levels=(2, 2), budget=4))
        with pytest.raises(ValueError):
            nearest(pq, [0.1])

    def test_non_finite_coefficients_rejected(self, spec_half):
        pq = build(spec_half, Allocation(levels=(2, 2), budget=4))
        with pytest.raises(ValueError):
            nearest(pq, [0.1, math.nan])

    def test_matches_path_space_brute_force(self, spec_half):
        # Coordinatewise assignment must agree with the argmin over all
        # rendered codewords of the quadrature L2 distance on a 512-node rule.
        pq = build(spec_half, allocate(spec_half, 16))
        m = len(pq.allocation.levels)
        t, w = gauss_legendre(0.0, 1.0, 512)
        rendered = codebook_paths(pq, t)
        from gspquant import eigenfunction

        basis = np.array([eigenfunction(pq.spectrum.pairs[j], pq.spectrum.params, t) for j in range(m)])
        shapes = tuple(q.base.n for q in pq.quantizers)
        rng = np.random.default_rng(1234)
        for _ in range(40):
            xi = rng.normal(size=m)
            path = (xi * np.sqrt(pq.spectrum.lambdas[:m])) @ basis
            dists = [float(w @ (path - r.values) ** 2) for r in rendered]
            flat = int(np.argmin(dists))
            assert np.ravel_multi_index(nearest(pq, xi), shapes) == flat


class TestFunctionalQuantizerEstimator:
    def test_fit_builds_codebook(self):
        est = FunctionalQuantizer(k=0.5, T=1.0, budget=16, spectrum_size=32).fit()
        assert est.allocation_.codebook_size <= 16
        lo, hi = est.distortion_bounds_
        assert 0.0 < lo <= hi

    def test_predict_and_transform_shapes(self):
        est = FunctionalQuantizer(k=0.0, T=1.0, budget=4, spectrum_size=16).fit()
        m = len(est.allocation_.levels)
        X = np.zeros((7, 10))
        assert est.predict(X).shape == (7, m)
        assert est.transform(X).shape == (7, m)

    def test_predict_matches_nearest(self):
        est = FunctionalQuantizer(k=0.5, T=1.0, budget=16, spectrum_size=32).fit()
        rng = np.random.default_rng(5)
        X = rng.normal(size=(25, 8))
        pred = est.predict(X)
        for row, expected in zip(X, pred):
            assert tuple(expected) == nearest(est.quantizer_, row)

    def test_unfitted_rejected(self):
        with pytest.raises(NotFittedError):
            FunctionalQuantizer().predict(np.zeros((1, 4)))

    def test_sklearn_param_protocol(self):
        est = FunctionalQuantizer(k=0.3, budget=8, method="greedy")
        assert clone(est).get_params() == est.get_params()
