import math

import numpy as np
import pytest

from extcalc.errors import ConvergenceError, DomainError
from extcalc.measure import (AtomSequence, ConstantDensity, DensityPiece, Measure, atomic_measure,
                             random_atomic_measure)
from extcalc.model import eigenfunction_check
from extcalc.resolvent import krein_p
from extcalc.spectral import (CORE, FILLS_HALF_PLANE, QUASI_REGULAR, SearchRegion, classify_spectral_point,
                              find_eigenvalues, punctured_gap)
from extcalc.triple import DissipativeTriple, eval_S

SQRT3 = math.sqrt(3)
REGION = SearchRegion(-2, 2, 0.05, 3)


class TestRegion:
    @pytest.mark.parametrize("args", [(-1, 1, 0, 1), (-1, 1, -1, 1), (1, -1, 0.1, 1), (0, 1, 2, 1),
                                      (0, math.inf, 0.1, 1)])
    def test_rejects(self, args):
        with pytest.raises(DomainError):
            SearchRegion(*args)


class TestFindEigenvalues:
    def test_fixture(self, t13):
        res = find_eigenvalues(t13, REGION)
        assert res.winding == 2 and len(res) == 2
        for r, exact in zip(res.roots, [(-SQRT3 + 1j) / 2, (SQRT3 + 1j) / 2]):
            assert abs(r.z - exact) <= 1e-12
            assert r.multiplicity == 1 and not r.boundary_suspect
            assert eigenfunction_check(t13, r.z) <= 1e-10

    def test_kappa_zero_double_root(self, mu2):
        # S = -s and M - i has numerator -i (z - i)^2
        res = find_eigenvalues(DissipativeTriple(mu2, 0), REGION)
        assert res.winding == 2 and len(res) == 1
        r = res.roots[0]
        assert r.multiplicity == 2 and abs(r.z - 1j) <= 1e-7
        assert any("geometric" in n for n in res.notes)

    def test_empty_region(self, t13):
        res = find_eigenvalues(t13, SearchRegion(-2, 2, 1, 3))
        assert res.winding == 0 and res.points == []

    def test_boundary_suspect_flag(self, t13):
        res = find_eigenvalues(t13, SearchRegion(-2, 2, 0.3, 3))
        assert all(r.boundary_suspect for r in res.roots)

    def test_zero_on_outer_edge(self, mu2):
        # kappa = i/2 puts a zero at 2 + i
        t = DissipativeTriple(mu2, 0.5j)
        assert abs(eval_S(t, 2 + 1j)) <= 1e-15
        with pytest.raises(ConvergenceError):
            find_eigenvalues(t, REGION)

    def test_identically_zero(self, leb):
        res = find_eigenvalues(DissipativeTriple(leb, 0), REGION)
        assert res.verdict == FILLS_HALF_PLANE and len(res) == 0

    def test_lebesgue_has_no_eigenvalues(self, leb):
        assert len(find_eigenvalues(DissipativeTriple(leb, 0.4), REGION)) == 0

    def test_custom_function(self, t13):
        res = find_eigenvalues(t13, SearchRegion(-1, 1, 0.1, 2), S=lambda z: (z - 0.3j) ** 3 * (z + 0.5 - 1j))
        assert [r.multiplicity for r in res.roots] == [1, 3]

    def test_random_triples(self, rng):
        for _ in range(3):
            t = DissipativeTriple(random_atomic_measure(rng, 5), 0.7 * np.exp(1j * rng.uniform(0.5, 2.5)))
            res = find_eigenvalues(t, SearchRegion(-7.03, 7.01, 0.013, 5.02))
            assert sum(r.multiplicity for r in res.roots) == res.winding
            for r in res.roots:
                assert eigenfunction_check(t, r.z) <= 1e-8
                assert abs(1 / krein_p(t, r.z + 1e-3j).value) <= 1e-2


class TestClassify:
    def test_isolated_atom(self, mu2):
        c = classify_spectral_point(mu2, 1.0)
        assert c.verdict == QUASI_REGULAR and c.epsilon_found == 1.0 and c.gap == 2.0

    def test_accumulating_atoms(self):
        mu = Measure(sequences=(AtomSequence(0.0, 1.0, 0.73319962579725609309, 0.5),))
        assert classify_spectral_point(mu, 0.0).verdict == CORE
        c = classify_spectral_point(mu, 1.0)
        assert c.verdict == QUASI_REGULAR and c.epsilon_found == 0.5

    def test_density_interior(self):
        mu = Measure(pieces=(DensityPiece(0, 1, ConstantDensity(1.0)),))
        c = classify_spectral_point(mu, 0.5)
        assert c.verdict == CORE and c.epsilon_found is None
        assert classify_spectral_point(mu, 1.0).verdict == CORE
        c = classify_spectral_point(mu, 2.0)
        assert c.verdict == QUASI_REGULAR and c.epsilon_found == 1.0

    def test_lebesgue_everywhere_core(self, leb):
        assert classify_spectral_point(leb, 123.0).verdict == CORE

    def test_point_outside_support(self, mu2):
        c = classify_spectral_point(mu2, 0.0)
        assert c.verdict == QUASI_REGULAR and c.epsilon_found == 1.0

    def test_gap_below_grid(self):
        mu = atomic_measure([0.0, 1e-8], [1.0, 1.0])
        c = classify_spectral_point(mu, 0.0, [1.0, 0.5])
        assert c.verdict == QUASI_REGULAR and c.epsilon_found == c.gap == pytest.approx(1e-8)

    def test_grid_validation(self, mu2):
        with pytest.raises(DomainError):
            classify_spectral_point(mu2, 0.0, [])
        with pytest.raises(DomainError):
            classify_spectral_point(mu2, 0.0, [1.0, -1.0])

    def test_monotone(self, rng):
        mu = random_atomic_measure(rng, 30)
        grid = [2.0 ** -k for k in range(21)]
        for lam in rng.uniform(-4, 4, 20):
            gap = punctured_gap(mu, lam)
            flags = [e <= gap for e in grid]
            assert flags == sorted(flags)
            c = classify_spectral_point(mu, lam, grid)
            assert c.verdict == QUASI_REGULAR
            assert c.epsilon_found == next((e for e in grid if e <= gap), gap)
