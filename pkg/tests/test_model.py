import math

import numpy as np
import pytest

from extcalc.errors import DecompositionError, DomainError, MeasureError, SupportError
from extcalc.measure import lebesgue_measure, random_atomic_measure
from extcalc.model import (ModelVector, apply_B, apply_hat_B, decompose_dom_hat_B, deficiency_element,
                           eigenfunction_check, extension_direction, functional_l, in_dom_dot_B, inner,
                           load_vector)
from extcalc.triple import DissipativeTriple, eval_S

SQRT3 = math.sqrt(3)


class TestDeficiencyElement:
    def test_values(self, mu2):
        g = deficiency_element(mu2, 2j)
        assert np.allclose(g.values, [(-1 + 2j) / 5, (1 + 2j) / 5], atol=1e-16)
        assert g.norm(mu2) ** 2 == pytest.approx(0.4, abs=1e-16)

    def test_rejects_atom(self, mu2):
        with pytest.raises(SupportError):
            deficiency_element(mu2, 1.0)

    def test_needs_atoms(self):
        with pytest.raises(DomainError):
            deficiency_element(lebesgue_measure(), 1j)

    def test_difference_identity(self, rng):
        mu = random_atomic_measure(rng)
        diff = (deficiency_element(mu, 1j) - deficiency_element(mu, -1j)).values / 2j
        assert np.allclose(diff, 1 / (1 + mu.locations ** 2), rtol=1e-14, atol=0)


class TestDomain:
    def test_membership(self, mu2):
        assert in_dom_dot_B(mu2, ModelVector([1, -1])) and in_dom_dot_B(mu2, ModelVector([1, -1])).defect == 0
        r = in_dom_dot_B(mu2, ModelVector([1, 1]))
        assert not r and r.defect == 2

    def test_deficiency_difference_is_outside(self, mu2):
        f = deficiency_element(mu2, 1j) - deficiency_element(mu2, -1j)
        assert np.allclose(f.values, [1j, 1j])
        r = in_dom_dot_B(mu2, f)
        assert not r.member and r.defect == pytest.approx(2)

    def test_one_dimensional_gap(self, rng):
        for _ in range(5):
            mu = random_atomic_measure(rng)
            assert abs(functional_l(mu, ModelVector(1 / (1 + mu.locations ** 2)))) > 0

    def test_deficiency_pairings(self, rng):
        # sum w (x +/- i) f conj(g_(+/-)) = l(f) for every f
        mu = random_atomic_measure(rng)
        x, n = mu.locations, len(mu.atoms)
        for _ in range(5):
            f = ModelVector(rng.normal(size=n) + 1j * rng.normal(size=n))
            for sign in (1, -1):
                lhs = inner(mu, ModelVector((x + sign * 1j) * f.values), deficiency_element(mu, sign * 1j))
                assert abs(lhs - functional_l(mu, f)) <= 1e-12 * max(1, f.norm(mu))

    def test_length_mismatch(self, mu2):
        with pytest.raises(DomainError):
            in_dom_dot_B(mu2, ModelVector([1, 2, 3]))


class TestDecomposition:
    def test_fixture(self, t13):
        d = decompose_dom_hat_B(t13, ModelVector([1, 0]))
        assert d.K == pytest.approx(-0.75j, abs=1e-15)
        assert abs(functional_l(t13.measure, d.f0)) <= 1e-15 and d.residual <= 1e-15

    def test_direction_itself(self, t13):
        d = decompose_dom_hat_B(t13, extension_direction(t13))
        assert d.K == pytest.approx(1, abs=1e-15) and np.allclose(d.f0.values, 0, atol=1e-15)

    def test_zero_mean_vector(self, t13):
        d = decompose_dom_hat_B(t13, ModelVector([2, -2]))
        assert d.K == 0 and np.array_equal(d.f0.values, [2, -2])

    def test_degenerate_direction(self, mu2):
        # kappa = -1 over symmetric atoms: g_+ + g_- has zero mean
        class Ext:
            measure, kappa = mu2, -1 + 0j
        with pytest.raises(DecompositionError):
            decompose_dom_hat_B(Ext, ModelVector([1, 0]))


class TestOperator:
    def test_on_direction(self, t13):
        u = extension_direction(t13)
        x = t13.measure.locations
        expected = 1j * (1 / (x - 1j) + t13.kappa / (x + 1j))
        assert np.allclose(apply_hat_B(t13, u).values, expected, atol=1e-15)
        assert np.allclose(apply_hat_B(t13, u).values, x * u.values - (1 - t13.kappa), atol=1e-15)

    def test_on_symmetric_domain(self, t13):
        f = ModelVector([3 - 1j, -3 + 1j])
        assert np.array_equal(apply_hat_B(t13, f).values, apply_B(t13.measure, f).values)

    def test_dissipative(self, rng):
        t = DissipativeTriple(random_atomic_measure(rng), 0.7j)
        n = len(t.measure.atoms)
        for _ in range(10):
            f = ModelVector(rng.normal(size=n) + 1j * rng.normal(size=n))
            assert inner(t.measure, apply_hat_B(t, f), f).imag >= -1e-12


class TestEigenfunctions:
    @pytest.mark.parametrize("z0", [(SQRT3 + 1j) / 2, (-SQRT3 + 1j) / 2])
    def test_roots(self, t13, z0):
        assert eigenfunction_check(t13, z0) <= 1e-10

    def test_non_roots(self, t13):
        assert eigenfunction_check(t13, 2j) >= 0.1
        assert eigenfunction_check(t13, 1j) > 0

    def test_matches_zeros_of_S(self, rng):
        t = DissipativeTriple(random_atomic_measure(rng, 6), 0.3 - 0.2j)
        for _ in range(10):
            z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-1, 1))
            assert (eigenfunction_check(t, z) <= 1e-8) == (abs(eval_S(t, z)) <= 1e-8)

    def test_rejects_lower_half_plane(self, t13):
        with pytest.raises(DomainError):
            eigenfunction_check(t13, -1j)


def test_vector_file(tmp_path):
    f = tmp_path / "h.json"
    f.write_text('{"values": [{"re": 0, "im": 0}, {"re": "1", "im": 0.5}]}')
    v = load_vector(f, 2)
    assert np.array_equal(v.values, [0, 1 + 0.5j])
    assert load_vector(v.to_spec()).values.tolist() == v.values.tolist()
    with pytest.raises(MeasureError):
        load_vector(f, 3)
    with pytest.raises(MeasureError):
        load_vector({"vals": []})


def test_vector_is_immutable():
    v = ModelVector([1, 2])
    with pytest.raises(ValueError):
        v.values[0] = 3
    with pytest.raises(DomainError):
        ModelVector([1, math.nan])
