import cmath
import math

import pytest

from extcalc.errors import DegeneracyError, DomainError, MeasureError, NormalizationError
from extcalc.herglotz import HerglotzEvaluator, eval_M, eval_s
from extcalc.measure import atomic_measure, random_atomic_measure
from extcalc.triple import (DissipativeTriple, equivalence_check, eval_cal_M, eval_S, load_triple,
                            parse_complex, range_disk, recover_invariants, verify_linear_relation)

from conftest import rational_measure


def test_validation(mu2):
    for k in (1.0, 1j, 2.0):
        with pytest.raises(DomainError):
            DissipativeTriple(mu2, k)
    with pytest.raises(NormalizationError):
        DissipativeTriple(atomic_measure([0.0], [3.0]), 0.1)


class TestS:
    def test_fixture(self, t13):
        assert eval_S(t13, 2j) == pytest.approx(3 / 7, abs=1e-15)

    def test_value_at_i_is_kappa(self, mu2, leb):
        for mu in (mu2, leb):
            for k in (0.0, 1 / 3, 0.4 - 0.7j):
                assert abs(eval_S(DissipativeTriple(mu, k), 1j) - k) <= 1e-15

    def test_kappa_zero_is_minus_s(self, mu2, rng):
        t = DissipativeTriple(mu2, 0.0)
        for _ in range(10):
            z = complex(rng.normal(), abs(rng.normal()) + 0.01)
            assert eval_S(t, z) == -eval_s(t.herglotz, z)

    def test_requires_upper_half_plane(self, t13):
        with pytest.raises(DomainError):
            eval_S(t13, -1j)


class TestCalM:
    def test_fixture(self, t13):
        assert eval_cal_M(t13, 2j) == pytest.approx(13j / 14, abs=1e-15)
        assert eval_cal_M(t13, 1j) == pytest.approx(1j, abs=1e-15)

    def test_kappa_zero_is_i(self, mu2):
        t = DissipativeTriple(mu2, 0)
        assert all(eval_cal_M(t, z) == 1j for z in (0.1j, 2 + 3j, -5 + 0.01j))

    def test_relation_to_cayley_transform(self, rng):
        for _ in range(3):
            t = DissipativeTriple(random_atomic_measure(rng), 0.6 * cmath.exp(1j * rng.uniform(0, 6)))
            for _ in range(10):
                z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-2, 1))
                m = eval_cal_M(t, z)
                M = eval_M(t.herglotz, z)
                assert abs((m - 1j) / (m + 1j) - t.kappa.conjugate() * (M - 1j) / (M + 1j)) <= 1e-10


class TestLinearRelation:
    def test_fixture_exact(self, t13):
        k = t13.kappa
        lhs = k.conjugate() * eval_S(t13, 2j)
        rhs = (abs(k) ** 2 - 1) / 2j * eval_cal_M(t13, 2j) + (abs(k) ** 2 + 1) / 2
        assert abs(lhs - 1 / 7) <= 1e-14 and abs(rhs - 1 / 7) <= 1e-14
        assert verify_linear_relation(t13, 2j) <= 1e-12

    def test_at_i_and_kappa_zero(self, mu2):
        assert verify_linear_relation(DissipativeTriple(mu2, 0.3 + 0.4j), 1j) <= 1e-15
        assert verify_linear_relation(DissipativeTriple(mu2, 0), 5 + 0.2j) == 0


class TestDisk:
    def test_values(self):
        d = range_disk(0)
        assert d.center == 1j and d.radius == 0
        d = range_disk(0.5)
        assert d.center == pytest.approx(5j / 3) and d.radius == pytest.approx(4 / 3)
        lo, hi = d.im_bounds
        assert lo == pytest.approx(1 / 3) and hi == pytest.approx(3)

    def test_rejects_unit_kappa(self):
        with pytest.raises(DomainError):
            range_disk(1j)

    def test_containment(self, rng):
        t = DissipativeTriple(rational_measure(0.4), 0.9 * cmath.exp(1j * math.pi / 3))
        d = range_disk(t.kappa)
        for _ in range(50):
            z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-3, 1))
            assert d.contains(eval_cal_M(t, z), 1e-10)


class TestRecovery:
    def test_round_trip(self, t13):
        rec = recover_invariants(t13.S, [2j, -2j])
        assert rec.kappa == pytest.approx(1 / 3, abs=1e-15)
        assert rec.s(2j) == pytest.approx(-1 / 9, abs=1e-15)
        assert rec.M(2j) == pytest.approx(0.8j, abs=1e-14)
        assert rec.M(-2j) == pytest.approx(-0.8j, abs=1e-14)
        assert rec.M(1j) == pytest.approx(1j, abs=1e-15)
        assert rec.poles == ()

    def test_zero_function(self):
        rec = recover_invariants(lambda z: 0j)
        assert rec.kappa == 0 and rec.s(3j) == 0 and rec.M(0.5 + 2j) == 1j

    def test_rejects_non_contraction(self):
        with pytest.raises(DomainError):
            recover_invariants(lambda z: 1.5 + 0j)

    def test_pole_reported_per_point(self):
        # S = (1 - kappa)/(kappa - 1) = -1 gives s = 1 everywhere
        rec = recover_invariants(lambda z: 0j if z == 1j else -1 + 0j, [2j, 3j])
        assert rec.poles == (2j, 3j)
        assert all(m is None for _, _, m in rec.samples)
        with pytest.raises(DegeneracyError):
            rec.M(2j)

    def test_involution_on_random_triples(self, rng):
        for _ in range(3):
            t = DissipativeTriple(random_atomic_measure(rng), 0.5 * cmath.exp(1j * rng.uniform(0, 6)))
            rec = recover_invariants(t.S)
            assert abs(rec.kappa - t.kappa) <= 1e-15
            h = HerglotzEvaluator(t.measure)
            for _ in range(10):
                z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-2, 1))
                assert abs(rec.s(z) - eval_s(h, z)) <= 1e-12
                M = eval_M(h, z)
                assert abs(rec.M(z) - M) <= 1e-9 * max(1, abs(M))


class TestEquivalence:
    grid = [2j, 1j, 0.5 + 0.3j, -2 + 1j]

    def test_identical(self, t13):
        assert equivalence_check(t13, t13, self.grid).equivalent

    def test_kappa_differs(self, mu2, t13):
        res = equivalence_check(t13, DissipativeTriple(mu2, 0.5), self.grid)
        assert not res.equivalent and res.max_deviation >= 1 / 6 - 1e-15

    def test_measure_differs(self, t13):
        other = DissipativeTriple(atomic_measure([-2.0, 2.0], [2.5, 2.5]), 1 / 3)
        assert eval_s(other.herglotz, 2j) == pytest.approx(1 / 9, abs=1e-15)
        assert not equivalence_check(t13, other, self.grid).equivalent

    def test_empty_grid(self, t13):
        with pytest.raises(DomainError):
            equivalence_check(t13, t13, [])


class TestFileFormat:
    def test_round_trip(self, t13):
        assert load_triple(t13.to_spec()) == t13

    def test_errors(self, mu2):
        with pytest.raises(MeasureError):
            load_triple({"measure": mu2.to_spec()})
        with pytest.raises(NormalizationError):
            load_triple({"measure": {"atoms": [{"location": 0, "weight": 3}]}, "kappa": {"re": 0}})
        with pytest.raises(DomainError):
            load_triple({"measure": mu2.to_spec(), "kappa": {"re": 1, "im": 0}})

    @pytest.mark.parametrize("text, value", [
        ("0.5-2i", 0.5 - 2j), ("i", 1j), ("-i", -1j), ("2+i", 2 + 1j), ("1e-3+1e2i", 0.001 + 100j),
        ("3", 3 + 0j), (" 1 - 1i ", 1 - 1j), ({"re": "0.25", "im": -1}, 0.25 - 1j), (2, 2 + 0j),
    ])
    def test_parse_complex(self, text, value):
        assert parse_complex(text) == value

    def test_parse_complex_rejects(self):
        with pytest.raises(MeasureError):
            parse_complex("one")
