import math

import pytest

from tandempoll.absorption import absorption_probs, lattice_solution, mfpt_to_empty
from tandempoll.errors import TruncationTooTight
from tandempoll.model import TruncationConfig
from tandempoll.primitives import hitting_mean

from oracles import absorption_p2_value_iteration, lattice_race_samples

RATES = [(1.0, 2.86, 2.86), (1.0, 2.22, 2.22), (1.0, 2.22, 2.86), (1.0, 2.86, 2.22)]


class TestAbsorptionProbs:
    def test_boundary_starts(self):
        assert absorption_probs(3, 0, 1.0, 2.86, 2.22) == (0.0, 1.0)
        assert absorption_probs(0, 3, 1.0, 2.86, 2.22) == (1.0, 0.0)

    @pytest.mark.parametrize("lam,mu1,mu2", RATES)
    def test_complementary_by_construction(self, lam, mu1, mu2):
        p1, p2 = absorption_probs(2, 2, lam, mu1, mu2)
        assert p1 + p2 == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("lam,mu1,mu2", RATES)
    def test_independent_solve_consistent(self, lam, mu1, mu2):
        # the separately solved station-1 probability plus p2 plus the
        # overflow mass must exhaust the row of the fundamental matrix
        sol = lattice_solution(lam, mu1, mu2, 80)
        for u, w in [(1, 1), (2, 3), (3, 2)]:
            s = sol._idx(u, w)
            assert sol.p1[s] + sol.p2[s] + sol.p_overflow[s] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("u,w", [(1, 1), (2, 2), (3, 3), (1, 3), (3, 1)])
    def test_matches_first_step_value_iteration(self, u, w):
        lam, mu1, mu2 = 1.0, 2.86, 2.22
        trunc = TruncationConfig(n_max=30)
        _, p2 = absorption_probs(u, w, lam, mu1, mu2, trunc)
        ref = absorption_p2_value_iteration(u, w, lam, mu1, mu2, 30)
        assert p2 == pytest.approx(ref, abs=1e-9)

    def test_matches_monte_carlo(self):
        lam, mu1, mu2 = 1.0, 2.86, 2.22
        r2, _ = lattice_race_samples(2, 2, lam, mu1, mu2, 200_000, seed=9)
        se = r2.std(ddof=1) / math.sqrt(r2.size)
        _, p2 = absorption_probs(2, 2, lam, mu1, mu2)
        assert abs(r2.mean() - p2) < 3 * se

    def test_truncation_convergence(self):
        for lam, mu1, mu2 in RATES:
            for u, w in [(2, 2), (6, 6)]:
                _, a = absorption_probs(u, w, lam, mu1, mu2, TruncationConfig(n_max=60))
                _, b = absorption_probs(u, w, lam, mu1, mu2, TruncationConfig(n_max=80))
                assert abs(a - b) < 1e-6

    def test_headroom_guard(self):
        with pytest.raises(TruncationTooTight):
            absorption_probs(30, 30, 1.0, 2.86, 2.22, TruncationConfig(n_max=40))


class TestMfpt:
    def test_already_at_target(self):
        assert mfpt_to_empty(3, 0, 1.0, 2.86, 2.22, target_station=2) == 0.0
        assert mfpt_to_empty(0, 3, 1.0, 2.86, 2.22, target_station=1) == 0.0

    def test_pure_drain_without_arrivals(self):
        # station 1 empty and no arrivals: station 2 drains w jobs at mu2
        v = mfpt_to_empty(0, 4, 1e-12, 2.86, 2.22, target_station=2)
        assert v == pytest.approx(4 / 2.22, rel=1e-6)

    def test_station1_autonomous(self):
        assert mfpt_to_empty(3, 0, 1.0, 2.86, 2.22, target_station=1) == pytest.approx(
            hitting_mean(3, 1.0, 2.86)
        )

    @pytest.mark.parametrize("u,w", [(1, 1), (2, 2), (3, 1)])
    def test_matches_conditioned_monte_carlo(self, u, w):
        lam, mu1, mu2 = 1.0, 2.86, 2.22
        r2, t = lattice_race_samples(u, w, lam, mu1, mu2, 200_000, seed=31 + u + 10 * w)
        cond = t[r2]
        se = cond.std(ddof=1) / math.sqrt(cond.size)
        phi = mfpt_to_empty(u, w, lam, mu1, mu2, target_station=2)
        assert abs(cond.mean() - phi) < 3 * se

    def test_conditioned_monte_carlo_station1(self):
        lam, mu1, mu2 = 1.0, 2.22, 2.86
        r2, t = lattice_race_samples(2, 2, lam, mu1, mu2, 200_000, seed=77)
        cond = t[~r2]
        se = cond.std(ddof=1) / math.sqrt(cond.size)
        phi = mfpt_to_empty(2, 2, lam, mu1, mu2, target_station=1)
        assert abs(cond.mean() - phi) < 3 * se

    def test_truncation_convergence(self):
        for lam, mu1, mu2 in RATES:
            a = mfpt_to_empty(3, 3, lam, mu1, mu2, 2, TruncationConfig(n_max=60))
            b = mfpt_to_empty(3, 3, lam, mu1, mu2, 2, TruncationConfig(n_max=80))
            assert abs(a - b) < 1e-6

    def test_scale_covariance(self):
        c = 2.0
        base = mfpt_to_empty(2, 2, 1.0, 2.86, 2.22, 2)
        scaled = mfpt_to_empty(2, 2, c * 1.0, c * 2.86, c * 2.22, 2)
        assert scaled == pytest.approx(base / c, rel=1e-9)
