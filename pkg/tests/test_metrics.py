from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blotto.engine import EngineConfig, LossMatrix, round_losses, run_self_play, run_vs_fixed
from blotto.game import Allocation, GameSpec, Rule
from blotto.metrics import (
    Checkpoint,
    MarginalProfile,
    average_allocation,
    best_response_value,
    equilibrium_distance,
    euclidean_distance,
    exploitability_gaps,
    incurred_loss,
    loglog_slope,
    regret,
    regret_value,
)
from blotto.oracle import (
    brute_force_gaps,
    brute_force_regret,
    exhaustive_best_response,
    pairwise_expected_loss,
)


def history_matrix(spec, player, opponent_traj):
    out = np.zeros((spec.k, spec.capacity(player) + 1))
    for y in opponent_traj:
        out += round_losses(spec, player, y)
    return out


class TestIncurredLoss:
    def test_mirrored(self):
        spec = GameSpec((1, 2, 3), (4, 4))
        assert incurred_loss(spec, (1, 1, 2), (1, 1, 2)) == pytest.approx((0.5, 0.5))

    def test_split_wins(self):
        spec = GameSpec((0.5, 0.5), (2, 2))
        assert incurred_loss(spec, (2, 0), (0, 2)) == pytest.approx((0.5, 0.5))

    def test_popular_vote(self):
        spec = GameSpec((0.5, 0.5), (4, 4), Rule.POPULAR_VOTE)
        assert incurred_loss(spec, (3, 1), (1, 3)) == pytest.approx((0.5, 0.5))


class TestBestResponse:
    def test_zero_matrix_default(self):
        value, alloc = best_response_value(np.zeros((4, 6)))
        assert value == 0.0
        assert alloc.amounts == (0, 0, 0, 5)

    def test_small_example(self):
        value, alloc = best_response_value(np.array([[0.0, 5.0], [1.0, 0.0]]))
        assert value == 0.0
        assert alloc.amounts == (0, 1)
        assert exhaustive_best_response(np.array([[0.0, 5.0], [1.0, 0.0]])) == (value, alloc)

    def test_zero_matrix_agrees_with_oracle(self):
        assert best_response_value(np.zeros((3, 5))) == exhaustive_best_response(np.zeros((3, 5)))

    def test_explicit_n(self):
        value, alloc = best_response_value(np.array([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]]), 1)
        assert value == 1.0 and alloc.total == 1
        with pytest.raises(ValueError):
            best_response_value(np.zeros((2, 3)), 3)

    def test_owner_carried(self):
        _, alloc = best_response_value(LossMatrix(2, np.zeros((2, 3))))
        assert alloc.owner == 2

    def test_random_against_exhaustive(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            k, n = int(rng.integers(1, 5)), int(rng.integers(0, 7))
            loss = rng.uniform(0, 5, size=(k, n + 1))
            v, a = best_response_value(loss)
            ov, oa = exhaustive_best_response(loss)
            assert v == pytest.approx(ov, abs=1e-12)
            assert a == oa

    def test_ties_against_exhaustive(self):
        # Integer losses produce many exact ties; the minimisers must still agree.
        rng = np.random.default_rng(1)
        for _ in range(100):
            k, n = int(rng.integers(1, 5)), int(rng.integers(0, 7))
            loss = rng.integers(0, 3, size=(k, n + 1)).astype(float)
            assert best_response_value(loss) == exhaustive_best_response(loss)


class TestRegret:
    def test_best_response_play_has_zero_regret(self):
        loss = np.array([[0.0, 2.0], [1.0, 0.0]])
        assert regret_value(0.0, loss, 1) == 0.0

    def test_zero_rounds(self):
        assert regret_value(1.0, np.zeros((2, 2)), 0) == 0.0

    @pytest.mark.parametrize("rule", list(Rule))
    def test_against_brute_force(self, rule):
        spec = GameSpec((1, 2, 4), (4, 5), rule, voter_scale=2)
        rec = run_self_play(spec, EngineConfig(beta=0.8, max_rounds=50, checkpoint_every=50, seed=5))
        for player in (1, 2):
            own, opp = rec.trajectory[player - 1], rec.trajectory[2 - player]
            rows = [round_losses(spec, player, y) for y in opp]
            expected = brute_force_regret(rows, own, spec.capacity(player))
            got = regret(player, rec, history_matrix(spec, player, opp))
            assert got == pytest.approx(expected, abs=1e-12)
            assert (rec.final.regret1, rec.final.regret2)[player - 1] == pytest.approx(expected, abs=1e-12)

    def test_single_battle_is_zero(self):
        spec = GameSpec((1,), (3, 5))
        rec = run_self_play(spec, EngineConfig(max_rounds=30, checkpoint_every=10))
        assert all(c.regret1 == 0.0 and c.regret2 == 0.0 for c in rec.checkpoints)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from(list(Rule)))
    def test_total_regret_non_negative(self, seed, rule):
        spec = GameSpec((1, 3, 2), (3, 4), rule)
        rec = run_self_play(spec, EngineConfig(beta=0.7, max_rounds=60, checkpoint_every=20, seed=seed))
        assert all(c.total_regret >= -1e-12 for c in rec.checkpoints)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_learner_regret_non_negative(self, seed):
        spec = GameSpec((1, 3, 2), (4, 4), Rule.POPULAR_VOTE)
        cfg = EngineConfig(beta=0.7, max_rounds=60, checkpoint_every=20, seed=seed, fixed_player=1)
        rec = run_vs_fixed(spec, cfg, Allocation((2, 1, 1), 1))
        assert all(c.regret2 >= -1e-12 for c in rec.checkpoints)


class TestEquilibriumDistance:
    def test_single_battle_point_mass(self):
        spec = GameSpec((1,), (3, 3))
        p = MarginalProfile.point_mass((3,), 3)
        assert equilibrium_distance(spec, p, p) == 0.0

    def test_exploitable_pure_pair(self):
        spec = GameSpec((1, 1), (2, 2))
        p1 = MarginalProfile.point_mass((2, 0), 2)
        p2 = MarginalProfile.point_mass((1, 1), 2)
        # Every deviation of either player still splits the two equal battles.
        g1, g2 = exploitability_gaps(spec, p1, p2)
        assert (g1, g2) == pytest.approx((0.0, 0.0))

    def test_mirrored_pair_is_exploitable(self):
        # Both tie everything (loss 1/2); moving soldiers to battle 2 concedes
        # battle 1 (1/3) and wins battle 2, so each gap is 1/2 - 1/3.
        spec = GameSpec((1, 2), (2, 2))
        p = MarginalProfile.point_mass((2, 0), 2)
        g1, g2 = exploitability_gaps(spec, p, p)
        assert g1 == pytest.approx(1 / 6, abs=1e-12) and g2 == pytest.approx(1 / 6, abs=1e-12)

    def test_modes(self):
        spec = GameSpec((1, 2), (2, 2))
        p1 = MarginalProfile.point_mass((2, 0), 2)
        p2 = MarginalProfile.point_mass((0, 2), 2)
        g = exploitability_gaps(spec, p1, p2)
        assert equilibrium_distance(spec, p1, p2, "max") == max(g)
        assert equilibrium_distance(spec, p1, p2, "min") == min(g)
        with pytest.raises(ValueError):
            equilibrium_distance(spec, p1, p2, "sum")

    @pytest.mark.parametrize("rule", list(Rule))
    def test_against_brute_force(self, rule):
        spec = GameSpec((1, 2, 3), (4, 3), rule, voter_scale=4)
        rec = run_self_play(spec, EngineConfig(beta=0.8, max_rounds=120, checkpoint_every=120, seed=8))
        g = exploitability_gaps(spec, rec.profile(1), rec.profile(2))
        bf = brute_force_gaps(spec.loss_table(1), spec.loss_table(2), *rec.trajectory, 4, 3)
        assert g == pytest.approx(bf, abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_separability_matches_pairwise_sum(self, seed):
        spec = GameSpec((2, 1, 5), (5, 5), Rule.ELECTORAL_VOTE, voter_scale=2)
        rec = run_self_play(spec, EngineConfig(beta=0.85, max_rounds=200, checkpoint_every=200, seed=seed))
        mu, nu = rec.profile(1).probs, rec.profile(2).probs
        factored = float(np.einsum("ja,jb,jab->", mu, nu, spec.loss_table(1)))
        assert factored == pytest.approx(pairwise_expected_loss(spec.loss_table(1), *rec.trajectory), abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_gap_sum_equals_total_regret(self, seed):
        spec = GameSpec((1, 2, 3, 5), (5, 5))
        rec = run_self_play(spec, EngineConfig(beta=0.9, max_rounds=300, checkpoint_every=100, seed=seed))
        g1, g2 = exploitability_gaps(spec, rec.profile(1), rec.profile(2))
        assert g1 + g2 == pytest.approx(rec.final.total_regret, abs=1e-12)
        assert max(g1, g2) <= rec.final.total_regret + 1e-12

    def test_symmetric_profiles_symmetric_gaps(self):
        spec = GameSpec((1, 2, 3), (4, 4), Rule.POPULAR_VOTE)
        rng = np.random.default_rng(0)
        p = rng.dirichlet(np.ones(5), size=3)
        prof = MarginalProfile(p)
        g1, g2 = exploitability_gaps(spec, prof, prof)
        assert g1 == pytest.approx(g2, abs=1e-12)


class TestProfilesAndAverages:
    def test_profile_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MarginalProfile(np.array([[0.5, 0.4]]))
        with pytest.raises(ValueError):
            MarginalProfile(np.array([0.5, 0.5]))

    def test_constant_play(self):
        spec = GameSpec((1, 1, 1), (5, 5))
        cfg = EngineConfig(max_rounds=10, checkpoint_every=10, fixed_player=2)
        rec = run_vs_fixed(spec, cfg, Allocation((1, 1, 3), 2))
        np.testing.assert_array_equal(average_allocation(rec, 2), [1, 1, 3])
        np.testing.assert_array_equal(rec.profile(2).mean(), [1, 1, 3])

    def test_two_rounds_average(self):
        spec = GameSpec((1, 1), (4, 4))
        rec = run_self_play(spec, EngineConfig(beta=0.5, max_rounds=2, checkpoint_every=2, seed=1))
        a, b = rec.trajectory[0]
        np.testing.assert_allclose(average_allocation(rec, 1), (a + b) / 2)
        assert average_allocation(rec, 1).sum() == pytest.approx(4)

    def test_average_loss(self):
        spec = GameSpec((1, 1), (4, 4))
        rec = run_self_play(spec, EngineConfig(beta=0.5, max_rounds=40, checkpoint_every=10))
        assert rec.average_loss(1) + rec.average_loss(2) == pytest.approx(1.0)


class TestHelpers:
    def test_euclidean(self):
        assert euclidean_distance([0, 3], [4, 0]) == 5.0

    def test_slope_of_power_law(self):
        t = np.array([10, 100, 1000, 10_000])
        assert loglog_slope(t, 3.0 * t**-0.5) == pytest.approx(-0.5)

    def test_slope_ignores_zeros(self):
        assert loglog_slope([1, 10, 100], [0.0, 1.0, 0.1]) == pytest.approx(-1.0)
        assert loglog_slope([1], [1.0]) == 0.0

    def test_checkpoint_default(self):
        assert Checkpoint(1, 0.1, 0.2, 0.3).eq_distance is None
