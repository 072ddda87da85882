from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pvmeta import gp
from pvmeta.bo import BoConfig, acquire, phi_t, replay, run_bo, ucb
from pvmeta.errors import ValidationError
from pvmeta.fitscore import DomainGrid, grid_search
from pvmeta.gp import GpState, KernelSpec, condition, kernel_matrix

from conftest import TRUTH

# 15 x 10 cells, truth (270, 18) on the lattice
COARSE = DomainGrid(np.arange(186.0, 355.0, 12.0), np.arange(0.0, 60.0, 6.0))


class TestPhi:
    def test_reference_value(self):
        # mpmath, 30 digits
        assert phi_t(1, 32400, 0.1) == pytest.approx(26.372398194490423568, rel=1e-12)

    def test_two_log_six(self):
        # argument 2 * pi^2 / (6 * pi^2 / 18) = 6
        assert phi_t(1, 2, math.pi ** 2 / 18) == pytest.approx(3.5835189384561100016, rel=1e-12)

    @given(st.integers(1, 10_000), st.integers(2, 10 ** 6), st.floats(1e-6, 0.999))
    def test_strictly_increasing_in_t(self, t, n, delta):
        assert phi_t(t + 1, n, delta) > phi_t(t, n, delta)

    @pytest.mark.parametrize("args", [(0, 10, 0.1), (1, 1, 0.1), (1, 10, 0.0), (1, 10, 1.0)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(ValidationError):
            phi_t(*args)


class TestAcquire:
    def test_empty_state_picks_first_point(self):
        grid = DomainGrid.regular(30.0, 30.0)
        assert acquire(GpState.empty(), grid, 5.0) == 0

    def test_explores_unobserved_point(self):
        grid = DomainGrid(np.array([0.0, 180.0]), np.array([45.0]))
        state = gp.update(GpState.empty(), grid.point(0), 0.0)
        assert acquire(state, grid, phi_t(2, 2, 0.1)) == 1

    def test_matches_brute_force_ucb(self):
        grid = DomainGrid(np.array([0.0, 90.0, 180.0, 270.0]), np.array([0.0, 30.0, 60.0, 90.0]))
        spec = KernelSpec()
        x = grid.points[[1, 6, 12]]
        y = np.array([-0.2, -0.05, -0.4])
        state = condition(x, y, spec)
        phi = phi_t(4, grid.size, 0.1)
        # direct dense solve, no factorization reuse
        K = kernel_matrix(x, x, spec) + state.jitter * np.eye(3)
        ks = kernel_matrix(grid.points, x, spec)
        mean = ks @ np.linalg.solve(K, y)
        var = 1.0 - np.einsum("ij,ji->i", ks, np.linalg.solve(K, ks.T))
        brute = mean + math.sqrt(phi) * np.sqrt(np.maximum(var, 0.0))
        np.testing.assert_allclose(ucb(state, grid, phi), brute, atol=1e-8)
        assert acquire(state, grid, phi) == int(np.argmax(brute))

    def test_exclusion(self):
        grid = DomainGrid.regular(90.0, 45.0)
        assert acquire(GpState.empty(), grid, 1.0, exclude=[0, 1]) == 2


class TestConfig:
    def test_validation(self):
        grid = DomainGrid.regular(30.0, 30.0)
        with pytest.raises(ValidationError):
            BoConfig(10, grid, warm_start_count=10)
        with pytest.raises(ValidationError):
            BoConfig(10, grid, warm_start_count=0)
        with pytest.raises(ValidationError):
            BoConfig(10, grid, warm_start_count=3, delta=1.0)
        with pytest.raises(ValidationError):
            BoConfig(grid.size + 1, grid, exclude_visited=True)
        tiny = DomainGrid(np.array([0.0, 90.0]), np.array([10.0]))
        with pytest.raises(ValidationError):
            BoConfig(5, tiny, warm_start_count=3)


def _smooth(az, tilt):
    d = math.radians(az - 250.0)
    return -(1.0 - math.cos(d)) - ((tilt - 40.0) / 60.0) ** 2


class TestRunBo:
    def test_trace_shape_and_invariants(self):
        grid = DomainGrid.regular(20.0, 10.0)
        trace = run_bo(_smooth, BoConfig(30, grid, warm_start_count=5, rng_seed=3),
                       optimum_score=max(_smooth(*p) for p in grid.points))
        recs = trace.records
        assert len(recs) == 30
        assert [r.t for r in recs] == list(range(1, 31))
        assert [r.phase for r in recs] == ["warm"] * 5 + ["ucb"] * 25
        assert len({r.grid_index for r in recs[:5]}) == 5
        inc = [r.incumbent_score for r in recs]
        assert all(b >= a for a, b in zip(inc, inc[1:]))
        assert trace.incumbent_score == max(r.score for r in recs)
        assert all(r.regret >= 0.0 for r in recs)
        assert all(0 <= r.grid_index < grid.size for r in recs)
        assert trace.visit_counts().sum() == 30
        assert trace.n_objective_calls == len({r.grid_index for r in recs})

    def test_memoizes_objective(self):
        calls = []

        def f(az, tilt):
            calls.append((az, tilt))
            return 0.0

        # a flat objective makes UCB revisit points once sigma collapses
        grid = DomainGrid(np.array([0.0, 180.0]), np.array([0.0, 45.0]))
        trace = run_bo(f, BoConfig(12, grid, warm_start_count=1))
        assert len(calls) == len(set(calls)) == trace.n_objective_calls <= 4
        assert trace.state.t == 12

    def test_deterministic(self):
        grid = DomainGrid.regular(20.0, 10.0)
        a = run_bo(_smooth, BoConfig(25, grid, rng_seed=11))
        b = run_bo(_smooth, BoConfig(25, grid, rng_seed=11))
        assert a.records == b.records
        c = run_bo(_smooth, BoConfig(25, grid, rng_seed=12))
        assert [r.grid_index for r in c.records] != [r.grid_index for r in a.records]

    def test_replay_matches_final_state(self):
        grid = DomainGrid.regular(20.0, 10.0)
        cfg = BoConfig(25, grid, rng_seed=2)
        trace = run_bo(_smooth, cfg)
        state = replay(cfg, [r.grid_index for r in trace.records], [r.score for r in trace.records])
        np.testing.assert_allclose(gp.posterior(state, grid.points)[0], trace.posterior_surface()[0],
                                   rtol=0, atol=1e-12)

    def test_recovers_truth_on_coarse_grid(self, noiseless_year):
        oracle = grid_search(COARSE, noiseless_year.groups, noiseless_year.irradiance)
        assert oracle.best == TRUTH
        trace = run_bo(noiseless_year.objective, BoConfig(60, COARSE, rng_seed=0),
                       optimum_score=oracle.best_score)
        assert trace.incumbent == TRUTH
        assert all(r.regret >= 0.0 for r in trace.records)

    def test_exhaustive_coverage_equals_oracle(self, noisy_year):
        grid = DomainGrid(np.arange(240.0, 300.0, 6.0), np.arange(10.0, 30.0, 4.0))
        oracle = grid_search(grid, noisy_year.groups, noisy_year.irradiance)
        trace = run_bo(noisy_year.objective, BoConfig(grid.size, grid, exclude_visited=True))
        assert sorted(r.grid_index for r in trace.records) == list(range(grid.size))
        assert trace.incumbent_index == oracle.argmax
        assert trace.incumbent_score == oracle.best_score
