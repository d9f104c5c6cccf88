"""Handoff chain: state space, closed form vs numeric solve, metrics.

The closed form and the explicitly built transition matrix are
independent derivations of the same chain, so their stationary
distributions must coincide to solver precision wherever the closed
form applies (t_s = c, random/pseudo-random selection).
"""

import math

import numpy as np
import pytest

from specmarkov.chains import ValidationError
from specmarkov.handoff import (
    BACKLOGGED,
    COLLIDED,
    IDLE,
    TRANSMITTING,
    HandoffState,
    InfiniteDelayError,
    ModelParams,
    analyze,
    build_full_chain,
    closed_form_stationary,
    collision_probability,
    enumerate_states,
    handoff_delay,
    numeric_stationary,
    throughput,
)
from specmarkov.occupancy import PuParams, availability


def _u(p, M=10, v=0.1):
    return availability(PuParams(M=M, p=p, v=v)).u


# -- state space --------------------------------------------------------


def test_status_classification():
    assert HandoffState(0, 0, 0).status == IDLE
    assert HandoffState(0, 0, 1).status == BACKLOGGED
    assert HandoffState(3, 0, 1).status == TRANSMITTING
    assert HandoffState(3, 2, 1).status == COLLIDED
    assert HandoffState(0, 1, 2).status == COLLIDED


def test_state_counts_match_formula():
    # 1 idle + per tier: 1 backlogged + c transmitting + capped collided runs
    for c, h, t_s, expected in [(10, 1, 10, 67), (10, 1, 3, 39), (4, 3, 2, 37)]:
        states = enumerate_states(c, h, t_s)
        assert len(states) == expected, (c, h, t_s)
        collided = t_s * (c - t_s + 1) + t_s * (t_s - 1) // 2
        assert len(states) == 1 + h * (1 + c + collided)
        assert len(set(states)) == len(states)


def test_full_sensing_reproduces_base_count():
    for c in (3, 7, 10):
        assert c * (c + 1) // 2 == c * (c - c + 1) + c * (c - 1) // 2


def test_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(p=1.5)
    with pytest.raises(ValidationError):
        ModelParams(c=0)
    with pytest.raises(ValidationError):
        ModelParams(t_s=11, c=10)
    with pytest.raises(ValidationError):
        ModelParams(t_s=0)
    with pytest.raises(ValidationError):
        ModelParams(v=0.0)
    with pytest.raises(ValidationError):
        ModelParams(scheme="roundrobin")
    # t_s defaults to c
    assert ModelParams(c=7).t_s == 7


# -- closed form vs numeric ---------------------------------------------


def test_no_pu_saturated_closed_form():
    # p=0, s=1, q=0, c=10, h=1: backlogged and each transmitting state 1/11
    pm = ModelParams(M=10, N=1, c=10, h=1, p=0.0, s=1.0)
    dist = closed_form_stationary(pm, q=0.0, u=1.0)
    assert dist[(0, 0, 1)] == pytest.approx(1 / 11, abs=1e-12)
    for i in range(1, 11):
        assert dist[(i, 0, 1)] == pytest.approx(1 / 11, abs=1e-12)
    assert dist[(0, 0, 0)] == pytest.approx(0.0, abs=1e-15)
    assert throughput(dist) == pytest.approx(10 / 11, abs=1e-12)
    assert collision_probability(dist) == 0.0


def test_closed_form_normalizes():
    pm = ModelParams(M=10, N=1, c=10, h=1, p=0.05, s=1.0)
    dist = closed_form_stationary(pm, q=0.0, u=_u(0.05))
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_closed_vs_numeric_full_grid():
    """The two engines agree to 1e-9 (L-inf) over the whole base-model grid."""
    worst = 0.0
    for p in (0.0, 0.02, 0.05, 0.1, 0.2):
        u = _u(p)
        for c in (4, 10):
            for h in (1, 3):
                for s in (0.5, 1.0):
                    for q in (0.0, 0.3):
                        pm = ModelParams(M=10, N=2, c=c, h=h, p=p, s=s)
                        closed = closed_form_stationary(pm, q=q, u=u)
                        numeric = numeric_stationary(pm, q=q, u=u)
                        gap = float(np.max(np.abs(closed.probs - numeric.probs)))
                        worst = max(worst, gap)
                        assert gap <= 1e-9, (p, c, h, s, q, gap)
    print(f"closed-vs-numeric worst L-inf gap: {worst:.3g}")


def test_tier_invariance():
    # P(c,0,k) identical across tiers k
    pm = ModelParams(M=10, N=1, c=10, h=3, p=0.05, s=1.0)
    for dist in (
        closed_form_stationary(pm, q=0.1, u=0.9),
        numeric_stationary(pm, q=0.1, u=0.9),
    ):
        ref = dist[(10, 0, 1)]
        for k in (2, 3):
            assert abs(dist[(10, 0, k)] - ref) <= 1e-12


def test_retransmission_tier_balance():
    # mass entering a tier's backlog from its capped collided runs equals
    # the escape flow u(1-q) P(0,0,k); holds for the retransmission tiers
    # k >= 2 (the first tier's backlog also receives fresh packets)
    for c, h, p, s, q, p_pu in [(10, 3, 0.1, 1.0, 0.3, 0.1), (4, 4, 0.2, 0.5, 0.25, 0.2)]:
        u = _u(p_pu)
        pm = ModelParams(M=10, N=2, c=c, h=h, p=p, s=s)
        dist = numeric_stationary(pm, q=q, u=u)
        for k in range(2, h + 1):
            lhs = sum(dist[(i, c - i, k)] for i in range(c))
            rhs = u * (1.0 - q) * dist[(0, 0, k)]
            assert abs(lhs - rhs) <= 1e-9, (c, h, k)


def test_closed_form_rejects_variants():
    with pytest.raises(ValidationError):
        closed_form_stationary(ModelParams(t_s=3), q=0.0, u=0.9)
    with pytest.raises(ValidationError):
        closed_form_stationary(ModelParams(scheme="greedy"), q=1.0, u=0.9)


def test_chain_rows_are_stochastic_for_variants():
    for scheme in ("random", "greedy"):
        for t_s in (1, 3, 10):
            pm = ModelParams(t_s=t_s, scheme=scheme)
            P, index = build_full_chain(pm, q=0.2, u=0.8)
            assert P.shape == (len(index), len(index))
            assert np.max(np.abs(P.sum(axis=1) - 1.0)) <= 1e-12


def test_degenerate_corners():
    # s = 0: all mass parks on Idle
    pm = ModelParams(s=0.0)
    dist = closed_form_stationary(pm, q=0.0, u=0.9)
    assert dist[(0, 0, 0)] == 1.0
    # no escape (u = 0): all mass parks on the first backlogged state
    dist = closed_form_stationary(ModelParams(), q=0.0, u=0.0)
    assert dist[(0, 0, 1)] == 1.0


# -- metrics -------------------------------------------------------------


def test_throughput_decreases_in_p():
    pm_lo = ModelParams(M=10, N=1, c=10, h=1, p=0.02, s=1.0)
    pm_hi = ModelParams(M=10, N=1, c=10, h=1, p=0.2, s=1.0)
    assert analyze(pm_hi).metrics.theta < analyze(pm_lo).metrics.theta


def test_throughput_non_increasing_in_sensing_delay():
    thetas = []
    for t_s in (1, 3, 6, 10):
        pm = ModelParams(M=10, N=2, c=10, h=1, p=0.1, s=1.0, t_s=t_s)
        thetas.append(analyze(pm).metrics.theta)
    for a, b in zip(thetas, thetas[1:]):
        assert b <= a + 1e-12, f"theta increased with sensing delay: {thetas}"


def test_collision_probability_decreases_in_n():
    # more pairs -> more SU-SU contention -> less time on air per pair
    prs = [
        analyze(ModelParams(M=10, N=N, c=10, h=1, p=0.1, s=1.0)).metrics.pr_collision
        for N in (2, 4, 6)
    ]
    for a, b in zip(prs, prs[1:]):
        assert b <= a + 1e-12, prs


def test_handoff_delay_values():
    assert handoff_delay(q=0.0, u=1.0) == pytest.approx(1.0, abs=1e-15)
    assert handoff_delay(q=0.5, u=1.0) == pytest.approx(2.0, abs=1e-15)
    assert handoff_delay(q=0.25, u=0.8) == pytest.approx(5 / 3, abs=1e-12)


def test_handoff_delay_infinite():
    with pytest.raises(InfiniteDelayError):
        handoff_delay(q=1.0, u=0.9)
    with pytest.raises(InfiniteDelayError):
        handoff_delay(q=0.3, u=0.0)


def test_delay_matches_stay_probability():
    res = analyze(ModelParams(M=10, N=2, c=10, h=1, p=0.05, s=1.0))
    assert res.metrics.ds == pytest.approx(1.0 / (1.0 - res.metrics.p_d), abs=1e-12)
    assert res.metrics.ds >= 1.0


def test_greedy_multi_pair_throughput_is_zero():
    for N in (2, 3, 6):
        res = analyze(ModelParams(M=10, N=N, c=10, h=1, p=0.05, s=1.0, scheme="greedy"))
        assert res.q == 1.0
        assert res.metrics.theta == 0.0
        assert math.isinf(res.metrics.ds)


def test_mass_partition():
    res = analyze(ModelParams(M=10, N=2, c=10, h=1, p=0.08, s=0.7))
    d = res.distribution
    total = sum(d.status_mass(st) for st in (IDLE, TRANSMITTING, COLLIDED, BACKLOGGED))
    assert total == pytest.approx(1.0, abs=1e-12)
