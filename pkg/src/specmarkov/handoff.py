"""The spectrum-handoff Markov chain of a single SU pair, and its metrics.

A secondary-user pair cycles through four statuses: Idle (no packet),
Backlogged (packet waiting, no channel), Transmitting, and Collided
(overlapping a returning primary user, not yet aware of it).  The chain
state is the triple (i, j, k):

* i — cleanly transmitted slots of the current frame,
* j — collided slots of the current frame,
* k — frame number within the packet (1..h), with (0, 0, 0) = Idle.

Two independent engines produce the stationary distribution: a closed
form valid for the base model (collision detected at frame end,
i.e. sensing delay equal to the frame length), and a numeric solve of
the explicitly built transition matrix, which additionally covers the
shorter-sensing-delay and greedy structural variants.  The test suite
drives both engines over a grid and requires them to agree.

Throughput is the stationary mass of the Transmitting states, the SU-PU
collision probability the mass of the Collided states, and the average
handoff delay the mean dwell in Backlogged, 1/(u(1-q)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .chains import ChainError, StructuralError, ValidationError, stationary_distribution
from .contention import ContentionParams, contention_result, validate_scheme
from .occupancy import PuParams, availability

IDLE = "idle"
TRANSMITTING = "transmitting"
COLLIDED = "collided"
BACKLOGGED = "backlogged"
STATUSES = (IDLE, TRANSMITTING, COLLIDED, BACKLOGGED)


class InfiniteDelayError(ChainError):
    """Backlog never escapes (per-slot stay probability is 1)."""


class HandoffState(NamedTuple):
    """Chain state (i clean slots, j collided slots, k-th frame)."""

    i: int
    j: int
    k: int

    @property
    def status(self) -> str:
        if self.j >= 1:
            return COLLIDED
        if self.i >= 1:
            return TRANSMITTING
        if self.k >= 1:
            return BACKLOGGED
        return IDLE


@dataclass(frozen=True)
class ModelParams:
    """All scalar model parameters in one validated record.

    M: licensed channels; N: SU pairs; c: slots per frame; h: frames
    per packet; p: per-slot PU arrival probability; s: per-slot SU
    packet arrival probability when Idle; v: per-slot PU completion
    probability; t_s: sensing delay in slots (defaults to c, i.e. a
    collision is only discovered at frame end); scheme: channel
    selection discipline ("random", "greedy" or "pseudorandom").
    """

    M: int = 10
    N: int = 2
    c: int = 10
    h: int = 1
    p: float = 0.05
    s: float = 1.0
    v: float = 0.1
    t_s: int | None = None
    scheme: str = "random"

    def __post_init__(self):
        for name in ("M", "N", "c", "h"):
            val = getattr(self, name)
            if not isinstance(val, int) or val < 1:
                raise ValidationError(f"{name} must be an integer >= 1 (got {val!r})")
        for name in ("p", "s"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1] (got {val!r})")
        if not 0.0 < self.v <= 1.0:
            raise ValidationError(f"v must be in (0, 1] (got {self.v!r})")
        if self.t_s is None:
            object.__setattr__(self, "t_s", self.c)
        if not isinstance(self.t_s, int) or not 1 <= self.t_s <= self.c:
            raise ValidationError(f"t_s must be an integer in [1, c] (got {self.t_s!r})")
        validate_scheme(self.scheme)


def enumerate_states(c: int, h: int, t_s: int) -> tuple[HandoffState, ...]:
    """All valid chain states, in the canonical order used everywhere.

    Idle first, then per frame tier k: the Backlogged state, the c
    Transmitting states, and the Collided states (i, j, k) with the
    collided run capped at min(t_s, c - i) — a run ends either when the
    pair senses the collision or when the frame does.
    """
    states = [HandoffState(0, 0, 0)]
    for k in range(1, h + 1):
        states.append(HandoffState(0, 0, k))
        for i in range(1, c + 1):
            states.append(HandoffState(i, 0, k))
        for i in range(c):
            for j in range(1, min(t_s, c - i) + 1):
                states.append(HandoffState(i, j, k))
    return tuple(states)


@dataclass(frozen=True)
class HandoffDistribution:
    """A stationary distribution indexed by HandoffState."""

    states: tuple[HandoffState, ...]
    probs: np.ndarray
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: n for n, s in enumerate(self.states)})

    def __getitem__(self, state) -> float:
        return float(self.probs[self._index[HandoffState(*state)]])

    def status_mass(self, status: str) -> float:
        """Total stationary mass of the states with the given status."""
        return float(sum(p for s, p in zip(self.states, self.probs) if s.status == status))


def _point_mass(params: ModelParams, target: HandoffState) -> HandoffDistribution:
    states = enumerate_states(params.c, params.h, params.t_s)
    probs = np.zeros(len(states))
    probs[states.index(target)] = 1.0
    return HandoffDistribution(states=states, probs=probs)


def closed_form_stationary(params: ModelParams, q: float, u: float) -> HandoffDistribution:
    """Stationary distribution of the base model, in closed form.

    Valid for t_s = c (collision discovered at frame end) and the
    random / pseudo-random schemes; the greedy variant changes the chain
    structure and is solved numerically instead.  Writing a = u(1-q)
    for the per-slot backlog escape probability, every state's mass is
    proportional to (with B_1 = 1):

    * Backlogged (0,0,1): 1;  (0,0,k>1): 1 - (1-p)^c
    * Transmitting (i,0,k): a (1-p)^i       — the same for every tier
    * Collided (i,j,k): a p (1-p)^i         — independent of j
    * Idle: a (1-p)^c (1-s)/s

    Degenerate corners short-circuit: s = 0 parks all mass on Idle, and
    a = 0 (no escape from backlog) parks it on the first Backlogged
    state.
    """
    if params.t_s != params.c:
        raise ValidationError(
            f"closed form covers the base model t_s = c only (got t_s={params.t_s}, "
            f"c={params.c}); use numeric_stationary for the sensing-delay variant"
        )
    if params.scheme == "greedy":
        raise ValidationError(
            "closed form covers random/pseudorandom selection; the greedy variant "
            "chain is solved numerically"
        )
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"q must be in [0, 1] (got {q!r})")
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"u must be in [0, 1] (got {u!r})")

    if params.s == 0.0:
        return _point_mass(params, HandoffState(0, 0, 0))
    a = u * (1.0 - q)
    if a == 0.0:
        return _point_mass(params, HandoffState(0, 0, 1))

    p, s, c = params.p, params.s, params.c
    no_pu_frame = (1.0 - p) ** c
    states = enumerate_states(c, params.h, params.t_s)
    probs = np.empty(len(states))
    for n, st in enumerate(states):
        status = st.status
        if status == IDLE:
            probs[n] = a * no_pu_frame * (1.0 - s) / s
        elif status == BACKLOGGED:
            probs[n] = 1.0 if st.k == 1 else 1.0 - no_pu_frame
        elif status == TRANSMITTING:
            probs[n] = a * (1.0 - p) ** st.i
        else:  # collided
            probs[n] = a * p * (1.0 - p) ** st.i
    probs /= probs.sum()
    return HandoffDistribution(states=states, probs=probs)


def build_full_chain(
    params: ModelParams, q: float, u: float
) -> tuple[np.ndarray, dict[HandoffState, int]]:
    """Explicit one-step transition matrix of the handoff chain.

    Returns the matrix and the state-to-row index map.  Transition
    rules:

    * Idle: stays with 1-s, a new packet arrives with s.
    * Backlogged: stays with qu + (1-u); with u(1-q) it wins a channel
      and the first slot either succeeds (1-p) or is hit by a PU (p).
    * Transmitting (i,0,k): next slot clean with 1-p, collided with p;
      a completed frame rolls into the next tier's first slot, and a
      completed packet goes Idle (1-s) or straight to a new packet (s).
    * Collided: the run extends deterministically until the pair senses
      it, after min(t_s, c-i) overlap slots, then drops to Backlogged of
      the same tier to retransmit the frame.  Under the greedy variant
      the drop happens only with 1-u; with u the pair restarts the frame
      immediately on the greedy channel, colliding again with p.
    """
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"q must be in [0, 1] (got {q!r})")
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"u must be in [0, 1] (got {u!r})")
    p, s, c, h, t_s = params.p, params.s, params.c, params.h, params.t_s
    states = enumerate_states(c, h, t_s)
    index = {st: n for n, st in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for st in states:
        m = index[st]
        i, j, k = st
        if st.status == IDLE:
            P[m, index[HandoffState(0, 0, 0)]] += 1.0 - s
            P[m, index[HandoffState(0, 0, 1)]] += s
        elif st.status == COLLIDED:
            if j < min(t_s, c - i):
                P[m, index[HandoffState(i, j + 1, k)]] += 1.0
            elif params.scheme == "greedy":
                P[m, index[HandoffState(0, 0, k)]] += 1.0 - u
                P[m, index[HandoffState(1, 0, k)]] += u * (1.0 - p)
                P[m, index[HandoffState(0, 1, k)]] += u * p
            else:
                P[m, index[HandoffState(0, 0, k)]] += 1.0
        elif st.status == BACKLOGGED:
            P[m, index[HandoffState(0, 0, k)]] += q * u + (1.0 - u)
            P[m, index[HandoffState(1, 0, k)]] += u * (1.0 - q) * (1.0 - p)
            P[m, index[HandoffState(0, 1, k)]] += u * (1.0 - q) * p
        else:  # transmitting
            if i < c:
                P[m, index[HandoffState(i + 1, 0, k)]] += 1.0 - p
                P[m, index[HandoffState(i, 1, k)]] += p
            elif k < h:
                P[m, index[HandoffState(1, 0, k + 1)]] += 1.0 - p
                P[m, index[HandoffState(0, 1, k + 1)]] += p
            else:
                P[m, index[HandoffState(0, 0, 0)]] += 1.0 - s
                P[m, index[HandoffState(0, 0, 1)]] += s
    defect = np.max(np.abs(P.sum(axis=1) - 1.0))
    if defect > 1e-12:
        raise StructuralError(
            f"handoff chain rows deviate from stochastic by {defect!r}"
        )
    return P, index


def numeric_stationary(params: ModelParams, q: float, u: float) -> HandoffDistribution:
    """Stationary distribution by solving the explicitly built chain.

    Independent of (and tested against) the closed form; also the
    authoritative engine for the sensing-delay variant t_s < c and the
    greedy chain structure, where no closed form is printed.
    """
    P, index = build_full_chain(params, q, u)
    probs = stationary_distribution(P)
    return HandoffDistribution(states=tuple(index), probs=probs)


def throughput(dist: HandoffDistribution) -> float:
    """Normalized SU throughput: stationary mass of the Transmitting states."""
    return dist.status_mass(TRANSMITTING)


def collision_probability(dist: HandoffDistribution) -> float:
    """SU-PU collision probability: stationary mass of the Collided states."""
    return dist.status_mass(COLLIDED)


def handoff_delay(q: float, u: float) -> float:
    """Average spectrum-handoff delay in slots.

    The backlog dwell is geometric with per-slot stay probability
    p_d = qu + (1-u) = 1 - u(1-q), so the mean dwell is
    1/(1 - p_d) = 1/(u(1-q)).  When the escape probability u(1-q) is
    zero the delay is infinite and an error is raised.
    """
    if not 0.0 <= q <= 1.0:
        raise ValidationError(f"q must be in [0, 1] (got {q!r})")
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"u must be in [0, 1] (got {u!r})")
    escape = u * (1.0 - q)
    if escape == 0.0:
        raise InfiniteDelayError(
            f"backlog never escapes (q={q}, u={u}): handoff delay is infinite"
        )
    return 1.0 / escape


@dataclass(frozen=True)
class DerivedMetrics:
    """The three performance metrics plus the backlog-stay probability."""

    theta: float
    pr_collision: float
    ds: float
    p_d: float


@dataclass(frozen=True)
class AnalysisResult:
    """Everything the analytic engine produces for one parameter point."""

    params: ModelParams
    u: float
    q: float
    metrics: DerivedMetrics
    distribution: HandoffDistribution


def analyze(params: ModelParams) -> AnalysisResult:
    """Run the full analytic pipeline for one parameter point.

    Chains the three models: the occupancy chain gives u and Pr(theta);
    the contention system gives the scheme's q; the handoff chain
    (closed form when the base model applies, numeric otherwise) gives
    the metrics.  Greedy selection under homogeneous channels behaves
    like random selection with its own q — for N > 1 that q is 1, the
    backlog becomes absorbing and throughput is exactly zero, so the
    metrics path uses the base chain with the greedy q rather than the
    greedy variant structure.  An infinite handoff delay (q = 1 or
    u = 0) is reported as ds = inf rather than an error.
    """
    av = availability(PuParams(M=params.M, p=params.p, v=params.v))
    cp = ContentionParams(
        N=params.N, M=params.M, c=params.c, h=params.h, p=params.p, pr_theta=av.pr_theta
    )
    q = contention_result(cp, params.scheme).q

    chain_params = replace(params, scheme="random") if params.scheme == "greedy" else params
    escape = av.u * (1.0 - q)
    if params.s == 0.0:
        dist = _point_mass(chain_params, HandoffState(0, 0, 0))
    elif escape == 0.0:
        dist = _point_mass(chain_params, HandoffState(0, 0, 1))
    elif chain_params.t_s == chain_params.c:
        dist = closed_form_stationary(chain_params, q, av.u)
    else:
        dist = numeric_stationary(chain_params, q, av.u)

    try:
        ds = handoff_delay(q, av.u)
    except InfiniteDelayError:
        ds = math.inf
    metrics = DerivedMetrics(
        theta=throughput(dist),
        pr_collision=collision_probability(dist),
        ds=ds,
        p_d=1.0 - escape,
    )
    return AnalysisResult(params=params, u=av.u, q=q, metrics=metrics, distribution=dist)
