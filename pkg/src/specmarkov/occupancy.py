"""Primary-user channel occupancy model.

Each of the M licensed channels carries an independent ON/OFF primary
user: an idle channel turns busy with probability p per slot (a packet
arrival), and a busy channel is released with probability v per slot
(transmission complete), where 1/v is the mean PU packet length in
slots.  Within a slot boundary, completions happen before new arrivals,
so a channel that finishes can be re-occupied in the very next slot.

The number of busy channels is itself a Markov chain on {0, ..., M};
its stationary distribution g gives the availability quantities the
secondary users care about: u, the probability that at least one
channel is idle, and Pr(theta), the distribution of the idle-channel
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import ValidationError, stationary_distribution


@dataclass(frozen=True)
class PuParams:
    """Primary-user traffic parameters.

    M: number of licensed channels (>= 1).
    p: per-slot, per-channel PU packet arrival probability, in [0, 1].
    v: per-slot PU completion probability, in (0, 1]; mean packet
       length is 1/v slots.
    """

    M: int
    p: float
    v: float

    def __post_init__(self):
        if not isinstance(self.M, int) or self.M < 1:
            raise ValidationError(f"M must be an integer >= 1 (got {self.M!r})")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must be in [0, 1] (got {self.p!r})")
        if not 0.0 < self.v <= 1.0:
            raise ValidationError(f"v must be in (0, 1] (got {self.v!r})")


@dataclass(frozen=True)
class Availability:
    """What a secondary user sees of the licensed band.

    u: probability that at least one channel is idle in a slot.
    pr_theta: length M+1 vector; pr_theta[theta] is the stationary
       probability of exactly theta idle channels (= g[M - theta]).
    """

    u: float
    pr_theta: np.ndarray


def _binom_pmf(n: int, k: int, r: float) -> float:
    return math.comb(n, k) * r**k * (1.0 - r) ** (n - k)


def off_pmf(p: float, n: int) -> float:
    """Probability that a channel's OFF period lasts exactly n further slots.

    The OFF duration is geometric: each slot the channel stays idle with
    probability 1-p, so Pr(N_off = n) = p (1-p)^n for n >= 0.
    """
    if not 0.0 < p <= 1.0:
        raise ValidationError(
            f"off_pmf requires p in (0, 1] (got {p!r}); at p = 0 the OFF period never ends"
        )
    if not isinstance(n, int) or n < 0:
        raise ValidationError(f"off_pmf requires an integer n >= 0 (got {n!r})")
    return p * (1.0 - p) ** n


def build_pu_chain(params: PuParams) -> np.ndarray:
    """One-step transition matrix of the busy-channel-count chain.

    Entry (a, b) is the probability of moving from a busy channels to b.
    In one slot, l of the a busy channels complete (binomially with
    success probability v), leaving M - a + l idle channels of which
    m = b - a + l acquire new arrivals (binomially with probability p).
    """
    M = params.M
    P = np.zeros((M + 1, M + 1))
    for a in range(M + 1):
        for b in range(M + 1):
            total = 0.0
            for l in range(a + 1):
                m = b - a + l
                idle = M - a + l
                if 0 <= m <= idle:
                    total += _binom_pmf(a, l, params.v) * _binom_pmf(idle, m, params.p)
            P[a, b] = total
    return P


def busy_fraction(params: PuParams) -> float:
    """Stationary probability that a single channel is busy.

    From the per-channel two-state balance: idle->busy with p,
    busy->idle with v(1-p), giving p / (p + v(1-p)).
    """
    return params.p / (params.p + params.v * (1.0 - params.p))


def availability(params: PuParams) -> Availability:
    """Solve the occupancy chain and report u and Pr(theta).

    g is the stationary distribution over the busy-channel count;
    u = sum of g[0..M-1] (at least one channel idle) and
    pr_theta[theta] = g[M - theta].
    """
    g = stationary_distribution(build_pu_chain(params))
    u = float(g[: params.M].sum())
    pr_theta = g[::-1].copy()
    return Availability(u=u, pr_theta=pr_theta)
