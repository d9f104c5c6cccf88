"""Secondary-user contention: how often do two SU pairs pick the same channel?

When a slot leaves theta channels idle and n1 backlogged SU pairs each
grab one, collisions among SUs are decided by pure combinatorics.  The
selection outcome is an occupancy vector: theta nonnegative integers
summing to n1 (how many pairs landed on each idle channel).  A pair
transmits only if its channel's coordinate is exactly 1.

This module computes, for the random-selection scheme,

* ``s_count(n1, theta, d)`` — the number of occupancy vectors in which
  exactly d pairs end up alone on their channel, via a subtractive
  recursion over generalized binomial coefficients, with
  ``s_count_oracle`` as an independent brute-force enumeration;
* ``t_access`` — the probability that d of the n1 pairs gain access,
  treating all C(theta + n1 - 1, n1) occupancy vectors as equally
  likely;
* the saturated "system chain" over (n1 backlogged, n3 collided-with-PU)
  populations, whose stationary distribution yields the backlog
  distribution rho and finally the SU-SU collision probability q.

Greedy selection makes every simultaneous attempt collide (all pairs
deterministically pick the same "best" channel), so q = 1 for N > 1 and
0 for a lone pair.  A pseudo-random shared sequence hands distinct
channels to simultaneous attempters, so q = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .chains import StructuralError, ValidationError, stationary_distribution

SCHEMES = ("random", "greedy", "pseudorandom")

#: Enumeration limit for the brute-force oracle.
ORACLE_BOUND = 8


def validate_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ValidationError(f"scheme must be one of {SCHEMES} (got {scheme!r})")
    return scheme


def gen_binomial(a: int, b: int) -> int:
    """Generalized binomial coefficient C(a, b) as a falling factorial.

    Defined for any integer ``a`` (including negative) and integer
    ``b``:

    * ``b < 0``  -> 0
    * ``b == 0`` -> 1 (empty product, so C(-1, 0) = 1)
    * otherwise  -> a (a-1) ... (a-b+1) / b!, which is 0 whenever the
      falling factorial crosses zero (e.g. C(2, 3) = 0).

    Exact integer arithmetic throughout — the subtractive recursion in
    :func:`s_count` would be unusable in floating point.
    """
    if b < 0:
        return 0
    if b == 0:
        return 1
    num = 1
    for i in range(b):
        num *= a - i
    return num // math.factorial(b)


def u_count(n1: int, theta: int, d: int) -> int:
    """Occupancy vectors counted with multiplicity for d marked singletons.

    U_d(n1, theta) counts the ways to mark d of the theta channels as
    singletons (each carrying exactly one of the n1 pairs) and distribute
    the remaining n1 - d pairs freely over the channels:

        U_d = C(theta, d) * C(theta + n1 - 2d - 1, n1 - d)

    A vector with exactly k >= d singletons is counted C(k, d) times, so
    U_d = sum_k C(k, d) S_k, which is what the recursion in
    :func:`s_count` inverts.  With the generalized-binomial conventions
    the boundary d = n1 works out: U_{n1}(2, 2) = C(2, 2) C(-1, 0) = 1.
    """
    return gen_binomial(theta, d) * gen_binomial(theta + n1 - 2 * d - 1, n1 - d)


@lru_cache(maxsize=None)
def s_count(n1: int, theta: int, d: int) -> int:
    """Number of occupancy vectors with exactly d singleton channels.

    Counts the vectors (x_1, ..., x_theta) of nonnegative integers with
    sum n1 in which exactly d coordinates equal 1 — i.e. exactly d of
    the n1 simultaneously selecting pairs get a channel to themselves.

    Computed top-down from d = n1 by the inclusion-exclusion recursion

        S_d = U_d - U_{d+1} - sum_{i=1}^{n1-d} [C(d+i, d) - C(d+i, d+1)] S_{d+i}

    with U_{n1+1} = 0, in exact integer arithmetic (memoized).  Checked
    exhaustively against :func:`s_count_oracle` in the tests.
    """
    if d == n1:
        return u_count(n1, theta, n1)
    acc = u_count(n1, theta, d) - u_count(n1, theta, d + 1)
    for i in range(1, n1 - d + 1):
        coeff = gen_binomial(d + i, d) - gen_binomial(d + i, d + 1)
        if coeff:
            acc -= coeff * s_count(n1, theta, d + i)
    return acc


def s_count_oracle(n1: int, theta: int, d: int) -> int:
    """Brute-force version of :func:`s_count` by exhaustive enumeration.

    Walks every occupancy vector of n1 pairs over theta channels (stars
    and bars: each choice of theta - 1 bar positions among
    n1 + theta - 1 symbols is one vector) and counts those with exactly
    d coordinates equal to 1.  Intentionally independent of the
    recursion so the two can check each other.

    Bounded to n1, theta <= 8 — beyond that the enumeration is
    pointless for testing and slow.
    """
    if n1 > ORACLE_BOUND or theta > ORACLE_BOUND:
        raise ValidationError(
            f"oracle enumeration is limited to n1, theta <= {ORACLE_BOUND} "
            f"(got n1={n1}, theta={theta})"
        )
    if n1 < 0 or theta < 0:
        raise ValidationError("n1 and theta must be nonnegative")
    if theta == 0:
        return 1 if (n1 == 0 and d == 0) else 0
    count = 0
    symbols = n1 + theta - 1
    for bars in combinations(range(symbols), theta - 1):
        singles = 0
        prev = -1
        for b in (*bars, symbols):
            if b - prev - 1 == 1:
                singles += 1
            prev = b
        if singles == d:
            count += 1
    return count


def t_access(n1: int, theta: int, d: int) -> float:
    """Probability that exactly d of n1 selecting pairs gain channel access.

    All C(theta + n1 - 1, n1) occupancy vectors are taken as equally
    likely, so T_d = S_d / C(theta + n1 - 1, n1).  With no idle channel
    (theta = 0) nobody accesses: T_0 = 1 and T_d = 0 for d > 0.
    """
    if theta == 0:
        return 1.0 if d == 0 else 0.0
    return s_count(n1, theta, d) / math.comb(theta + n1 - 1, n1)


def binomial_pmf(n: int, k: int, r: float) -> float:
    """Standard binomial pmf C(n, k) r^k (1-r)^(n-k)."""
    return math.comb(n, k) * r**k * (1.0 - r) ** (n - k)


@dataclass(frozen=True)
class ContentionParams:
    """Inputs of the saturated contention system.

    N: number of SU pairs; M: number of channels; c: slots per frame;
    h: frames per packet; p: per-slot PU arrival probability;
    pr_theta: distribution of the idle-channel count theta (length
    M + 1), from :func:`specmarkov.occupancy.availability`.

    Packets are fixed-length, so the per-slot completion probability is
    sigma = 1/(c h) and the per-slot frame-end probability is p_f = 1/c.
    """

    N: int
    M: int
    c: int
    h: int
    p: float
    pr_theta: np.ndarray

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValidationError(f"N must be an integer >= 1 (got {self.N!r})")
        if not isinstance(self.M, int) or self.M < 1:
            raise ValidationError(f"M must be an integer >= 1 (got {self.M!r})")
        if not isinstance(self.c, int) or self.c < 1:
            raise ValidationError(f"c must be an integer >= 1 (got {self.c!r})")
        if not isinstance(self.h, int) or self.h < 1:
            raise ValidationError(f"h must be an integer >= 1 (got {self.h!r})")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must be in [0, 1] (got {self.p!r})")
        pr = np.asarray(self.pr_theta, dtype=float)
        if pr.shape != (self.M + 1,):
            raise ValidationError(
                f"pr_theta must have length M + 1 = {self.M + 1} (got shape {pr.shape})"
            )
        if np.any(pr < 0.0) or abs(pr.sum() - 1.0) > 1e-9:
            raise ValidationError("pr_theta must be a probability vector")
        object.__setattr__(self, "pr_theta", pr)

    @property
    def sigma(self) -> float:
        return 1.0 / (self.c * self.h)

    @property
    def p_f(self) -> float:
        return 1.0 / self.c


@dataclass(frozen=True)
class ContentionResult:
    """Solved contention system: stationary pi, backlog distribution, q."""

    pi: np.ndarray
    rho: np.ndarray
    q: float


def state_index(N: int, n1: int, n3: int) -> int:
    """Flatten a population state (n1 backlogged, n3 collided) to an index.

    States with n1 + n3 <= N are laid out as
    m = (2N - n1 + 3) n1 / 2 + n3, giving (N+1)(N+2)/2 states total; for
    N = 1 the order is (0,0) -> 0, (0,1) -> 1, (1,0) -> 2.
    """
    return (2 * N - n1 + 3) * n1 // 2 + n3


def system_chain(params: ContentionParams) -> np.ndarray:
    """Transition matrix of the saturated (backlogged, collided) populations.

    State (n1, n3) has n2 = N - n1 - n3 pairs transmitting.  In one slot:

    * d of the n1 backlogged pairs gain access (T_d, averaged over
      theta with weights pr_theta);
    * w of the n2 transmitting pairs complete their packet (binomial
      with sigma) and, saturated, go straight back to backlog;
    * r of the remaining n2 - w transmitting pairs are hit by a PU
      arrival (binomial with p) and join the collided group;
    * e of the n3 collided pairs reach their frame end (binomial with
      p_f), discover the collision, and return to backlog.

    The next state is (n1 - d + w + e, n3 - e + r).  Rows sum to one by
    the law of total probability; a defect beyond the row-sum tolerance
    means the index bookkeeping is broken, and is raised as a
    structural error.
    """
    N, p = params.N, params.p
    sigma, p_f = params.sigma, params.p_f
    n_states = (N + 1) * (N + 2) // 2
    H = np.zeros((n_states, n_states))
    pr_theta = params.pr_theta

    for n1 in range(N + 1):
        for n3 in range(N + 1 - n1):
            n2 = N - n1 - n3
            m = state_index(N, n1, n3)
            x_w = [binomial_pmf(n2, w, sigma) for w in range(n2 + 1)]
            z_e = [binomial_pmf(n3, e, p_f) for e in range(n3 + 1)]
            for theta in range(params.M + 1):
                weight = pr_theta[theta]
                if weight == 0.0:
                    continue
                for d in range(n1 + 1):
                    td = t_access(n1, theta, d) * weight
                    if td == 0.0:
                        continue
                    for w in range(n2 + 1):
                        xw = x_w[w] * td
                        if xw == 0.0:
                            continue
                        for r in range(n2 - w + 1):
                            yr = binomial_pmf(n2 - w, r, p) * xw
                            if yr == 0.0:
                                continue
                            for e in range(n3 + 1):
                                prob = z_e[e] * yr
                                if prob == 0.0:
                                    continue
                                m2 = state_index(N, n1 - d + w + e, n3 - e + r)
                                H[m, m2] += prob

    defect = np.max(np.abs(H.sum(axis=1) - 1.0))
    if defect > 1e-12:
        raise StructuralError(
            f"system chain rows deviate from stochastic by {defect!r}; "
            "index composition is broken"
        )
    return H


def contention_result(params: ContentionParams, scheme: str = "random") -> ContentionResult:
    """Backlog distribution and SU-SU collision probability for a scheme.

    The saturated system chain is solved for pi, aggregated to the
    backlog distribution rho_k = Pr(k pairs backlogged).  For random
    selection,

        q = sum_theta sum_{k>=2} [(k-1)/(theta+k-2)] rho_k Pr(theta),

    the probability that a tagged backlogged pair's selection collides
    with a peer's (the k = 1 term is zero: no peer, no collision, which
    also settles the 0/0 at theta = 1).  Greedy selection collides
    deterministically whenever two pairs attempt together (q = 1 for
    N > 1, else 0); the pseudo-random sequence never collides (q = 0).

    pi and rho always describe the randomized-selection saturated
    system, which is what defines the contention geometry; only q is
    scheme-specific.
    """
    validate_scheme(scheme)
    H = system_chain(params)
    pi = stationary_distribution(H)
    N = params.N
    rho = np.zeros(N + 1)
    for n1 in range(N + 1):
        base = state_index(N, n1, 0)
        rho[n1] = pi[base : base + N - n1 + 1].sum()

    if scheme == "greedy":
        q = 0.0 if N == 1 else 1.0
    elif scheme == "pseudorandom":
        q = 0.0
    else:
        q = 0.0
        for theta in range(1, params.M + 1):
            pt = params.pr_theta[theta]
            if pt == 0.0:
                continue
            for k in range(2, N + 1):
                q += (k - 1) / (theta + k - 2) * rho[k] * pt
    return ContentionResult(pi=pi, rho=rho, q=float(q))
