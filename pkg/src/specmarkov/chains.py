"""Generic finite discrete-time Markov chain tools.

Every model in this package (the channel-occupancy chain, the saturated
contention chain, and the handoff chain) reduces to the same question:
given a row-stochastic matrix P, find the stationary distribution pi
with pi P = pi.  This module owns that question.

The solver is deliberately dense.  The largest chain at the scales used
here has a few hundred states, so an LU solve of the balance equations
is both fast and accurate.  A power-iteration route is kept as an
independent cross-check so that a bug in the linear-algebra path cannot
go unnoticed by the test suite.
"""

from __future__ import annotations

import numpy as np

#: Largest deviation of a row sum from 1 before a matrix is rejected.
ROW_SUM_TOL = 1e-12

#: Largest L-infinity defect tolerated in the balance equation pi P = pi.
BALANCE_TOL = 1e-9


class ChainError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ChainError):
    """Bad input: shapes, ranges, or a matrix that is not stochastic."""


class StructuralError(ChainError):
    """The chain itself is malformed (e.g. several recurrent classes)."""


def validate_transition_matrix(P) -> np.ndarray:
    """Check that ``P`` is a square row-stochastic matrix.

    Returns the validated matrix as a float64 array.  Raises
    :class:`ValidationError` if the matrix is not square, has entries
    outside [0, 1], or has a row whose sum deviates from 1 by more than
    ``ROW_SUM_TOL``.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"transition matrix must be square, got shape {P.shape}")
    if P.shape[0] == 0:
        raise ValidationError("transition matrix must have at least one state")
    if not np.all(np.isfinite(P)):
        raise ValidationError("transition matrix contains non-finite entries")
    if np.any(P < 0.0) or np.any(P > 1.0):
        bad = np.argwhere((P < 0.0) | (P > 1.0))[0]
        raise ValidationError(
            f"entry ({bad[0]}, {bad[1]}) = {P[bad[0], bad[1]]!r} is outside [0, 1]"
        )
    row_sums = P.sum(axis=1)
    defect = np.abs(row_sums - 1.0)
    if np.any(defect > ROW_SUM_TOL):
        i = int(np.argmax(defect))
        raise ValidationError(
            f"row {i} sums to {row_sums[i]!r}, deviating from 1 by more than {ROW_SUM_TOL}"
        )
    return P


def _reachability(P: np.ndarray) -> np.ndarray:
    """Boolean reachability closure: R[i, j] iff j is reachable from i.

    Computed by repeated squaring of the adjacency relation; every state
    is considered reachable from itself.
    """
    n = P.shape[0]
    R = (P > 0.0) | np.eye(n, dtype=bool)
    while True:
        R2 = R | (R @ R)
        if np.array_equal(R2, R):
            return R
        R = R2


def recurrent_classes(P) -> list[list[int]]:
    """Closed communicating classes of the chain.

    Each class is returned as a sorted list of state indices.  A class
    is recurrent (closed) when no state in it can reach a state outside
    it.  A finite chain always has at least one.
    """
    P = validate_transition_matrix(P)
    R = _reachability(P)
    mutual = R & R.T
    seen = np.zeros(P.shape[0], dtype=bool)
    classes = []
    for i in range(P.shape[0]):
        if seen[i]:
            continue
        members = np.flatnonzero(mutual[i])
        seen[members] = True
        reachable = np.flatnonzero(R[members].any(axis=0))
        if np.setdiff1d(reachable, members).size == 0:
            classes.append([int(m) for m in members])
    return classes


def stationary_distribution(P) -> np.ndarray:
    """Stationary distribution pi of a row-stochastic matrix.

    Solves (P^T - I) pi = 0 with one equation replaced by the
    normalization sum(pi) = 1.  The chain must have a single recurrent
    class; transient states receive probability 0.  Periodicity is
    fine — this is the stationary distribution, not a limit of powers.

    Raises :class:`StructuralError` when the chain has more than one
    recurrent class (the stationary distribution is then not unique),
    naming the states of each class.
    """
    P = validate_transition_matrix(P)
    classes = recurrent_classes(P)
    if len(classes) > 1:
        desc = "; ".join(f"class {i}: states {c}" for i, c in enumerate(classes))
        raise StructuralError(
            f"chain has {len(classes)} recurrent classes, stationary distribution "
            f"is not unique ({desc})"
        )
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        # The replaced-row system can degenerate even with a unique
        # recurrent class; fall back to least squares on the full
        # overdetermined system, which is still deterministic.
        A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        pi = np.linalg.lstsq(A, b, rcond=None)[0]
    return _finish(pi, P)


def stationary_distribution_power(P, doublings: int = 60) -> np.ndarray:
    """Stationary distribution via repeated squaring of (P + I)/2.

    Independent cross-check for :func:`stationary_distribution`.  The
    lazy half-step mixture removes periodicity without changing the
    stationary distribution; after ``doublings`` squarings the matrix
    rows all equal pi to machine precision for any reasonably mixing
    chain.  Rows are renormalized after each squaring to stop drift.
    """
    P = validate_transition_matrix(P)
    n = P.shape[0]
    Q = (P + np.eye(n)) / 2.0
    for _ in range(doublings):
        Q = Q @ Q
        Q /= Q.sum(axis=1, keepdims=True)
    pi = Q.mean(axis=0)
    return _finish(pi, P)


def _finish(pi: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Clamp solver dust, renormalize, and verify the balance equation."""
    if np.any(pi < -1e-9):
        raise ChainError(f"solver produced a significantly negative mass {pi.min()!r}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    defect = np.max(np.abs(pi @ P - pi))
    if defect > BALANCE_TOL:
        raise ChainError(
            f"stationary solve failed: balance defect {defect!r} exceeds {BALANCE_TOL}"
        )
    return pi
