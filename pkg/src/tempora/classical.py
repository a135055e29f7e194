"""One-bit stochastic output machines (Markov and hidden-Markov).

A machine is a pair of non-negative 2x2 matrices (t_minus, t_plus), one per
output symbol.  Column x of t_minus + t_plus must be stochastic: it lists
the probabilities of every (symbol, next state) combination reachable from
internal state x.  Machine states are probability vectors
eta = (p_minus, p_plus), and emitting symbol i from eta has probability
P(i) = (1,1) . T^(i) . eta with post-state T^(i) eta / P(i).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .algebra import symbol_index
from .errors import CompletenessError, RangeError

# Allowed deviation of column sums of t_minus + t_plus from 1.
COMPLETENESS_TOL = 1e-9
# Below this probability an outcome branch is treated as impossible.
ZERO_BRANCH_TOL = 1e-12


def _as_matrix(m, name: str) -> np.ndarray:
    m = np.array(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class TransitionPair:
    """Per-symbol transition matrices of a one-bit output machine."""

    t_minus: np.ndarray
    t_plus: np.ndarray

    kind: ClassVar[str] = "classical"

    def __post_init__(self):
        object.__setattr__(self, "t_minus", _as_matrix(self.t_minus, "t_minus"))
        object.__setattr__(self, "t_plus", _as_matrix(self.t_plus, "t_plus"))

    def op(self, symbol: int) -> np.ndarray:
        """Transition matrix for one outcome symbol."""
        return self.t_minus if symbol_index(symbol) == 0 else self.t_plus

    def total(self) -> np.ndarray:
        """Symbol-summed transition matrix (column-stochastic when valid)."""
        return self.t_minus + self.t_plus


def prob_vector(p_minus: float, p_plus: float) -> np.ndarray:
    """Probability vector over the two internal states."""
    eta = np.array([p_minus, p_plus], dtype=np.float64)
    if np.any(eta < 0.0) or abs(float(eta.sum()) - 1.0) > COMPLETENESS_TOL:
        raise RangeError(f"({p_minus}, {p_plus}) is not a probability vector")
    return eta


def mm_from_params(a: float, b: float) -> TransitionPair:
    """Two-parameter Markov machine whose output equals its next state.

    a is the probability of emitting -1 from state -1, b of emitting +1 from
    state +1; both must lie in [0, 1].
    """
    for name, value in (("a", a), ("b", b)):
        if not 0.0 <= value <= 1.0:
            raise RangeError(f"parameter {name}={value} outside [0, 1]")
    t_minus = [[a, 1.0 - b], [0.0, 0.0]]
    t_plus = [[0.0, 0.0], [1.0 - a, b]]
    return TransitionPair(t_minus, t_plus)


def hmm_from_params(a: float, b: float, c: float,
                    d: float, e: float, f: float) -> TransitionPair:
    """Six-parameter hidden-Markov machine with nested parameter bounds.

    Column 0 of the pair is (a, b | c, 1-a-b-c) and column 1 is
    (d, e | f, 1-d-e-f), so the admissible ranges nest: b <= 1-a,
    c <= 1-a-b, and likewise for (d, e, f).
    """
    if not 0.0 <= a <= 1.0:
        raise RangeError(f"parameter a={a} outside [0, 1]")
    if not 0.0 <= b <= 1.0 - a:
        raise RangeError(f"parameter b={b} outside [0, {1.0 - a}]")
    if not 0.0 <= c <= 1.0 - a - b:
        raise RangeError(f"parameter c={c} outside [0, {1.0 - a - b}]")
    if not 0.0 <= d <= 1.0:
        raise RangeError(f"parameter d={d} outside [0, 1]")
    if not 0.0 <= e <= 1.0 - d:
        raise RangeError(f"parameter e={e} outside [0, {1.0 - d}]")
    if not 0.0 <= f <= 1.0 - d - e:
        raise RangeError(f"parameter f={f} outside [0, {1.0 - d - e}]")
    t_minus = [[a, d], [b, e]]
    t_plus = [[c, f], [1.0 - a - b - c, 1.0 - d - e - f]]
    return TransitionPair(t_minus, t_plus)


def validate_classical(m: TransitionPair) -> None:
    """Check entries in [0, 1] and column-stochasticity of the symbol sum.

    Raises CompletenessError carrying the offending column and residual.
    """
    for name, mat in (("t_minus", m.t_minus), ("t_plus", m.t_plus)):
        if np.any(mat < 0.0) or np.any(mat > 1.0):
            worst = float(max(np.max(-mat), np.max(mat - 1.0)))
            raise CompletenessError(
                f"{name} has entries outside [0, 1]", residual=worst)
    sums = m.total().sum(axis=0)
    residuals = np.abs(sums - 1.0)
    col = int(np.argmax(residuals))
    if residuals[col] > COMPLETENESS_TOL:
        raise CompletenessError(
            f"column {col} of t_minus + t_plus sums to {float(sums[col])!r}",
            column=col, residual=float(residuals[col]))


def classical_outcome_step(m: TransitionPair, eta: np.ndarray,
                           symbol: int) -> tuple[float, np.ndarray | None]:
    """Emit one symbol: return (probability, renormalised post-state).

    Callers must pass a valid machine and state.  A branch with probability
    <= 1e-12 is reported as (0.0, None): the outcome cannot occur and no
    post-state exists.
    """
    v = m.op(symbol) @ np.asarray(eta, dtype=np.float64)
    p = float(v[0] + v[1])
    if p <= ZERO_BRANCH_TOL:
        return 0.0, None
    return p, v / p
