"""Single-qubit two-outcome generalised measurements (Kraus pairs).

A machine is a pair of 2x2 complex matrices (k_minus, k_plus) satisfying the
completeness relation K(-1)^dag K(-1) + K(+1)^dag K(+1) = I.  Emitting
symbol i from a pure state psi has probability P(i) = |K^(i) psi|^2 with
post-state K^(i) psi / sqrt(P(i)).

A machine can equivalently be specified by two orthonormal length-4 vectors
|a>, |b> on ancilla (x) memory: the measurement entangles a fresh ancilla
with the memory via |-1,-1> -> |a>, |-1,+1> -> |b> and then reads the
ancilla out projectively, which makes K^(i) = |a_i><-1| + |b_i><+1| with
a_i, b_i the ancilla-i halves of |a>, |b>.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .algebra import ORTHONORMALITY_TOL, dagger, symbol_index
from .classical import COMPLETENESS_TOL, ZERO_BRANCH_TOL
from .errors import CompletenessError, OrthonormalityError, RangeError


def _as_cmatrix(m, name: str) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class KrausPair:
    """Per-symbol measurement operators of a one-qubit output machine."""

    k_minus: np.ndarray
    k_plus: np.ndarray

    kind: ClassVar[str] = "quantum"

    def __post_init__(self):
        object.__setattr__(self, "k_minus", _as_cmatrix(self.k_minus, "k_minus"))
        object.__setattr__(self, "k_plus", _as_cmatrix(self.k_plus, "k_plus"))

    def op(self, symbol: int) -> np.ndarray:
        """Measurement operator for one outcome symbol."""
        return self.k_minus if symbol_index(symbol) == 0 else self.k_plus

    def total(self) -> np.ndarray:
        """Symbol-summed operator K(-1) + K(+1) (not an observable)."""
        return self.k_minus + self.k_plus


def qubit_state(alpha: complex, beta: complex) -> np.ndarray:
    """Pure qubit state (alpha, beta); the norm must already be 1."""
    psi = np.array([alpha, beta], dtype=np.complex128)
    nsq = float(np.sum(psi.real ** 2 + psi.imag ** 2))
    if abs(nsq - 1.0) > ORTHONORMALITY_TOL:
        raise RangeError(f"state has squared norm {nsq!r}, expected 1")
    return psi


def kraus_from_dilation(a: np.ndarray, b: np.ndarray) -> KrausPair:
    """Build the Kraus pair realised by an orthonormal dilation pair.

    a and b are length-4 complex vectors on ancilla (x) memory (ancilla
    first).  The ancilla -1 halves become the columns of k_minus and the
    ancilla +1 halves the columns of k_plus; no arithmetic beyond
    reindexing happens here.  Raises OrthonormalityError when |a>, |b> are
    not orthonormal within 1e-10.
    """
    a = np.asarray(a, dtype=np.complex128).reshape(4)
    b = np.asarray(b, dtype=np.complex128).reshape(4)
    checks = (
        ("<a|a>", abs(float(np.sum(a.real ** 2 + a.imag ** 2)) - 1.0)),
        ("<b|b>", abs(float(np.sum(b.real ** 2 + b.imag ** 2)) - 1.0)),
        ("<a|b>", abs(complex(np.sum(np.conj(a) * b)))),
    )
    for label, residual in checks:
        if residual > ORTHONORMALITY_TOL:
            raise OrthonormalityError(
                f"dilation pair violates {label} by {residual:.3e}")
    k_minus = [[a[0], b[0]], [a[1], b[1]]]
    k_plus = [[a[2], b[2]], [a[3], b[3]]]
    return KrausPair(k_minus, k_plus)


def projective_kraus(phi: float) -> KrausPair:
    """Rank-1 orthogonal projector pair measuring along angle phi.

    k_minus projects onto (cos phi, sin phi) and k_plus onto the orthogonal
    direction (sin phi, -cos phi); phi is in radians.
    """
    c, s = np.cos(phi), np.sin(phi)
    k_minus = [[c * c, c * s], [c * s, s * s]]
    k_plus = [[s * s, -c * s], [-c * s, c * c]]
    return KrausPair(k_minus, k_plus)


def validate_kraus(k: KrausPair) -> None:
    """Check the completeness relation within 1e-9.

    Raises CompletenessError with the worst column and residual of
    K(-1)^dag K(-1) + K(+1)^dag K(+1) - I.
    """
    g = dagger(k.k_minus) @ k.k_minus + dagger(k.k_plus) @ k.k_plus
    dev = np.abs(g - np.eye(2))
    col = int(np.argmax(np.max(dev, axis=0)))
    residual = float(np.max(dev))
    if residual > COMPLETENESS_TOL:
        raise CompletenessError(
            f"completeness relation violated by {residual:.3e}",
            column=col, residual=residual)


def observable_of(k: KrausPair) -> np.ndarray:
    """Outcome-weighted observable K(+1)^dag K(+1) - K(-1)^dag K(-1)."""
    return dagger(k.k_plus) @ k.k_plus - dagger(k.k_minus) @ k.k_minus


def quantum_outcome_step(k: KrausPair, psi: np.ndarray,
                         symbol: int) -> tuple[float, np.ndarray | None]:
    """Measure one symbol: return (probability, renormalised post-state).

    Callers must pass a valid machine and a unit state.  A branch with
    probability <= 1e-12 is reported as (0.0, None).
    """
    v = k.op(symbol) @ np.asarray(psi, dtype=np.complex128)
    p = float(np.sum(v.real ** 2 + v.imag ** 2))
    if p <= ZERO_BRANCH_TOL:
        return 0.0, None
    return p, v / np.sqrt(p)
