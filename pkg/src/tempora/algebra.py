"""Small real/complex array helpers shared by the machine modules.

Conventions used throughout the package:

* dichotomic outcomes are the symbols -1 and +1; index 0 holds the -1
  component of any length-2 vector and index 1 the +1 component;
* length-4 complex vectors live in the ancilla (x) memory product space with
  basis order (-1,-1), (-1,+1), (+1,-1), (+1,+1), ancilla first, so the
  ancilla outcome selects the upper or lower half.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateInput

SYMBOLS = (-1, +1)

# Below this norm a vector is considered zero for orthonormalization.
DEGENERACY_TOL = 1e-12
# Allowed deviation of inner products from exact orthonormality.
ORTHONORMALITY_TOL = 1e-10


def symbol_index(symbol: int) -> int:
    """Map an outcome symbol -1/+1 to its array index 0/1."""
    if symbol == -1:
        return 0
    if symbol == 1:
        return 1
    raise ValueError(f"outcome symbol must be -1 or +1, got {symbol!r}")


def ket2(symbol: int) -> np.ndarray:
    """Basis state of a single bit/qubit for the given outcome symbol."""
    v = np.zeros(2, dtype=np.complex128)
    v[symbol_index(symbol)] = 1.0
    return v


def ket4(ancilla: int, memory: int) -> np.ndarray:
    """Product basis state |ancilla, memory> in the length-4 ordering."""
    v = np.zeros(4, dtype=np.complex128)
    v[2 * symbol_index(ancilla) + symbol_index(memory)] = 1.0
    return v


def mat_apply(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product m @ v."""
    return np.asarray(m) @ np.asarray(v)


def norm_sq(v: np.ndarray) -> float:
    """Squared Euclidean norm, real and non-negative."""
    v = np.asarray(v)
    return float(np.sum(v.real ** 2 + v.imag ** 2)) if np.iscomplexobj(v) \
        else float(np.sum(v ** 2))


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def orthonormalize_pair(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt an (unnormalised) pair into an orthonormal pair (a, b).

    a = u/|u|, b = (v - <a|v> a) normalised.  Raises DegenerateInput when
    |u| < 1e-12 or when the residual of v after projection is shorter than
    1e-12 (v parallel to u, or zero).
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    nu = np.sqrt(np.sum(u.real ** 2 + u.imag ** 2))
    if nu < DEGENERACY_TOL:
        raise DegenerateInput(f"first vector norm {nu:.3e} below {DEGENERACY_TOL}")
    a = u / nu
    w = v - np.sum(np.conj(a) * v) * a
    nw = np.sqrt(np.sum(w.real ** 2 + w.imag ** 2))
    if nw < DEGENERACY_TOL:
        raise DegenerateInput(f"residual norm {nw:.3e} below {DEGENERACY_TOL}")
    return a, w / nw
