"""Batch machine generation and scoring over trial arrays.

Everything here is plain vectorized numpy over a 1-d array of trial indices;
the scalar sampling entry point (sample_machine) shares the same draw layout
and parameter formulas, so a batch row equals the machine the scalar path
produces for that (seed, trial, slot).

A machine batch is an ndarray of shape (2, 2, 2, n): axis 0 is the outcome
symbol (0 -> -1, 1 -> +1), axes 1-2 the matrix, axis 3 the trial.  Classical
batches are float64, quantum batches complex128.
"""
from __future__ import annotations

import numpy as np

from . import rng
from .algebra import DEGENERACY_TOL, orthonormalize_pair
from .chsh import RENORM_TOL
from .classical import TransitionPair, mm_from_params, hmm_from_params
from .errors import DegenerateInput, SamplingError
from .quantum import KrausPair, kraus_from_dilation, projective_kraus

KINDS = ("mm", "hmm", "hqmm", "hqmm-proj")

# Resampling attempts for a degenerate Gaussian draw: 1 initial + 16 retries.
MAX_ATTEMPTS = 17


def is_quantum_kind(kind: str) -> bool:
    return kind in ("hqmm", "hqmm-proj")


def check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def hmm_params_from_uniforms(u: np.ndarray) -> tuple:
    """Nested-uniform six-parameter map; u has shape (..., 6) in [0,1)."""
    a = u[..., 0]
    b = (1.0 - a) * u[..., 1]
    c = (1.0 - a - b) * u[..., 2]
    d = u[..., 3]
    e = (1.0 - d) * u[..., 4]
    f = (1.0 - d - e) * u[..., 5]
    return a, b, c, d, e, f


def sample_machine(kind: str, stream: rng.Stream):
    """Draw one machine of the given kind from a counter stream.

    mm: a, b ~ U[0,1].  hmm: nested-uniform over the six parameters.  hqmm:
    two standard-complex-Gaussian 4-vectors, orthonormalized, as a dilation
    pair (redrawn on degeneracy, at most 16 retries, then SamplingError).
    hqmm-proj: phi ~ U[0, 2*pi).  Deterministic in (seed, trial, slot).
    """
    check_kind(kind)
    if kind == "mm":
        u = stream.uniforms(2)
        return mm_from_params(float(u[0]), float(u[1]))
    if kind == "hmm":
        a, b, c, d, e, f = hmm_params_from_uniforms(stream.uniforms(6))
        return hmm_from_params(float(a), float(b), float(c),
                               float(d), float(e), float(f))
    if kind == "hqmm-proj":
        phi = (2.0 * np.pi) * float(stream.uniforms(1)[0])
        return projective_kraus(phi)
    for attempt in range(MAX_ATTEMPTS):
        z = stream.normals(16, attempt=attempt)
        u = z[0:8:2] + 1j * z[1:8:2]
        v = z[8::2] + 1j * z[9::2]
        try:
            a, b = orthonormalize_pair(u, v)
        except DegenerateInput:
            continue
        return kraus_from_dilation(a, b)
    raise SamplingError(
        f"no usable dilation pair after {MAX_ATTEMPTS} attempts "
        f"(seed={stream.seed}, trial={stream.trial}, slot={stream.slot})")


def _slot_counters(trials: np.ndarray, slot: int, n_draws: int) -> np.ndarray:
    base = (trials.astype(np.uint64) * np.uint64(rng.TRIAL_STRIDE)
            + np.uint64(slot * rng.SLOT_STRIDE))
    return base[:, None] + np.arange(n_draws, dtype=np.uint64)[None, :]


def machines_batch(kind: str, seed: int, trials: np.ndarray,
                   slot: int) -> np.ndarray:
    """Machine batch of shape (2, 2, 2, n) for one slot of many trials."""
    check_kind(kind)
    trials = np.asarray(trials)
    n = trials.shape[0]
    if kind == "mm":
        u = rng.uniform01(seed, _slot_counters(trials, slot, 2))
        a, b = u[:, 0], u[:, 1]
        m = np.zeros((2, 2, 2, n))
        m[0, 0, 0] = a
        m[0, 0, 1] = 1.0 - b
        m[1, 1, 0] = 1.0 - a
        m[1, 1, 1] = b
        return m
    if kind == "hmm":
        u = rng.uniform01(seed, _slot_counters(trials, slot, 6))
        a, b, c, d, e, f = hmm_params_from_uniforms(u)
        m = np.empty((2, 2, 2, n))
        m[0, 0, 0] = a
        m[0, 0, 1] = d
        m[0, 1, 0] = b
        m[0, 1, 1] = e
        m[1, 0, 0] = c
        m[1, 0, 1] = f
        m[1, 1, 0] = 1.0 - a - b - c
        m[1, 1, 1] = 1.0 - d - e - f
        return m
    if kind == "hqmm-proj":
        u = rng.uniform01(seed, _slot_counters(trials, slot, 1))
        phi = (2.0 * np.pi) * u[:, 0]
        c, s = np.cos(phi), np.sin(phi)
        m = np.empty((2, 2, 2, n), dtype=np.complex128)
        m[0, 0, 0] = c * c
        m[0, 0, 1] = c * s
        m[0, 1, 0] = c * s
        m[0, 1, 1] = s * s
        m[1, 0, 0] = s * s
        m[1, 0, 1] = -c * s
        m[1, 1, 0] = -c * s
        m[1, 1, 1] = c * c
        return m
    return _hqmm_batch(seed, trials, slot)


def _hqmm_batch(seed: int, trials: np.ndarray, slot: int) -> np.ndarray:
    z = rng.normals(seed, _slot_counters(trials, slot, 16))
    u = z[:, 0:8:2] + 1j * z[:, 1:8:2]
    v = z[:, 8::2] + 1j * z[:, 9::2]
    nu = np.sqrt(np.sum(u.real ** 2 + u.imag ** 2, axis=1))
    bad_u = nu < DEGENERACY_TOL
    a = u / np.where(bad_u, 1.0, nu)[:, None]
    w = v - np.sum(np.conj(a) * v, axis=1)[:, None] * a
    nw = np.sqrt(np.sum(w.real ** 2 + w.imag ** 2, axis=1))
    bad = bad_u | (nw < DEGENERACY_TOL)
    b = w / np.where(bad, 1.0, nw)[:, None]

    n = trials.shape[0]
    m = np.empty((2, 2, 2, n), dtype=np.complex128)
    # k_minus columns are the ancilla -1 halves, k_plus the +1 halves.
    m[0, 0, 0] = a[:, 0]
    m[0, 0, 1] = b[:, 0]
    m[0, 1, 0] = a[:, 1]
    m[0, 1, 1] = b[:, 1]
    m[1, 0, 0] = a[:, 2]
    m[1, 0, 1] = b[:, 2]
    m[1, 1, 0] = a[:, 3]
    m[1, 1, 1] = b[:, 3]
    for idx in np.nonzero(bad)[0]:
        k = sample_machine("hqmm", rng.Stream(seed, int(trials[idx]), slot))
        m[0, :, :, idx] = k.k_minus
        m[1, :, :, idx] = k.k_plus
    return m


def initial_state_batch(kind: str, seed: int, trials: np.ndarray,
                        random_initial: bool) -> np.ndarray | None:
    """Per-trial initial states, or None for the fixed (1, 0) default."""
    if not random_initial:
        return None
    trials = np.asarray(trials)
    if is_quantum_kind(kind):
        z = rng.normals(seed, _slot_counters(trials, rng.SLOT_INITIAL, 4))
        psi = np.stack([z[:, 0] + 1j * z[:, 1], z[:, 2] + 1j * z[:, 3]])
        norm = np.sqrt(np.sum(psi.real ** 2 + psi.imag ** 2, axis=0))
        # A zero draw has ~1e-300 probability; pin it to the basis state.
        bad = norm < DEGENERACY_TOL
        psi[:, bad] = np.array([[1.0], [0.0]])
        return psi / np.where(bad, 1.0, norm)[None, :]
    u = rng.uniform01(seed, _slot_counters(trials, rng.SLOT_INITIAL, 1))[:, 0]
    return np.stack([u, 1.0 - u])


def machine_from_batch(m: np.ndarray, idx: int):
    """Materialise one machine object from a batch column."""
    if np.iscomplexobj(m):
        return KrausPair(m[0, :, :, idx], m[1, :, :, idx])
    return TransitionPair(m[0, :, :, idx], m[1, :, :, idx])


def _apply(m: np.ndarray, v0: np.ndarray, v1: np.ndarray):
    """2x2 batch matrix times batch vector."""
    return m[0, 0] * v0 + m[0, 1] * v1, m[1, 0] * v0 + m[1, 1] * v1


def _mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(2,2,n) @ (2,2,n) batch matrix product."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=a.dtype)
    out[0, 0] = a[0, 0] * b[0, 0] + a[0, 1] * b[1, 0]
    out[0, 1] = a[0, 0] * b[0, 1] + a[0, 1] * b[1, 1]
    out[1, 0] = a[1, 0] * b[0, 0] + a[1, 1] * b[1, 0]
    out[1, 1] = a[1, 0] * b[0, 1] + a[1, 1] * b[1, 1]
    return out


def _mat_pow(m: np.ndarray, t: int) -> np.ndarray:
    """Batch matrix power by squaring; t >= 1."""
    result = None
    base = m
    while True:
        if t & 1:
            result = base if result is None else _mat_mul(result, base)
        t >>= 1
        if t == 0:
            return result
        base = _mat_mul(base, base)


def _pair_expectation(first: np.ndarray, second: np.ndarray,
                      psi: np.ndarray | None, mid: np.ndarray | None,
                      renorm: bool) -> np.ndarray:
    """Batch expectation of the outcome product, first machine measured first."""
    quantum = np.iscomplexobj(first)
    p = [[None, None], [None, None]]
    for i in (0, 1):
        if psi is None:
            v0, v1 = first[i, 0, 0], first[i, 1, 0]  # column against (1, 0)
        else:
            v0, v1 = _apply(first[i], psi[0], psi[1])
        if mid is not None:
            v0, v1 = _apply(mid, v0, v1)
        for j in (0, 1):
            w0, w1 = _apply(second[j], v0, v1)
            if quantum:
                p[i][j] = w0.real ** 2 + w0.imag ** 2 + w1.real ** 2 + w1.imag ** 2
            else:
                p[i][j] = w0 + w1
    if renorm:
        total = p[0][0] + p[0][1] + p[1][0] + p[1][1]
        div = np.where(np.abs(total - 1.0) > RENORM_TOL, total, 1.0)
        div = np.where(div == 0.0, 1.0, div)
        return (p[0][0] - p[0][1] - p[1][0] + p[1][1]) / div
    return p[0][0] - p[0][1] - p[1][0] + p[1][1]


def _dagger_mul(g: np.ndarray) -> np.ndarray:
    """Batch K^dag K for one (2,2,n) operator."""
    out = np.empty(g.shape, dtype=g.dtype)
    out[0, 0] = np.conj(g[0, 0]) * g[0, 0] + np.conj(g[1, 0]) * g[1, 0]
    out[0, 1] = np.conj(g[0, 0]) * g[0, 1] + np.conj(g[1, 0]) * g[1, 1]
    out[1, 0] = np.conj(g[0, 1]) * g[0, 0] + np.conj(g[1, 1]) * g[1, 0]
    out[1, 1] = np.conj(g[0, 1]) * g[0, 1] + np.conj(g[1, 1]) * g[1, 1]
    return out


def _pair_expectation_channel(first: np.ndarray, second: np.ndarray,
                              psi: np.ndarray | None, charlie: np.ndarray,
                              t: int) -> np.ndarray:
    """Batch expectation with the intermediary acting as a Kraus channel."""
    gram = (_dagger_mul(second[0]), _dagger_mul(second[1]))
    e = None
    for i in (0, 1):
        if psi is None:
            v0, v1 = first[i, 0, 0], first[i, 1, 0]
        else:
            v0, v1 = _apply(first[i], psi[0], psi[1])
        rho = np.empty((2, 2) + v0.shape, dtype=np.complex128)
        rho[0, 0] = v0 * np.conj(v0)
        rho[0, 1] = v0 * np.conj(v1)
        rho[1, 0] = v1 * np.conj(v0)
        rho[1, 1] = v1 * np.conj(v1)
        for _ in range(t):
            km, kp = charlie[0], charlie[1]
            rho = (_mat_mul_dag(_mat_mul(km, rho), km)
                   + _mat_mul_dag(_mat_mul(kp, rho), kp))
        for j in (0, 1):
            g = gram[j]
            p = (g[0, 0] * rho[0, 0] + g[0, 1] * rho[1, 0]
                 + g[1, 0] * rho[0, 1] + g[1, 1] * rho[1, 1]).real
            term = p if i == j else -p
            e = term if e is None else e + term
    return e


def _mat_mul_dag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(2,2,n) batch product a @ b^dag."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.complex128)
    out[0, 0] = a[0, 0] * np.conj(b[0, 0]) + a[0, 1] * np.conj(b[0, 1])
    out[0, 1] = a[0, 0] * np.conj(b[1, 0]) + a[0, 1] * np.conj(b[1, 1])
    out[1, 0] = a[1, 0] * np.conj(b[0, 0]) + a[1, 1] * np.conj(b[0, 1])
    out[1, 1] = a[1, 0] * np.conj(b[1, 0]) + a[1, 1] * np.conj(b[1, 1])
    return out


def _correlators(machines: list[np.ndarray], psi: np.ndarray | None,
                 mode: str, mid: np.ndarray | None = None,
                 renorm: bool = False,
                 channel_t: int | None = None,
                 charlie: np.ndarray | None = None) -> list[np.ndarray]:
    """The four batch correlators c11, c12, c21, c22."""
    a1, a2, b1, b2 = machines

    def pair(first, second):
        if channel_t is not None:
            return _pair_expectation_channel(first, second, psi, charlie, channel_t)
        return _pair_expectation(first, second, psi, mid, renorm)

    cs = []
    for an in (a1, a2):
        for bm in (b1, b2):
            if mode == "a-first":
                cs.append(pair(an, bm))
            elif mode == "b-first":
                cs.append(pair(bm, an))
            else:
                cs.append(0.5 * (pair(an, bm) + pair(bm, an)))
    return cs


def _select_scores(cs: list[np.ndarray], convention: str) -> np.ndarray:
    total = cs[0] + cs[1] + cs[2] + cs[3]
    if convention == "canonical":
        return np.abs(total - 2.0 * cs[3])
    return np.maximum.reduce([np.abs(total - 2.0 * c) for c in cs])


def batch_scores(kind: str, seed: int, trials: np.ndarray,
                 mode: str = "symmetrized", convention: str = "canonical",
                 random_initial: bool = False) -> np.ndarray:
    """Selected CHSH score per trial at zero delay."""
    trials = np.asarray(trials)
    machines = [machines_batch(kind, seed, trials, slot)
                for slot in (rng.SLOT_ALICE1, rng.SLOT_ALICE2,
                             rng.SLOT_BOB1, rng.SLOT_BOB2)]
    psi = initial_state_batch(kind, seed, trials, random_initial)
    cs = _correlators(machines, psi, mode)
    return _select_scores(cs, convention)


def batch_delay_scores(kind: str, seed: int, trials: np.ndarray,
                       t_list: tuple[int, ...],
                       quantum_mode: str = "vector-sum",
                       mode: str = "symmetrized",
                       convention: str = "canonical",
                       random_initial: bool = False) -> np.ndarray:
    """Selected scores per (t, trial); machines are reused across t."""
    trials = np.asarray(trials)
    machines = [machines_batch(kind, seed, trials, slot)
                for slot in (rng.SLOT_ALICE1, rng.SLOT_ALICE2,
                             rng.SLOT_BOB1, rng.SLOT_BOB2)]
    charlie = machines_batch(kind, seed, trials, rng.SLOT_CHARLIE)
    psi = initial_state_batch(kind, seed, trials, random_initial)
    quantum = is_quantum_kind(kind)
    use_channel = quantum and quantum_mode == "channel"
    total = charlie[0] + charlie[1]

    out = np.empty((len(t_list), trials.shape[0]))
    for row, t in enumerate(t_list):
        if t == 0:
            cs = _correlators(machines, psi, mode)
        elif use_channel:
            cs = _correlators(machines, psi, mode,
                              channel_t=int(t), charlie=charlie)
        else:
            mid = _mat_pow(total, int(t))
            cs = _correlators(machines, psi, mode, mid=mid,
                              renorm=quantum)
        out[row] = _select_scores(cs, convention)
    return out
