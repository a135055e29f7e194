"""Sequential CHSH correlators and scores for one-bit/one-qubit machines.

Two parties each hold two machines of the same kind.  A trial prepares a
shared initial state, lets one party's chosen machine emit an outcome, then
the other's, and correlates the two outcomes.  The four basis combinations
give the correlator matrix c_nm, and the score is the magnitude of a signed
sum with a single minus sign:

* s_canonical puts the minus on c22 (the fixed sign pattern);
* s_max takes the best of the four minus placements, which equals the
  canonical score maximised over relabelings of either party's bases.

An optional intermediary ("charlie") can act t times between the two
measurements; see delayed_chsh_score.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .classical import TransitionPair
from .errors import KindMismatch
from .quantum import KrausPair

Machine = Union[TransitionPair, KrausPair]

ORDERING_MODES = ("a-first", "b-first", "symmetrized")
SCORE_CONVENTIONS = ("canonical", "max-relabel")
QUANTUM_DELAY_MODES = ("vector-sum", "channel")

# Four-outcome sums further than this from 1 trigger renormalisation in
# vector-sum delay mode.
RENORM_TOL = 1e-9


def _check_mode(mode: str) -> None:
    if mode not in ORDERING_MODES:
        raise ValueError(f"mode must be one of {ORDERING_MODES}, got {mode!r}")


def _check_convention(convention: str) -> None:
    if convention not in SCORE_CONVENTIONS:
        raise ValueError(
            f"convention must be one of {SCORE_CONVENTIONS}, got {convention!r}")


def _same_kind(*machines: Machine) -> str:
    kinds = {m.kind for m in machines}
    if len(kinds) != 1:
        raise KindMismatch(f"machines mix kinds {sorted(kinds)}")
    return kinds.pop()


@dataclass(frozen=True)
class PartySpec:
    """One party's two measurement machines (same kind)."""

    basis1: Machine
    basis2: Machine

    def __post_init__(self):
        _same_kind(self.basis1, self.basis2)

    @property
    def kind(self) -> str:
        return self.basis1.kind

    def basis(self, n: int) -> Machine:
        if n not in (1, 2):
            raise ValueError(f"basis index must be 1 or 2, got {n!r}")
        return self.basis1 if n == 1 else self.basis2


@dataclass(frozen=True)
class DelaySpec:
    """Intermediary machine applied t times between the two measurements.

    quantum_mode selects how a quantum charlie acts: "vector-sum" applies
    (K(-1)+K(+1))^t to the state vector (with four-outcome renormalisation
    when needed), "channel" evolves the density matrix through the Kraus
    channel t times.  Ignored for classical machines.
    """

    charlie: Machine
    t: int
    quantum_mode: str = "vector-sum"

    def __post_init__(self):
        if not isinstance(self.t, (int, np.integer)) or self.t < 0:
            raise ValueError(f"t must be a non-negative integer, got {self.t!r}")
        if self.quantum_mode not in QUANTUM_DELAY_MODES:
            raise ValueError(
                f"quantum_mode must be one of {QUANTUM_DELAY_MODES}, "
                f"got {self.quantum_mode!r}")


@dataclass(frozen=True)
class ChshResult:
    """Correlator matrix and both score conventions for one configuration."""

    c11: float
    c12: float
    c21: float
    c22: float
    s_canonical: float
    s_max: float
    mode: str
    convention: str = "canonical"
    # Raw four-outcome sums per correlator and ordering; populated only by
    # vector-sum delayed scoring, where the map need not preserve norm.
    raw_sums: dict | None = field(default=None, compare=False)

    @property
    def s(self) -> float:
        """Score selected by the stored convention."""
        return self.s_max if self.convention == "max-relabel" else self.s_canonical

    def as_dict(self) -> dict:
        out = {
            "c11": self.c11, "c12": self.c12, "c21": self.c21, "c22": self.c22,
            "s_canonical": self.s_canonical, "s_max": self.s_max,
            "s": self.s, "mode": self.mode, "convention": self.convention,
        }
        if self.raw_sums is not None:
            out["raw_sums"] = self.raw_sums
        return out


def chsh_from_correlators(c11: float, c12: float, c21: float,
                          c22: float) -> tuple[float, float]:
    """(s_canonical, s_max) from a correlator matrix."""
    total = c11 + c12 + c21 + c22
    placements = tuple(abs(total - 2.0 * c) for c in (c11, c12, c21, c22))
    return placements[3], max(placements)


def joint_prob_classical(first: TransitionPair, second: TransitionPair,
                         eta: np.ndarray, i: int, j: int,
                         mid: np.ndarray | None = None) -> float:
    """P(first emits i, then second emits j) from state eta.

    Composes the raw sub-transition matrices (no intermediate
    renormalisation, which would be algebraically redundant).  `mid` is an
    optional matrix applied between the two measurements.
    """
    v = first.op(i) @ np.asarray(eta, dtype=np.float64)
    if mid is not None:
        v = mid @ v
    w = second.op(j) @ v
    return float(w[0] + w[1])


def joint_prob_quantum(first: KrausPair, second: KrausPair,
                       psi: np.ndarray, i: int, j: int,
                       mid: np.ndarray | None = None) -> float:
    """P(first emits i, then second emits j) from pure state psi.

    Returns the raw squared norm |K2^(j) mid K1^(i) psi|^2; with mid absent
    the four outcomes sum to 1 for valid machines.
    """
    v = first.op(i) @ np.asarray(psi, dtype=np.complex128)
    if mid is not None:
        v = mid @ v
    w = second.op(j) @ v
    return float(np.sum(w.real ** 2 + w.imag ** 2))


def _prob_matrix(first: Machine, second: Machine, state: np.ndarray,
                 mid: np.ndarray | None = None) -> np.ndarray:
    """2x2 table p[i, j] of raw sequential outcome probabilities."""
    joint = joint_prob_classical if first.kind == "classical" else joint_prob_quantum
    return np.array([[joint(first, second, state, i, j, mid)
                      for j in (-1, +1)] for i in (-1, +1)])


def _channel_prob_matrix(first: KrausPair, second: KrausPair,
                         psi: np.ndarray, charlie: KrausPair,
                         t: int) -> np.ndarray:
    """Joint outcome table with charlie acting as a Kraus channel t times."""
    psi = np.asarray(psi, dtype=np.complex128)
    cm, cp = charlie.k_minus, charlie.k_plus
    p = np.empty((2, 2))
    for i, symbol_i in enumerate((-1, +1)):
        v = first.op(symbol_i) @ psi
        rho = np.outer(v, np.conj(v))
        for _ in range(t):
            rho = cm @ rho @ np.conj(cm).T + cp @ rho @ np.conj(cp).T
        for j, symbol_j in enumerate((-1, +1)):
            kj = second.op(symbol_j)
            p[i, j] = np.trace(kj @ rho @ np.conj(kj).T).real
    return p


def _expectation(p: np.ndarray, renorm: bool) -> tuple[float, float]:
    """Outcome-product expectation of a 2x2 table; returns (E, raw sum).

    With renorm, the table is divided by its sum when the sum strays from 1
    by more than 1e-9; an all-zero table yields expectation 0.
    """
    total = float(p.sum())
    if renorm and total != 0.0 and abs(total - 1.0) > RENORM_TOL:
        p = p / total
    return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1]), total


def expectation_seq(first: Machine, second: Machine, state: np.ndarray) -> float:
    """Expectation of the product of two sequential outcomes."""
    _same_kind(first, second)
    e, _ = _expectation(_prob_matrix(first, second, state), renorm=False)
    return e


def correlator(alice_machine: Machine, bob_machine: Machine,
               state: np.ndarray, mode: str = "symmetrized") -> float:
    """Sequential correlator of one machine pair under an ordering mode.

    a-first measures alice's machine before bob's, b-first the reverse, and
    symmetrized averages the two orderings.
    """
    _check_mode(mode)
    _same_kind(alice_machine, bob_machine)
    if mode == "a-first":
        return expectation_seq(alice_machine, bob_machine, state)
    if mode == "b-first":
        return expectation_seq(bob_machine, alice_machine, state)
    return 0.5 * (expectation_seq(alice_machine, bob_machine, state)
                  + expectation_seq(bob_machine, alice_machine, state))


def _correlator_delayed(alice_machine: Machine, bob_machine: Machine,
                        state: np.ndarray, mode: str,
                        mid: np.ndarray | None, renorm: bool,
                        channel: tuple | None = None) -> tuple[float, dict]:
    """One correlator with an optional intermediary; also returns raw sums."""
    sums: dict[str, float] = {}

    def one(first, second, label):
        if channel is not None:
            p = _channel_prob_matrix(first, second, state, *channel)
        else:
            p = _prob_matrix(first, second, state, mid)
        e, total = _expectation(p, renorm)
        sums[label] = total
        return e

    if mode == "a-first":
        c = one(alice_machine, bob_machine, "a-first")
    elif mode == "b-first":
        c = one(bob_machine, alice_machine, "b-first")
    else:
        c = 0.5 * (one(alice_machine, bob_machine, "a-first")
                   + one(bob_machine, alice_machine, "b-first"))
    return c, sums


def chsh_score(alice: PartySpec, bob: PartySpec, state: np.ndarray,
               mode: str = "symmetrized",
               convention: str = "canonical") -> ChshResult:
    """Score the four basis combinations of two parties at zero delay."""
    _check_mode(mode)
    _check_convention(convention)
    _same_kind(alice.basis1, bob.basis1)
    c = [correlator(alice.basis(n), bob.basis(m), state, mode)
         for n in (1, 2) for m in (1, 2)]
    s_canonical, s_max = chsh_from_correlators(*c)
    return ChshResult(c[0], c[1], c[2], c[3], s_canonical, s_max,
                      mode=mode, convention=convention)


def delayed_chsh_score(alice: PartySpec, bob: PartySpec, state: np.ndarray,
                       delay: DelaySpec, mode: str = "symmetrized",
                       convention: str = "canonical") -> ChshResult:
    """Score with the delay machine acting t times between measurements.

    t=0 falls through to chsh_score and matches it bit-for-bit.  A classical
    charlie contributes (t_minus + t_plus)^t between the parties' matrices.
    A quantum charlie acts per DelaySpec.quantum_mode; in vector-sum mode
    the result's raw_sums records the unrenormalised four-outcome sum per
    correlator and ordering.
    """
    _check_mode(mode)
    _check_convention(convention)
    kind = _same_kind(alice.basis1, bob.basis1, delay.charlie)
    if delay.t == 0:
        return chsh_score(alice, bob, state, mode, convention)

    channel = None
    mid = None
    renorm = False
    if kind == "classical":
        mid = np.linalg.matrix_power(delay.charlie.total(), delay.t)
    elif delay.quantum_mode == "vector-sum":
        mid = np.linalg.matrix_power(delay.charlie.total(), delay.t)
        renorm = True
    else:
        channel = (delay.charlie, delay.t)

    cs = []
    raw: dict[str, dict[str, float]] = {}
    for n in (1, 2):
        for m in (1, 2):
            c, sums = _correlator_delayed(alice.basis(n), bob.basis(m),
                                          state, mode, mid, renorm, channel)
            cs.append(c)
            raw[f"c{n}{m}"] = sums
    s_canonical, s_max = chsh_from_correlators(*cs)
    return ChshResult(cs[0], cs[1], cs[2], cs[3], s_canonical, s_max,
                      mode=mode, convention=convention,
                      raw_sums=raw if renorm else None)


def spatial_reference_score(theta_a1: float, theta_a2: float,
                            theta_b1: float, theta_b2: float) -> ChshResult:
    """Reference score for spatially separated projective measurements.

    Each party measures the spin component at an angle in the x-z plane
    (cos theta sigma_z + sin theta sigma_x) on one half of a maximally
    correlated two-qubit state, giving the closed form
    c_nm = cos(theta_a_n - theta_b_m).  Both orderings coincide here, so
    the result is tagged symmetrized.
    """
    c = [float(np.cos(ta - tb))
         for ta in (theta_a1, theta_a2) for tb in (theta_b1, theta_b2)]
    s_canonical, s_max = chsh_from_correlators(*c)
    return ChshResult(c[0], c[1], c[2], c[3], s_canonical, s_max,
                      mode="symmetrized", convention="canonical")
