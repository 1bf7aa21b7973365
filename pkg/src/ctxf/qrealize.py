"""Dense state-vector simulation of generalised GHZ states under torus phase gates.

Amplitudes are indexed by N-tuples of group elements in the group's fixed
enumeration order (X basis). States stay unnormalised until measurement.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .abgroup import FiniteAbelianGroup, GroupElement, TorusPoint, torus_sum

TOL = 1e-9


class UnrealizableContext(ValueError):
    """The phase sum of a context is not an X-classical point, so the context yields no outcomes."""

    def __init__(self, phase_sum: TorusPoint):
        super().__init__(
            f"phase sum {phase_sum} is not an X-classical point; the measurement context is not realisable"
        )
        self.phase_sum = phase_sum


class DegenerateState(ValueError):
    pass


@dataclass(frozen=True)
class StateVector:
    group: FiniteAbelianGroup
    parties: int
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.group.order

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.dim,) * self.parties)


def character_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """Entry (y, x) = exp(2 pi i <y, x>)."""
    elems = group.elements()
    phases = np.array([[float(group.pairing(y, x).value) for x in elems] for y in elems])
    return np.exp(2j * np.pi * phases)


def ghz_state(group: FiniteAbelianGroup, parties: int, x: GroupElement | None = None) -> StateVector:
    """Amplitude 1 on every tuple summing to x (default 0)."""
    if parties < 1:
        raise ValueError("GHZ state needs at least one party")
    x = group.zero if x is None else group.check(x)
    elems = group.elements()
    amps = np.zeros(group.order ** parties, dtype=complex)
    for i, tup in enumerate(itertools.product(elems, repeat=parties)):
        if group.sum(tup) == x:
            amps[i] = 1.0
    return StateVector(group, parties, amps)


def phase_gate(group: FiniteAbelianGroup, alpha: TorusPoint, basis: str = "X") -> np.ndarray:
    """Phase gate for a torus point: diag(exp(2 pi i alpha_y)) in the Z basis.

    In the X basis this is the group convolution with the matching phase state.
    """
    phases = np.array([0.0] + [float(c.value) for c in alpha.coords])
    diag = np.diag(np.exp(2j * np.pi * phases))
    if basis == "Z":
        return diag
    if basis != "X":
        raise ValueError(f"unknown basis {basis!r}")
    m = character_matrix(group)
    return m.conj().T @ diag @ m / group.order


def apply_local(state: StateVector, gates: Sequence[np.ndarray]) -> StateVector:
    if len(gates) != state.parties:
        raise ValueError(f"{len(gates)} gates for {state.parties} parties")
    t = state.tensor()
    for axis, gate in enumerate(gates):
        t = np.moveaxis(np.tensordot(gate, t, axes=([1], [axis])), 0, axis)
    return StateVector(state.group, state.parties, t.reshape(-1))


def gated_ghz(group: FiniteAbelianGroup, alphas: Sequence[TorusPoint]) -> StateVector:
    ghz = ghz_state(group, len(alphas))
    return apply_local(ghz, [phase_gate(group, a) for a in alphas])


def measure_all_X(state: StateVector) -> dict[tuple[GroupElement, ...], float]:
    probs = np.abs(state.amplitudes) ** 2
    total = probs.sum()
    if not np.isfinite(total) or total <= 0:
        raise DegenerateState("cannot measure the zero vector")
    probs = probs / total
    outcomes = itertools.product(state.group.elements(), repeat=state.parties)
    return {tup: float(p) for tup, p in zip(outcomes, probs)}


def classical_phase_sum(group: FiniteAbelianGroup, alphas: Sequence[TorusPoint]) -> GroupElement:
    total = torus_sum(group, alphas)
    x = group.torus_to_classical(total)
    if x is None:
        raise UnrealizableContext(total)
    return x


def exact_context_distribution(group: FiniteAbelianGroup, parties: int, target: GroupElement) -> dict:
    """Uniform weight 1/D^(N-1) on the fibre {sum x_i = target}."""
    weight = Fraction(1, group.order ** (parties - 1))
    return {
        tup: (weight if group.sum(tup) == target else Fraction(0))
        for tup in itertools.product(group.elements(), repeat=parties)
    }


def max_deviation(exact: dict, simulated: dict) -> float:
    keys = set(exact) | set(simulated)
    return max(abs(float(exact.get(k, 0)) - simulated.get(k, 0.0)) for k in keys)


def check_parity_lemma(group: FiniteAbelianGroup, parties: int, alphas: Sequence[TorusPoint],
                       tol: float = TOL) -> bool:
    """The sum of all outcomes of the gated GHZ state is deterministic and equals the phase sum."""
    if len(alphas) != parties:
        raise ValueError("one phase per party required")
    target = classical_phase_sum(group, alphas)
    dist = measure_all_X(gated_ghz(group, alphas))
    pushed: dict[GroupElement, float] = {}
    for tup, p in dist.items():
        s = group.sum(tup)
        pushed[s] = pushed.get(s, 0.0) + p
    tv = 0.5 * sum(abs(pushed.get(g, 0.0) - (1.0 if g == target else 0.0)) for g in group.elements())
    return tv <= tol


def check_decoherence_lemma(group: FiniteAbelianGroup, parties: int, alphas: Sequence[TorusPoint],
                            tol: float = TOL) -> bool:
    """X-measurement of the gated GHZ state matches that of the generalised GHZ state at the phase sum."""
    if len(alphas) != parties:
        raise ValueError("one phase per party required")
    x = classical_phase_sum(group, alphas)
    lhs = measure_all_X(gated_ghz(group, alphas))
    rhs = measure_all_X(ghz_state(group, parties, x))
    return max(abs(lhs[k] - rhs[k]) for k in lhs) <= tol
