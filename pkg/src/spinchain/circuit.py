"""Minimal gate model: X / CX / (multi-)controlled Ry / Pauli-string rotations.

Gates act on integer-indexed computational basis states, qubit 0 least
significant. apply() accepts a statevector of shape (dim,) or a batch of
columns (dim, m), so building a dense unitary is just apply(identity).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .pauli import string_masks, string_weight


@dataclass(frozen=True)
class XGate:
    target: int

    @property
    def support(self) -> tuple[int, ...]:
        return (self.target,)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        idx = np.arange(len(psi)) ^ (1 << self.target)
        return psi[idx]

    def dagger(self) -> "XGate":
        return self

    def dump(self) -> str:
        return f"X {self.target}"


@dataclass(frozen=True)
class CXGate:
    control: int
    target: int

    @property
    def support(self) -> tuple[int, ...]:
        return (self.control, self.target)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        idx = np.arange(len(psi))
        src = np.where((idx >> self.control) & 1 == 1, idx ^ (1 << self.target), idx)
        return psi[src]

    def dagger(self) -> "CXGate":
        return self

    def dump(self) -> str:
        return f"CX {self.control} {self.target}"


@dataclass(frozen=True)
class RyGate:
    """Ry(angle) = exp(-i angle Y / 2) on target, gated on (qubit, value) controls."""

    target: int
    angle: float
    controls: tuple[tuple[int, int], ...] = ()

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.controls) + (self.target,)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        bit = 1 << self.target
        idx = np.arange(len(psi))
        lo = (idx & bit) == 0
        for q, val in self.controls:
            lo &= ((idx >> q) & 1) == val
        lo_idx = idx[lo]
        hi_idx = lo_idx | bit
        c = np.cos(self.angle / 2)
        s = np.sin(self.angle / 2)
        out = psi.copy()
        a, b = psi[lo_idx], psi[hi_idx]
        out[lo_idx] = c * a - s * b
        out[hi_idx] = s * a + c * b
        return out

    def dagger(self) -> "RyGate":
        return RyGate(self.target, -self.angle, self.controls)

    def dump(self) -> str:
        ctrl = "".join(f" ctrl {q}={v}" for q, v in self.controls)
        return f"RY {self.target} {self.angle:.12g}{ctrl}"


@dataclass(frozen=True)
class PauliRotation:
    """exp(-i angle P) for a Pauli string P."""

    angle: float
    ops: str

    @property
    def support(self) -> tuple[int, ...]:
        k = len(self.ops)
        return tuple(k - 1 - p for p, ch in enumerate(self.ops) if ch != "I")

    def apply(self, psi: np.ndarray) -> np.ndarray:
        xm, ym, zm = string_masks(self.ops)
        flip = xm | ym
        src = np.arange(len(psi)) ^ flip
        phase = (1j) ** bin(ym).count("1") * np.where(
            np.bitwise_count(src & (ym | zm)) % 2, -1.0, 1.0
        )
        if psi.ndim == 2:
            phase = phase[:, None]
        return np.cos(self.angle) * psi - 1j * np.sin(self.angle) * (phase * psi[src])

    def dagger(self) -> "PauliRotation":
        return PauliRotation(-self.angle, self.ops)

    def dump(self) -> str:
        return f"ROT {self.angle:.12g} {self.ops}"


@dataclass(frozen=True)
class GateBlock:
    """A short gate sequence treated as one unit (one noise event, one support)."""

    gates: tuple

    @property
    def support(self) -> tuple[int, ...]:
        seen: list[int] = []
        for g in self.gates:
            for q in g.support:
                if q not in seen:
                    seen.append(q)
        return tuple(seen)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        for g in self.gates:
            psi = g.apply(psi)
        return psi

    def dagger(self) -> "GateBlock":
        return GateBlock(tuple(g.dagger() for g in reversed(self.gates)))

    def dump(self) -> str:
        return "; ".join(g.dump() for g in self.gates)


Gate = XGate | CXGate | RyGate | PauliRotation | GateBlock


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            if isinstance(g, PauliRotation):
                if len(g.ops) != self.n_qubits:
                    raise ValidationError(f"rotation width {len(g.ops)} != {self.n_qubits}")
            elif not all(0 <= q < self.n_qubits for q in g.support):
                raise ValidationError(f"gate {g.dump()} off the register")

    def __len__(self) -> int:
        return len(self.gates)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if len(psi) != 2**self.n_qubits:
            raise ValidationError("state dimension does not match register")
        for g in self.gates:
            psi = g.apply(psi)
        return psi

    def unitary(self) -> np.ndarray:
        return self.apply(np.eye(2**self.n_qubits, dtype=complex))

    def dagger(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.dagger() for g in reversed(self.gates)])

    def dump(self) -> str:
        return "\n".join(g.dump() for g in self.gates)


def partial_swap(a: int, b: int, theta: float, extra_zero_control: int | None = None) -> GateBlock:
    """Block sending |q_b q_a> = |01> to cos |01> + sin |10>, fixing |00>, |11>.

    The optional extra control gates the mixing on another qubit being 0 (the
    wrapping CX pair then cancels, so the whole block is inactive).
    """
    controls = ((b, 1),) if extra_zero_control is None else ((b, 1), (extra_zero_control, 0))
    return GateBlock(
        (
            CXGate(a, b),
            RyGate(a, -2.0 * theta, controls),
            CXGate(a, b),
        )
    )
