"""Spin-to-register encodings: compact binary, one-hot, Dicke, and qudit.

A layout assigns site n the qubit window [n*K_q, (n+1)*K_q - 1] (site 0 least
significant). The qudit layout has no qubits; basis indices are base-d words
with site 0 as the least significant digit.

Dicke decoding is seed-pattern based by default: a site pattern with the
lowest w qubits set maps to M = S - w, anything else is unmapped and the shot
is discarded downstream. The weight-only variant (any weight-w pattern maps
to M = S - w) is available via decode_bitstring(..., by_weight=True); it is
not the measurement convention because the simulated dynamics conserve total
Hamming weight, which would pin the decoded total magnetization exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, XGate, partial_swap
from .errors import ValidationError
from .spincore import LatticeBasisState, Spin

KINDS = ("compact", "direct", "dicke", "qudit")


@dataclass(frozen=True)
class EncodingLayout:
    kind: str
    spin: Spin
    n_sites: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown encoding kind {self.kind!r}")
        if self.n_sites < 1:
            raise ValidationError("need at least one site")
        if self.kind == "dicke" and self.spin.twoS < 1:
            raise ValidationError("Dicke layout needs 2S >= 1")

    @property
    def qubits_per_site(self) -> int:
        if self.kind == "compact":
            return max(1, math.ceil(math.log2(self.spin.dim)))
        if self.kind == "direct":
            return self.spin.dim
        if self.kind == "dicke":
            return self.spin.twoS
        raise ValidationError("qudit layout has no qubit window")

    @property
    def total_qubits(self) -> int:
        return self.n_sites * self.qubits_per_site

    @property
    def local_dim(self) -> int:
        """Register dimension per site (2^K_q, or d for qudits)."""
        return self.spin.dim if self.kind == "qudit" else 2**self.qubits_per_site

    @property
    def register_dim(self) -> int:
        return self.local_dim**self.n_sites

    def site_range(self, n: int) -> tuple[int, int]:
        kq = self.qubits_per_site
        return (n * kq, (n + 1) * kq - 1)

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "two_s": self.spin.twoS,
            "n_sites": self.n_sites,
            "local_dim": self.local_dim,
        }
        if self.kind != "qudit":
            payload["qubits_per_site"] = self.qubits_per_site
            payload["site_ranges"] = [list(self.site_range(n)) for n in range(self.n_sites)]
        return json.dumps(payload, sort_keys=True)


def encode_site(layout: EncodingLayout, two_m: int) -> int:
    """Site register pattern (or qudit level) for magnetic number M = two_m/2."""
    spin = layout.spin
    if abs(two_m) > spin.twoS or (two_m - spin.twoS) % 2:
        raise ValidationError(f"two_m={two_m} invalid for 2S={spin.twoS}")
    level = (two_m + spin.twoS) // 2
    if layout.kind in ("compact", "qudit"):
        return level
    if layout.kind == "direct":
        return 1 << level
    w = spin.twoS - level  # excitation count S - M
    return (1 << w) - 1


def decode_site(layout: EncodingLayout, pattern: int, by_weight: bool = False) -> int | None:
    """two_m for a site register pattern, or None if the pattern is unmapped."""
    spin = layout.spin
    if layout.kind in ("compact", "qudit"):
        if not 0 <= pattern < spin.dim:
            if layout.kind == "qudit":
                raise ValidationError(f"qudit level {pattern} outside d={spin.dim}")
            return None
        return 2 * pattern - spin.twoS
    if layout.kind == "direct":
        if pattern.bit_count() != 1:
            return None
        level = pattern.bit_length() - 1
        return 2 * level - spin.twoS
    w = pattern.bit_count()
    if not by_weight and pattern != (1 << w) - 1:
        return None
    return spin.twoS - 2 * w


def encode_state(layout: EncodingLayout, state: LatticeBasisState) -> int:
    """Register basis index for a product spin state."""
    if state.n_sites != layout.n_sites or state.spin != layout.spin:
        raise ValidationError("state does not match layout")
    idx = 0
    for n in range(layout.n_sites):
        idx += encode_site(layout, state.twoM_site(n)) * layout.local_dim**n
    return idx


def decode_bitstring(
    layout: EncodingLayout, index: int, by_weight: bool = False
) -> LatticeBasisState | None:
    """Product spin state for a register basis index, or None when any site is unmapped."""
    if not 0 <= index < layout.register_dim:
        raise ValidationError("index outside register")
    ld = layout.local_dim
    two_ms = []
    for _ in range(layout.n_sites):
        two_m = decode_site(layout, index % ld, by_weight)
        if two_m is None:
            return None
        two_ms.append(two_m)
        index //= ld
    # twoM tuple is stored in ket order (site 0 last)
    return LatticeBasisState(tuple(reversed(two_ms)), layout.spin)


# ---------------------------------------------------------------------------
# Dicke states and the preparation circuit


def dicke_state_vector(spin: Spin, two_m: int) -> np.ndarray:
    """Equal-weight superposition over the 2S-qubit strings of weight S - M."""
    n = spin.twoS
    if abs(two_m) > n or (two_m - n) % 2:
        raise ValidationError(f"two_m={two_m} invalid for 2S={n}")
    w = (n - two_m) // 2
    out = np.zeros(2**n, dtype=complex)
    amp = 1.0 / math.sqrt(math.comb(n, w))
    for idx in range(2**n):
        if idx.bit_count() == w:
            out[idx] = amp
    return out


def dicke_site_isometry(spin: Spin) -> np.ndarray:
    """(2^{2S} x (2S+1)) map taking level l = M + S to the Dicke state of that M."""
    cols = [dicke_state_vector(spin, 2 * l - spin.twoS) for l in range(spin.dim)]
    return np.stack(cols, axis=1)


def dicke_circuit(spin: Spin) -> Circuit:
    """Symmetrizing unitary on 2S qubits: seed |1^w 0^(2S-w)> to the weight-w Dicke state.

    Built inductively: a splitter stage V_m moves the top set qubit of a
    weight-w seed onto qubit m-1 with amplitude sqrt(w/m), leaving the rest
    to the same construction on m-1 qubits. Stage gates for w < m-1 mix only
    when qubit w is 0, which identifies the seed weight.
    """
    n = spin.twoS
    gates: list[Gate] = []
    for m in range(n, 1, -1):
        theta = math.asin(math.sqrt((m - 1) / m))
        gates.append(partial_swap(m - 2, m - 1, theta))
        for w in range(m - 2, 0, -1):
            theta = math.asin(math.sqrt(w / m))
            gates.append(partial_swap(w - 1, m - 1, theta, extra_zero_control=w))
    return Circuit(n, gates)


def embedded_circuit(base: Circuit, total_qubits: int, offset: int) -> Circuit:
    """base shifted up by offset qubits inside a wider register."""
    if offset < 0 or offset + base.n_qubits > total_qubits:
        raise ValidationError("embedding window off the register")
    gates: list[Gate] = []
    for g in base.gates:
        gates.append(_shift_gate(g, total_qubits, offset))
    return Circuit(total_qubits, gates)


def _shift_gate(g: Gate, total: int, offset: int) -> Gate:
    from .circuit import CXGate, GateBlock, PauliRotation, RyGate

    if isinstance(g, XGate):
        return XGate(g.target + offset)
    if isinstance(g, CXGate):
        return CXGate(g.control + offset, g.target + offset)
    if isinstance(g, RyGate):
        ctrl = tuple((q + offset, v) for q, v in g.controls)
        return RyGate(g.target + offset, g.angle, ctrl)
    if isinstance(g, PauliRotation):
        pad_hi = total - offset - len(g.ops)
        return PauliRotation(g.angle, "I" * pad_hi + g.ops + "I" * offset)
    if isinstance(g, GateBlock):
        return GateBlock(tuple(_shift_gate(inner, total, offset) for inner in g.gates))
    raise ValidationError(f"cannot shift gate {g!r}")


def dressing_circuit(layout: EncodingLayout) -> Circuit:
    """Per-site Dicke unitaries across the whole register (identity otherwise)."""
    if layout.kind != "dicke":
        return Circuit(layout.total_qubits if layout.kind != "qudit" else 0, [])
    site = dicke_circuit(layout.spin)
    gates: list[Gate] = []
    for n in range(layout.n_sites):
        gates += embedded_circuit(site, layout.total_qubits, n * layout.qubits_per_site).gates
    return Circuit(layout.total_qubits, gates)


def preparation_gates(layout: EncodingLayout, state: LatticeBasisState) -> Circuit:
    """X gates taking |0...0> to the (pre-dressing) encoded product state."""
    idx = encode_state(layout, state)
    if layout.kind == "qudit":
        raise ValidationError("qudit registers are prepared by level index, not gates")
    gates = [XGate(q) for q in range(layout.total_qubits) if (idx >> q) & 1]
    return Circuit(layout.total_qubits, gates)
