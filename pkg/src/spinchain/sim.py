"""Trotter circuit construction and execution backends.

Backends:
  - run_statevector: dense qubit statevector, <= 21 qubits.
  - run_dicke_sector: statevector restricted to a fixed-Hamming-weight sector.
    Valid because every Dicke-mapping pair contributes adjacent (ZZ, YY, XX)
    rotations with a common angle, and that commuting triple conserves the
    weight of the two qubits (single XX or YY rotations do not). The triple is
    applied in closed form per pair.
  - run_density_qubits / run_density_qudit: exact density-matrix evolution;
    after each gate touching >= 2 qubits (or each two-qudit rotation) the
    gate's support is completely depolarized with probability eps2q. For a
    two-site system this reduces to rho -> (1-eps) rho + eps I/D.

Noise is an exact channel, never trajectory-sampled; shot noise enters only
through sample_shots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, PauliRotation, XGate
from .encodings import EncodingLayout, dressing_circuit, encode_state
from .errors import ResourceError, ValidationError
from .pauli import GellMannSum, PauliSum, gell_mann, string_masks
from .spincore import LatticeBasisState

SV_QUBIT_CAP = 21
SECTOR_QUBIT_CAP = 24
DENSITY_QUBIT_CAP = 12
QUDIT_DIM_CAP = 4096


@dataclass(frozen=True)
class TrotterPlan:
    dtau: float
    n_steps: int

    def __post_init__(self):
        if self.dtau <= 0:
            raise ValidationError("dtau must be positive")
        if self.n_steps < 0:
            raise ValidationError("n_steps must be >= 0")

    @property
    def total_time(self) -> float:
        return self.dtau * self.n_steps


@dataclass(frozen=True)
class NoiseConfig:
    eps2q: float
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.eps2q < 1.0:
            raise ValidationError("eps2q must lie in [0, 1)")

    @property
    def active(self) -> bool:
        return self.enabled and self.eps2q > 0.0


def trotter_circuit(
    ham: PauliSum,
    layout: EncodingLayout,
    plan: TrotterPlan,
    initial: LatticeBasisState | None = None,
    dress: bool | None = None,
) -> Circuit:
    """Prep flips + (Dicke dressing) + n_steps repetitions of the term list + undressing.

    One rotation exp(-i dtau h_k P_k) per Hamiltonian term per step, in list
    order; dressing and its inverse appear exactly once, not per step.
    """
    if layout.kind == "qudit":
        raise ValidationError("qubit circuit requested for a qudit layout")
    if ham.n_qubits != layout.total_qubits:
        raise ValidationError("Hamiltonian width does not match layout")
    if dress is None:
        dress = layout.kind == "dicke"
    if dress and layout.kind != "dicke":
        raise ValidationError("dressing only applies to the Dicke layout")
    gates: list[Gate] = []
    if initial is not None:
        idx = encode_state(layout, initial)
        gates += [XGate(q) for q in range(layout.total_qubits) if (idx >> q) & 1]
    if dress:
        dressing = dressing_circuit(layout)
        gates += dressing.gates
    step = [PauliRotation(plan.dtau * h, ops) for h, ops in ham.terms]
    for _ in range(plan.n_steps):
        gates += step
    if dress:
        gates += dressing.dagger().gates
    return Circuit(layout.total_qubits, gates)


def run_statevector(circuit: Circuit, initial: int = 0) -> np.ndarray:
    if circuit.n_qubits > SV_QUBIT_CAP:
        raise ResourceError(f"{circuit.n_qubits} qubits exceeds statevector cap {SV_QUBIT_CAP}")
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[initial] = 1.0
    return circuit.apply(psi)


def fidelity_error(psi: np.ndarray, ref: np.ndarray) -> float:
    return float(1.0 - abs(np.vdot(ref, psi)) ** 2)


# ---------------------------------------------------------------------------
# fixed-weight sector backend for the Dicke mapping


def dicke_pair_list(ham: PauliSum) -> list[tuple[int, int]]:
    """Qubit pairs of a Dicke-mapping term list, enforcing the (ZZ,YY,XX) grouping."""
    if len(ham.terms) % 3:
        raise ValidationError("Dicke term list length is not a multiple of 3")
    pairs = []
    for i in range(0, len(ham.terms), 3):
        trip = ham.terms[i : i + 3]
        coeffs = {h for h, _ in trip}
        if len(coeffs) != 1:
            raise ValidationError("pair triple with unequal coefficients")
        masks = [string_masks(ops) for _, ops in trip]
        zz, yy, xx = masks
        if not (zz[0] == zz[1] == 0 and yy[0] == yy[2] == 0 and xx[1] == xx[2] == 0):
            raise ValidationError("pair triple is not ordered ZZ, YY, XX")
        if not (zz[2] == yy[1] == xx[0]) or bin(zz[2]).count("1") != 2:
            raise ValidationError("pair triple acts on inconsistent qubit pairs")
        mask = zz[2]
        b = mask.bit_length() - 1
        a = (mask ^ (1 << b)).bit_length() - 1
        pairs.append((a, b))
    return pairs


class DickeSectorEngine:
    """Reusable fixed-weight evolution for one (layout, initial state) pair."""

    def __init__(self, ham: PauliSum, layout: EncodingLayout, initial: LatticeBasisState):
        if layout.kind != "dicke":
            raise ValidationError("sector backend is specific to the Dicke layout")
        total = layout.total_qubits
        if total > SECTOR_QUBIT_CAP:
            raise ResourceError(f"{total} qubits exceeds sector cap {SECTOR_QUBIT_CAP}")
        self.layout = layout
        self.coeff = ham.terms[0][0]
        self.pairs = dicke_pair_list(ham)
        seed = encode_state(layout, initial)
        weight = seed.bit_count()
        self.dressing = dressing_circuit(layout)
        psi = np.zeros(2**total, dtype=complex)
        psi[seed] = 1.0
        psi = self.dressing.apply(psi)
        idx = np.arange(2**total, dtype=np.int64)
        self.basis = idx[np.bitwise_count(idx) == weight]
        leak = np.linalg.norm(np.delete(psi, self.basis)) ** 2
        if leak > 1e-12:
            raise ValidationError(f"dressing leaked {leak:.2e} outside the weight sector")
        self.start = psi[self.basis].copy()
        self._pair_index = []
        for a, b in self.pairs:
            bita = (self.basis >> a) & 1
            bitb = (self.basis >> b) & 1
            same = np.nonzero(bita == bitb)[0]
            m01 = np.nonzero((bita == 0) & (bitb == 1))[0]
            m10 = np.searchsorted(self.basis, self.basis[m01] ^ ((1 << a) | (1 << b)))
            self._pair_index.append((same, m01, m10))

    def evolve(self, plan: TrotterPlan) -> np.ndarray:
        """Final full-register statevector after n_steps and undressing."""
        theta = plan.dtau * self.coeff
        e_m = np.exp(-1j * theta)
        e_p = np.exp(1j * theta)
        c2 = math.cos(2 * theta)
        s2 = math.sin(2 * theta)
        sec = self.start.copy()
        for _ in range(plan.n_steps):
            for same, m01, m10 in self._pair_index:
                sec[same] *= e_m
                lo = sec[m01]
                hi = sec[m10]
                sec[m01] = e_p * (c2 * lo - 1j * s2 * hi)
                sec[m10] = e_p * (c2 * hi - 1j * s2 * lo)
        psi = np.zeros(2**self.layout.total_qubits, dtype=complex)
        psi[self.basis] = sec
        return self.dressing.dagger().apply(psi)


def run_dicke_sector(
    ham: PauliSum, layout: EncodingLayout, plan: TrotterPlan, initial: LatticeBasisState
) -> np.ndarray:
    return DickeSectorEngine(ham, layout, initial).evolve(plan)


# ---------------------------------------------------------------------------
# density-matrix paths with depolarizing noise


def _block_form(rho: np.ndarray, slots: list[int], base: int, n_slots: int):
    """View rho with the given slots as the leading block index.

    Returns (M, perm) with M of shape (base^k, R, base^k, R); undo with
    _block_restore. Slot s maps to tensor axis n_slots-1-s (slot 0 least
    significant).
    """
    t = rho.reshape((base,) * (2 * n_slots))
    row = [n_slots - 1 - s for s in slots]
    rest = [ax for ax in range(n_slots) if ax not in row]
    perm = row + rest + [ax + n_slots for ax in row] + [ax + n_slots for ax in rest]
    k = len(slots)
    m = t.transpose(perm).reshape(base**k, base ** (n_slots - k), base**k, -1)
    return m, perm


def _block_restore(m: np.ndarray, perm: list[int], base: int, n_slots: int) -> np.ndarray:
    t = m.reshape((base,) * (2 * n_slots))
    inv = np.argsort(perm)
    return t.transpose(inv).reshape(base**n_slots, base**n_slots)


def _depolarize_block(rho: np.ndarray, slots: list[int], base: int, n_slots: int, eps: float):
    m, perm = _block_form(rho, slots, base, n_slots)
    dim_b = base ** len(slots)
    tr = np.einsum("prps->rs", m)
    mixed = np.einsum("ab,rs->arbs", np.eye(dim_b), tr) / dim_b
    return _block_restore((1.0 - eps) * m + eps * mixed, perm, base, n_slots)


def _conjugate(gate: Gate, rho: np.ndarray) -> np.ndarray:
    tmp = gate.apply(rho)
    return gate.apply(tmp.conj().T).conj().T


def run_density_qubits(circuit: Circuit, initial: int, noise: NoiseConfig) -> np.ndarray:
    """Exact density evolution; each gate with >= 2 support qubits is a noise event."""
    n = circuit.n_qubits
    if n > DENSITY_QUBIT_CAP:
        raise ResourceError(f"{n} qubits exceeds density cap {DENSITY_QUBIT_CAP}")
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[initial, initial] = 1.0
    for gate in circuit.gates:
        rho = _conjugate(gate, rho)
        support = sorted(gate.support)
        if noise.active and len(support) >= 2:
            rho = _depolarize_block(rho, support, 2, n, noise.eps2q)
    return rho


@dataclass(frozen=True)
class QuditRotation:
    """exp(-i angle lambda_{k} lambda_{l}) on the <= 2 sites with index != 1."""

    angle: float
    ops: tuple[int, ...]

    def sites(self) -> list[int]:
        n = len(self.ops)
        return [n - 1 - i for i, k in enumerate(self.ops) if k != 1][::-1]


@dataclass
class QuditCircuit:
    n_sites: int
    d: int
    rotations: list[QuditRotation] = field(default_factory=list)


def qudit_trotter_circuit(ham: GellMannSum, plan: TrotterPlan) -> QuditCircuit:
    step = [QuditRotation(plan.dtau * g, ops) for g, ops in ham.terms]
    return QuditCircuit(ham.n_sites, ham.d, step * plan.n_steps)


def run_density_qudit(
    circuit: QuditCircuit, initial_levels: tuple[int, ...], noise: NoiseConfig
) -> np.ndarray:
    """Gell-Mann rotations on a qudit register; two-site gates depolarize their pair."""
    d = circuit.d
    n = circuit.n_sites
    dim = d**n
    if dim > QUDIT_DIM_CAP:
        raise ResourceError(f"qudit dimension {dim} exceeds cap {QUDIT_DIM_CAP}")
    if len(initial_levels) != n or any(not 0 <= l < d for l in initial_levels):
        raise ValidationError("bad initial level list")
    # initial_levels given per site, site 0 first
    idx = sum(l * d**s for s, l in enumerate(initial_levels))
    rho = np.zeros((dim, dim), dtype=complex)
    rho[idx, idx] = 1.0
    cache: dict[tuple, np.ndarray] = {}
    for rot in circuit.rotations:
        sites = rot.sites()
        key = (rot.angle, tuple(rot.ops[len(rot.ops) - 1 - s] for s in sites))
        u = cache.get(key)
        if u is None:
            mats = [gell_mann(d, rot.ops[n - 1 - s]) for s in sites]
            h = mats[0] if len(mats) == 1 else np.kron(mats[0], mats[1])
            w, v = np.linalg.eigh(h)
            u = (v * np.exp(-1j * rot.angle * w)) @ v.conj().T
            cache[key] = u
        m, perm = _block_form(rho, sites, d, n)
        m = np.einsum("ap,prqs,bq->arbs", u, m, u.conj())
        rho = _block_restore(m, perm, d, n)
        if noise.active and len(sites) == 2:
            rho = _depolarize_block(rho, sites, d, n, noise.eps2q)
    return rho


# ---------------------------------------------------------------------------
# sampling and statistics


@dataclass(frozen=True)
class ShotResult:
    counts: dict[int, int]
    n_shots: int
    width: int
    base: int = 2

    def __post_init__(self):
        if sum(self.counts.values()) != self.n_shots:
            raise ValidationError("counts do not add up to n_shots")

    def frequency(self, index: int) -> float:
        return self.counts.get(index, 0) / self.n_shots

    def to_json(self) -> str:
        label = {
            np.base_repr(i, self.base).zfill(self.width): c
            for i, c in sorted(self.counts.items())
        }
        return json.dumps(label, sort_keys=True)


def probabilities(state_or_rho: np.ndarray) -> np.ndarray:
    arr = np.asarray(state_or_rho)
    p = np.abs(arr) ** 2 if arr.ndim == 1 else np.diag(arr).real.copy()
    if np.min(p) < -1e-9:
        raise ValidationError("negative probability")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValidationError(f"distribution sums to {total:.6f}, not 1")
    return p / total


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_shots(
    state_or_rho: np.ndarray, n_shots: int, seed: int, layout: EncodingLayout | None = None
) -> ShotResult:
    p = probabilities(state_or_rho)
    if layout is None:
        width = max(1, int(round(np.log2(len(p)))))
        base = 2
    elif layout.kind == "qudit":
        width, base = layout.n_sites, layout.spin.dim
    else:
        width, base = layout.total_qubits, 2
    draw = make_rng(seed).multinomial(n_shots, p)
    hits = np.nonzero(draw)[0]
    return ShotResult({int(i): int(draw[i]) for i in hits}, n_shots, width, base)


def bootstrap_std(result: ShotResult, statistic, n_resamples: int = 1000, seed: int = 0) -> float:
    """Sample std of the statistic under multinomial resampling of the counts."""
    keys = sorted(result.counts)
    p = np.array([result.counts[k] for k in keys], dtype=float) / result.n_shots
    rng = make_rng(seed)
    vals = np.empty(n_resamples)
    for r in range(n_resamples):
        draw = rng.multinomial(result.n_shots, p)
        resampled = ShotResult(
            {k: int(c) for k, c in zip(keys, draw) if c},
            result.n_shots,
            result.width,
            result.base,
        )
        vals[r] = statistic(resampled)
    return float(np.std(vals, ddof=1))
