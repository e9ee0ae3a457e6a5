"""Encoded Heisenberg Hamiltonians for the four mappings, plus term statistics.

Exchange convention throughout: H = sum_(m,n) [Sz_m Sz_n + (S+_m S-_n + S-_m S+_n)/2]
with J = hbar = 1, which equals sum_alpha S_alpha S_alpha over alpha in {x,y,z}.

Term ordering is deterministic everywhere. The Dicke builder orders terms as
edge order -> k ascending -> l ascending -> (ZZ, YY, XX) per qubit pair; the
weight-sector fast path in sim relies on that adjacency, so it is part of the
contract, not a style choice. Compact/direct/qudit terms are sorted by string.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .encodings import EncodingLayout
from .errors import ResourceError, ValidationError
from .pauli import (
    COEFF_EPS,
    GellMannSum,
    PauliSum,
    decompose_qubit_operator,
    decompose_qudit_operator,
    string_weight,
)
from .spincore import Lattice, Spin, spin_xyz

DENSE_QUBIT_CAP = 24
SITE_DECOMP_CAP = 6  # qubits per site for the per-site path
QUDIT_D_CAP = 16


@dataclass(frozen=True)
class HamiltonianStats:
    n_terms: int
    n_multiqubit: int
    weight_histogram: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_terms != sum(self.weight_histogram.values()):
            raise ValidationError("histogram does not add up to the term count")
        if self.n_multiqubit != sum(c for w, c in self.weight_histogram.items() if w > 2):
            raise ValidationError("multi-qubit count inconsistent")


@dataclass(frozen=True)
class ScalingFit:
    a: float
    b: float
    residual: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValidationError("power-law prefactor must be positive")


def padded_site_xyz(spin: Spin, n_qubits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sx, Sy, Sz embedded in 2^n_qubits dims, zero outside the 2S+1 used levels."""
    dim = 2**n_qubits
    if dim < spin.dim:
        raise ValidationError("register smaller than the spin multiplet")
    out = []
    for op in spin_xyz(spin):
        pad = np.zeros((dim, dim), dtype=complex)
        pad[: spin.dim, : spin.dim] = op
        out.append(pad)
    return tuple(out)


def _merge(acc: dict[str, float], ops: str, coeff: float):
    val = acc.get(ops, 0.0) + coeff
    if abs(val) <= COEFF_EPS:
        acc.pop(ops, None)
    else:
        acc[ops] = val


def _site_pauli_lists(spin: Spin, kq: int) -> list[list[tuple[float, str]]]:
    """Per-site Pauli expansion of (Sx, Sy, Sz) on kq qubits."""
    if kq > SITE_DECOMP_CAP:
        raise ResourceError(f"site width {kq} qubits exceeds cap {SITE_DECOMP_CAP}")
    lists = []
    for op in padded_site_xyz(spin, kq):
        psum = decompose_qubit_operator(op)
        if abs(psum.constant_offset) > COEFF_EPS:
            raise ValidationError("site spin operator decomposed with identity part")
        lists.append(psum.terms)
    return lists


def _sorted_paulisum(n_qubits: int, acc: dict[str, float]) -> PauliSum:
    return PauliSum(n_qubits, sorted((c, s) for s, c in acc.items()), 0.0)


def _sorted_terms_key(item):
    return item[1]


def compact_layout(lattice: Lattice) -> EncodingLayout:
    return EncodingLayout("compact", lattice.spin, lattice.n_sites)


def build_compact(lattice: Lattice) -> PauliSum:
    """Compact (binary) mapping via dense per-edge two-site decomposition."""
    layout = compact_layout(lattice)
    kq = layout.qubits_per_site
    total = layout.total_qubits
    if total > DENSE_QUBIT_CAP:
        raise ResourceError(f"{total} qubits exceeds dense cap {DENSE_QUBIT_CAP}")
    sx, sy, sz = padded_site_xyz(lattice.spin, kq)
    h_edge = sum(np.kron(op, op) for op in (sx, sy, sz))
    edge_terms = decompose_qubit_operator(h_edge).terms
    acc: dict[str, float] = {}
    for m, n in lattice.edges:
        for coeff, ops in edge_terms:
            chars = ["I"] * total
            # leftmost char of ops is the top qubit of site n's window
            for local, ch in enumerate(reversed(ops)):
                site, q = (m, local) if local < kq else (n, local - kq)
                chars[total - 1 - (site * kq + q)] = ch
            _merge(acc, "".join(chars), coeff)
    return _sorted_paulisum(total, acc)


def build_compact_per_site(lattice: Lattice) -> PauliSum:
    """Same operator as build_compact via per-site decompositions (scales to K_q=6)."""
    layout = compact_layout(lattice)
    kq = layout.qubits_per_site
    total = layout.total_qubits
    lists = _site_pauli_lists(lattice.spin, kq)
    acc: dict[str, float] = {}
    for m, n in lattice.edges:
        for terms in lists:
            for ca, pa in terms:
                for cb, pb in terms:
                    chars = ["I"] * total
                    for local, ch in enumerate(reversed(pa)):
                        chars[total - 1 - (m * kq + local)] = ch
                    for local, ch in enumerate(reversed(pb)):
                        chars[total - 1 - (n * kq + local)] = ch
                    _merge(acc, "".join(chars), ca * cb)
    return _sorted_paulisum(total, acc)


def build_direct(lattice: Lattice) -> PauliSum:
    """One-hot mapping, built structurally from number and ladder operators."""
    layout = EncodingLayout("direct", lattice.spin, lattice.n_sites)
    spin = lattice.spin
    kq = layout.qubits_per_site
    total = layout.total_qubits
    if total > DENSE_QUBIT_CAP:
        raise ResourceError(f"{total} qubits exceeds cap {DENSE_QUBIT_CAP}")
    s = spin.s
    m_of = [l - s for l in range(spin.dim)]
    hop = [math.sqrt(s * (s + 1) - m_of[l] * (m_of[l] + 1)) for l in range(spin.dim - 1)]
    # (sigma+ sigma-) x (sigma- sigma+) + h.c. expanded over the four qubits
    kernel = [
        ("XX", "XX", 1.0),
        ("XX", "YY", 1.0),
        ("YY", "XX", 1.0),
        ("YY", "YY", 1.0),
        ("XY", "XY", 1.0),
        ("XY", "YX", -1.0),
        ("YX", "XY", -1.0),
        ("YX", "YX", 1.0),
    ]
    acc: dict[str, float] = {}
    for m, n in lattice.edges:
        for la in range(spin.dim - 1):
            for lb in range(spin.dim - 1):
                c = hop[la] * hop[lb] / 16.0
                for pa, pb, sign in kernel:
                    chars = ["I"] * total
                    # pa chars act on (level la+1, level la) of site m, top first
                    chars[total - 1 - (m * kq + la + 1)] = pa[0]
                    chars[total - 1 - (m * kq + la)] = pa[1]
                    chars[total - 1 - (n * kq + lb + 1)] = pb[0]
                    chars[total - 1 - (n * kq + lb)] = pb[1]
                    _merge(acc, "".join(chars), sign * c)
        for la in range(spin.dim):
            for lb in range(spin.dim):
                c = m_of[la] * m_of[lb] / 4.0
                if abs(c) <= COEFF_EPS:
                    continue
                chars = ["I"] * total
                chars[total - 1 - (m * kq + la)] = "Z"
                chars[total - 1 - (n * kq + lb)] = "Z"
                _merge(acc, "".join(chars), c)
    return _sorted_paulisum(total, acc)


def build_dicke(lattice: Lattice) -> PauliSum:
    """Dicke mapping: (1/4) (XX + YY + ZZ) across every inter-site qubit pair.

    Emitted order (edge -> k -> l -> ZZ, YY, XX) keeps each pair's three
    rotations adjacent in the Trotter circuit; their product conserves total
    Hamming weight even though XX and YY alone do not.
    """
    layout = EncodingLayout("dicke", lattice.spin, lattice.n_sites)
    kq = layout.qubits_per_site
    total = layout.total_qubits
    terms: list[tuple[float, str]] = []
    for m, n in lattice.edges:
        for k in range(kq):
            for l in range(kq):
                a = m * kq + k
                b = n * kq + l
                for ch in "ZYX":
                    chars = ["I"] * total
                    chars[total - 1 - a] = ch
                    chars[total - 1 - b] = ch
                    terms.append((0.25, "".join(chars)))
    return PauliSum(total, terms, 0.0)


def build_qudit(lattice: Lattice) -> GellMannSum:
    """Qudit mapping: pairwise products of per-site Gell-Mann expansions."""
    d = lattice.spin.dim
    if d > QUDIT_D_CAP:
        raise ResourceError(f"d={d} exceeds qudit cap {QUDIT_D_CAP}")
    n_sites = lattice.n_sites
    site_lists = []
    for op in spin_xyz(lattice.spin):
        ident, terms = decompose_qudit_operator(op)
        if abs(ident) > COEFF_EPS:
            raise ValidationError("spin operator with identity component")
        site_lists.append(terms)
    acc: dict[tuple[int, ...], float] = {}
    for m, n in lattice.edges:
        for terms in site_lists:
            for ga, ka in terms:
                for gb, kb in terms:
                    ops = [1] * n_sites
                    ops[n_sites - 1 - m] = ka
                    ops[n_sites - 1 - n] = kb
                    key = tuple(ops)
                    val = acc.get(key, 0.0) + ga * gb
                    if abs(val) <= COEFF_EPS:
                        acc.pop(key, None)
                    else:
                        acc[key] = val
    return GellMannSum(n_sites, d, sorted(((c, k) for k, c in acc.items()), key=_sorted_terms_key), 0.0)


def term_stats(ham: PauliSum | GellMannSum) -> HamiltonianStats:
    hist: dict[int, int] = {}
    if isinstance(ham, PauliSum):
        weights = (string_weight(ops) for _, ops in ham.terms)
    else:
        weights = (sum(1 for k in ops if k != 1) for _, ops in ham.terms)
    for w in weights:
        hist[w] = hist.get(w, 0) + 1
    total = sum(hist.values())
    return HamiltonianStats(total, sum(c for w, c in hist.items() if w > 2), hist)


def hamiltonian_json(ham: PauliSum | GellMannSum, mapping: str, two_s: int, edges) -> str:
    if isinstance(ham, PauliSum):
        terms = [{"coeff": c, "string": s} for c, s in ham.terms]
        width = ham.n_qubits
    else:
        terms = [{"coeff": c, "string": list(s)} for c, s in ham.terms]
        width = ham.n_sites
    return json.dumps(
        {
            "mapping": mapping,
            "two_s": two_s,
            "width": width,
            "edges": [list(e) for e in edges],
            "terms": terms,
            "offset": ham.constant_offset,
        },
        sort_keys=True,
    )


# ---------------------------------------------------------------------------
# compact-mapping term-count scaling study


def fit_power_law(xs, ys) -> ScalingFit:
    """Least-squares a*x^b in log-log space; rms residual in log space."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValidationError("need at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValidationError("power-law fit needs positive data")
    b, loga = np.polyfit(np.log(xs), np.log(ys), 1)
    resid = np.log(ys) - (loga + b * np.log(xs))
    return ScalingFit(float(np.exp(loga)), float(b), float(np.sqrt(np.mean(resid**2))))


def compact_term_count(two_s: int) -> int:
    """Two-site compact term count via the per-site path (no 4^{2K_q} enumeration)."""
    spin = Spin(two_s)
    kq = EncodingLayout("compact", spin, 2).qubits_per_site
    lists = _site_pauli_lists(spin, kq)
    # products never collide across or within the x/y/z groups (Y-parity and
    # diagonality separate them), so the count is a plain sum of squares
    return sum(len(terms) ** 2 for terms in lists)


def compact_scaling_study(two_s_values=None):
    """Compact term count against S for two sites plus the two power-law fits.

    Returns (per_s, fit_power, fit_averaged) where per_s lists (two_s, count).
    The first fit uses the register-filling spins 2S+1 = 2^{K_q} with K_q >= 3
    (the two smallest registers sit below the asymptotic trend).  The second
    fits the per-K_q class average against the central value
    S_c = 3*2^{K_q-3} - 1/2; the class holds the non-filling spins of that
    register width, whose counts plateau well above the filling value.
    """
    if two_s_values is None:
        two_s_values = list(range(1, 64))  # every half-integer S up to 63/2
    per_s = [(ts, compact_term_count(ts)) for ts in two_s_values]
    counts = dict(per_s)

    filling = [ts for ts in (7, 15, 31, 63) if ts in counts]
    fit_power = fit_power_law([ts / 2.0 for ts in filling], [counts[ts] for ts in filling])

    centers = []
    averages = []
    for kq in range(2, 7):
        # non-filling spins on kq qubits: 2^(kq-1) <= 2S <= 2^kq - 2
        cls = [ts for ts in range(2 ** (kq - 1), 2**kq - 1) if ts in counts]
        if not cls:
            continue
        centers.append(3 * 2 ** (kq - 3) - 0.5)
        averages.append(sum(counts[ts] for ts in cls) / len(cls))
    fit_averaged = fit_power_law(centers, averages)
    return per_s, fit_power, fit_averaged


BUILDERS = {
    "compact": build_compact,
    "direct": build_direct,
    "dicke": build_dicke,
    "qudit": build_qudit,
}
