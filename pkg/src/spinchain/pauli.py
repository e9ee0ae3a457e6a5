"""Pauli-string and generalized Gell-Mann operator algebra.

Text convention for Pauli strings: a length-K word over {I,X,Y,Z} with the
leftmost character acting on the highest qubit (qubit 0 is last). The same
ordering is used for Gell-Mann index tuples over sites (site 0 last).

Coefficient conventions: h_P = Tr(P M) / 2^K for qubit operators and
g_k = Tr(lambda_k M) / 2 for qudit operators (the Gell-Mann matrices are
normalized to Tr(lambda_k lambda_l) = 2 delta_kl). Identity components are
kept in a separate constant offset, never in the term list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import ValidationError

COEFF_EPS = 1e-12

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit map from flattened (2r+c) matrix entries to (I,X,Y,Z)/2 weights
_T_FLAT = 0.5 * np.array(
    [
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1j, -1j, 0],
        [1, 0, 0, -1],
    ],
    dtype=complex,
)
_CODE_TO_CHAR = "IXYZ"


def string_masks(ops: str) -> tuple[int, int, int]:
    """(xmask, ymask, zmask) bit masks; bit i of a mask is qubit i."""
    x = y = z = 0
    k = len(ops)
    for pos, ch in enumerate(ops):
        bit = 1 << (k - 1 - pos)
        if ch == "X":
            x |= bit
        elif ch == "Y":
            y |= bit
        elif ch == "Z":
            z |= bit
        elif ch != "I":
            raise ValidationError(f"bad Pauli character {ch!r} in {ops!r}")
    return x, y, z


def string_weight(ops: str) -> int:
    """Number of non-identity positions (qubit support size)."""
    return sum(1 for ch in ops if ch != "I")


def pauli_matrix(ops: str) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 0 least significant."""
    string_masks(ops)  # validates characters
    return reduce(np.kron, (_PAULI[ch] for ch in ops))


@dataclass
class PauliSum:
    """Weighted Pauli strings: sum_k h_k P_k + constant_offset * I.

    Terms hold (real coefficient, string); no duplicates, no identity string,
    no coefficient below COEFF_EPS in magnitude.
    """

    n_qubits: int
    terms: list[tuple[float, str]] = field(default_factory=list)
    constant_offset: float = 0.0

    def __post_init__(self):
        seen = set()
        for h, ops in self.terms:
            if len(ops) != self.n_qubits:
                raise ValidationError(f"term {ops!r} has wrong width")
            if set(ops) <= {"I"}:
                raise ValidationError("identity belongs in constant_offset")
            if ops in seen:
                raise ValidationError(f"duplicate term {ops!r}")
            if abs(h) <= COEFF_EPS:
                raise ValidationError(f"below-threshold coefficient for {ops!r}")
            seen.add(ops)

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.eye(dim, dtype=complex) * self.constant_offset
        for h, ops in self.terms:
            out += h * pauli_matrix(ops)
        return out

    def matrix_on_subspace(self, basis: np.ndarray) -> np.ndarray:
        """<basis_i| sum |basis_j> for computational basis states given as ints.

        O(len(terms) * len(basis)) via the flip/phase action of each string;
        avoids materializing the 2^K-dim matrix.
        """
        basis = np.asarray(basis, dtype=np.int64)
        pos = {int(b): i for i, b in enumerate(basis)}
        n = len(basis)
        out = np.zeros((n, n), dtype=complex)
        out[np.arange(n), np.arange(n)] = self.constant_offset
        for h, ops in self.terms:
            xm, ym, zm = string_masks(ops)
            flip = xm | ym
            ny = bin(ym).count("1")
            for j, b in enumerate(map(int, basis)):
                i = pos.get(b ^ flip)
                if i is None:
                    continue
                sign = -1.0 if bin(b & (ym | zm)).count("1") % 2 else 1.0
                out[i, j] += h * (1j**ny) * sign
        return out


def decompose_qubit_operator(matrix: np.ndarray, eps: float = COEFF_EPS) -> PauliSum:
    """Expand a Hermitian 2^K x 2^K matrix over Pauli strings.

    Runs the transform one qubit at a time, O(K 4^K) instead of enumerating
    strings against the matrix.
    """
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    k = int(round(np.log2(dim)))
    if matrix.shape != (dim, dim) or 2**k != dim:
        raise ValidationError(f"matrix shape {matrix.shape} is not 2^K x 2^K")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
        raise ValidationError("matrix is not Hermitian")

    t = matrix.reshape((2,) * (2 * k))
    # interleave row/column bits per qubit, then fold each pair into 2r+c
    order = [ax for q in range(k) for ax in (q, k + q)]
    t = t.transpose(order).reshape((4,) * k)
    for _ in range(k):
        # contract the front axis, park the transformed axis at the end; after
        # k passes the axes are back to qubit K-1 ... qubit 0 left to right
        t = np.tensordot(_T_FLAT, t, axes=([1], [0]))
        t = np.moveaxis(t, 0, -1)

    terms: list[tuple[float, str]] = []
    offset = 0.0
    for codes in np.argwhere(np.abs(t) > eps):
        coeff = t[tuple(codes)]
        if abs(coeff.imag) > 1e-10:
            raise ValidationError("non-real Pauli coefficient from Hermitian input")
        ops = "".join(_CODE_TO_CHAR[c] for c in codes)
        if set(ops) <= {"I"}:
            offset = float(coeff.real)
        else:
            terms.append((float(coeff.real), ops))
    terms.sort(key=lambda term: term[1])
    return PauliSum(k, terms, offset)


# ---------------------------------------------------------------------------
# generalized Gell-Mann matrices


def gell_mann(d: int, k: int) -> np.ndarray:
    """Generalized Gell-Mann matrix lambda_k for a d-level system, 1-based k.

    k = 1 is sqrt(2/d) I. Off-diagonal pairs and the diagonal matrix for each
    j = 2..d are enumerated blockwise: block j occupies k = (j-1)^2+1 .. j^2,
    alternating X-like/Y-like for l = 1..j-1 and ending with the Z-like at
    k = j^2. Normalization Tr(lambda_k lambda_l) = 2 delta_kl; d = 2 gives
    the Pauli matrices, d = 3 the original Gell-Mann set.
    """
    if not 1 <= k <= d * d:
        raise ValidationError(f"Gell-Mann index {k} outside [1, {d * d}]")
    if k == 1:
        return np.sqrt(2.0 / d) * np.eye(d, dtype=complex)
    j = int(np.ceil(np.sqrt(k)))
    out = np.zeros((d, d), dtype=complex)
    off = k - (j - 1) ** 2
    if off == 2 * j - 1:  # diagonal, Z-like
        norm = np.sqrt(2.0 / (j * (j - 1)))
        for i in range(j - 1):
            out[i, i] = norm
        out[j - 1, j - 1] = -(j - 1) * norm
        return out
    l = (off + 1) // 2
    if off % 2 == 1:  # X-like
        out[j - 1, l - 1] = 1.0
        out[l - 1, j - 1] = 1.0
    else:  # Y-like
        out[j - 1, l - 1] = 1j
        out[l - 1, j - 1] = -1j
    return out


def gell_mann_basis(d: int) -> np.ndarray:
    """Stacked lambda_1 .. lambda_{d^2}, shape (d^2, d, d)."""
    return np.stack([gell_mann(d, k) for k in range(1, d * d + 1)])


def decompose_qudit_operator(matrix: np.ndarray) -> tuple[float, list[tuple[float, int]]]:
    """(identity coefficient on lambda_1, [(g_k, k) for k >= 2]) of a Hermitian d x d matrix."""
    matrix = np.asarray(matrix, dtype=complex)
    d = matrix.shape[0]
    if matrix.shape != (d, d):
        raise ValidationError("matrix must be square")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
        raise ValidationError("matrix is not Hermitian")
    ident = float((np.trace(matrix).real) / 2.0 * np.sqrt(2.0 / d))
    terms = []
    for k in range(2, d * d + 1):
        g = np.trace(gell_mann(d, k) @ matrix) / 2.0
        if abs(g.imag) > 1e-10:
            raise ValidationError("non-real Gell-Mann coefficient")
        if abs(g) > COEFF_EPS:
            terms.append((float(g.real), k))
    return ident, terms


@dataclass
class GellMannSum:
    """Weighted Gell-Mann strings over N qudits of d levels each.

    ops tuples list one 1-based index per site, site 0 last (same reading
    order as Pauli strings). Index 1 (scaled identity) never appears in a
    stored term; pure-identity content lives in constant_offset, already in
    plain units (the lambda_1 normalization factors are folded in).
    """

    n_sites: int
    d: int
    terms: list[tuple[float, tuple[int, ...]]] = field(default_factory=list)
    constant_offset: float = 0.0

    def __post_init__(self):
        seen = set()
        for g, ops in self.terms:
            ops = tuple(ops)
            if len(ops) != self.n_sites:
                raise ValidationError(f"term {ops} has wrong width")
            if any(not 1 <= k <= self.d * self.d for k in ops):
                raise ValidationError(f"index out of range in {ops}")
            if all(k == 1 for k in ops):
                raise ValidationError("identity belongs in constant_offset")
            if ops in seen:
                raise ValidationError(f"duplicate term {ops}")
            seen.add(ops)

    def __len__(self) -> int:
        return len(self.terms)

    def term_matrix(self, ops: tuple[int, ...]) -> np.ndarray:
        return reduce(np.kron, (gell_mann(self.d, k) for k in ops))

    def matrix(self) -> np.ndarray:
        dim = self.d**self.n_sites
        out = np.eye(dim, dtype=complex) * self.constant_offset
        for g, ops in self.terms:
            out += g * self.term_matrix(ops)
        return out
