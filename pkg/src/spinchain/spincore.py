"""Exact spin-space model: spin matrices, the Heisenberg Hamiltonian on the
full (2S+1)^N product basis, and an exact propagator.

Everything here works in the raw spin basis with no qubit encoding; the rest
of the package is validated against this module. Units: J = hbar = 1, times
are the dimensionless Jt/hbar. Half-integer spins are kept exact by storing
2S and 2M as integers throughout.

Basis conventions: per site, level index l = M + S (ascending M, l = 0 is
M = -S); site 0 is the least significant tensor factor, so a product state
|M_{N-1}, ..., M_0> has index sum(l_n * d^n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceError, ValidationError

# refuse dense construction above this Hilbert dimension
DENSE_DIM_CAP = 2**21


@dataclass(frozen=True)
class Spin:
    """Spin quantum number stored as twoS = 2S (integer, >= 1)."""

    twoS: int

    def __post_init__(self):
        if not isinstance(self.twoS, int) or self.twoS < 1:
            raise ValidationError(f"twoS must be a positive integer, got {self.twoS!r}")

    @property
    def s(self) -> float:
        return self.twoS / 2.0

    @property
    def dim(self) -> int:
        """Number of levels d = 2S + 1."""
        return self.twoS + 1


@dataclass(frozen=True)
class LatticeBasisState:
    """A product basis state |M_{N-1}, ..., M_0>.

    twoM holds 2*M per site in ket order (site 0 last). Values must have the
    same parity as twoS and magnitude <= twoS.
    """

    twoM: tuple[int, ...]
    spin: Spin

    def __post_init__(self):
        object.__setattr__(self, "twoM", tuple(self.twoM))
        for v in self.twoM:
            if abs(v) > self.spin.twoS or (v - self.spin.twoS) % 2 != 0:
                raise ValidationError(f"2M={v} invalid for twoS={self.spin.twoS}")

    @property
    def n_sites(self) -> int:
        return len(self.twoM)

    @property
    def two_m_tot(self) -> int:
        return sum(self.twoM)

    def twoM_site(self, n: int) -> int:
        """2*M of site n (site 0 is the last tuple entry)."""
        return self.twoM[self.n_sites - 1 - n]

    def levels(self) -> tuple[int, ...]:
        """Level index l = M + S per site, site 0 first."""
        s = self.spin.twoS
        return tuple((self.twoM_site(n) + s) // 2 for n in range(self.n_sites))

    def basis_index(self) -> int:
        """Index into the dense product basis (site 0 least significant)."""
        d = self.spin.dim
        idx = 0
        for n, l in enumerate(self.levels()):
            idx += l * d**n
        return idx


@dataclass(frozen=True)
class Lattice:
    n_sites: int
    edges: tuple[tuple[int, int], ...]
    spin: Spin

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        if self.n_sites < 1:
            raise ValidationError("need at least one site")
        seen = set()
        for m, n in self.edges:
            if not (0 <= m < self.n_sites and 0 <= n < self.n_sites):
                raise ValidationError(f"edge ({m},{n}) out of range")
            if m == n:
                raise ValidationError(f"self-edge ({m},{n})")
            if (m, n) in seen or (n, m) in seen:
                raise ValidationError(f"duplicate edge ({m},{n})")
            seen.add((m, n))

    @property
    def dim(self) -> int:
        return self.spin.dim**self.n_sites


def two_site(spin: Spin) -> Lattice:
    return Lattice(2, ((0, 1),), spin)


def open_chain(n_sites: int, spin: Spin) -> Lattice:
    """Open-ended linear lattice: edges (0,1), (1,2), ..."""
    return Lattice(n_sites, tuple((n, n + 1) for n in range(n_sites - 1)), spin)


def spin_matrices(spin: Spin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Sz, S+, S-) as dense (2S+1)-dim matrices, ascending-M basis.

    Sz is diag(-S..S); S+ raises M with amplitude sqrt(S(S+1) - M(M+1)),
    i.e. entry (l+1, l) for l = M+S; S- is its adjoint.
    """
    d = spin.dim
    s = spin.s
    m = np.arange(d) - s  # M values, ascending
    sz = np.diag(m).astype(complex)
    amp = np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1))
    sp = np.zeros((d, d), dtype=complex)
    sp[np.arange(1, d), np.arange(d - 1)] = amp
    return sz, sp, sp.conj().T


def spin_xyz(spin: Spin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Sx, Sy, Sz) built from the ladder operators."""
    sz, sp, sm = spin_matrices(spin)
    return (sp + sm) / 2.0, (sp - sm) / 2j, sz


def site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator, site 0 least significant."""
    d = op.shape[0]
    left = np.eye(d ** (n_sites - 1 - site), dtype=complex)
    right = np.eye(d**site, dtype=complex)
    return np.kron(np.kron(left, op), right)


def build_heisenberg(lattice: Lattice, dim_cap: int = DENSE_DIM_CAP) -> np.ndarray:
    """Dense Heisenberg Hamiltonian sum_(m,n) [Sz_m Sz_n + (S+_m S-_n + h.c.)/2]."""
    if lattice.dim > dim_cap:
        raise ResourceError(
            f"dense dimension {lattice.dim} exceeds cap {dim_cap}; "
            "reduce sites or spin"
        )
    sz, sp, sm = spin_matrices(lattice.spin)
    n = lattice.n_sites
    h = np.zeros((lattice.dim, lattice.dim), dtype=complex)
    for a, b in lattice.edges:
        za, zb = site_operator(sz, a, n), site_operator(sz, b, n)
        pa, pb = site_operator(sp, a, n), site_operator(sp, b, n)
        ma, mb = site_operator(sm, a, n), site_operator(sm, b, n)
        h += za @ zb + 0.5 * (pa @ mb + ma @ pb)
    return h


def exact_propagate(h: np.ndarray, state: np.ndarray, t: float) -> np.ndarray:
    """e^{-i h t} |state> via Hermitian eigendecomposition."""
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > 1e-10:
        raise ValidationError(f"state not normalized (|psi| = {nrm})")
    evals, evecs = np.linalg.eigh(h)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ state))


class Propagator:
    """Cached eigendecomposition for repeated exact_propagate calls."""

    def __init__(self, h: np.ndarray):
        self.evals, self.evecs = np.linalg.eigh(h)

    @property
    def dim(self) -> int:
        return len(self.evals)

    def __call__(self, state: np.ndarray, t: float) -> np.ndarray:
        return self.evecs @ (np.exp(-1j * self.evals * t) * (self.evecs.conj().T @ state))


def pt2_correlator(spin: Spin, t: float) -> float:
    """Small-t second-order value of <Sz_0 Sz_3>/(hbar S)^2 for the four-site
    chain started in |-S,-S,-S,S>: -1 + S (Jt/hbar)^2."""
    return -1.0 + spin.s * t * t
