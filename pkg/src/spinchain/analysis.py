"""Observables, discrepancy metrics, mitigation, and scaling fits.

Probabilities are taken at amplitude level unless a ShotResult is passed;
decoding follows the layout's production rules, so for the Dicke mapping only
seed patterns count and everything else is discarded as unmapped. Times are
in units of hbar/J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .encodings import EncodingLayout, decode_bitstring, encode_state
from .errors import ValidationError
from .qham import build_compact, build_dicke, build_direct, build_qudit, fit_power_law
from .sim import (
    DickeSectorEngine,
    NoiseConfig,
    ShotResult,
    TrotterPlan,
    bootstrap_std,
    probabilities,
    qudit_trotter_circuit,
    run_density_qubits,
    run_density_qudit,
    run_statevector,
    sample_shots,
    trotter_circuit,
)
from .spincore import (
    LatticeBasisState,
    Propagator,
    Spin,
    build_heisenberg,
    open_chain,
    site_operator,
    spin_matrices,
    two_site,
)


@dataclass(frozen=True)
class PopulationSeries:
    times: tuple[float, ...]
    values: tuple[float, ...]
    sigma: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValidationError("times and values differ in length")
        if self.sigma is not None and len(self.sigma) != len(self.values):
            raise ValidationError("sigma length mismatch")


@dataclass(frozen=True)
class CorrelatorResult:
    raw: float
    normalized: float | None  # None signals an empty normalization sector
    p_sector: float


@dataclass(frozen=True)
class DiscrepancyReport:
    per_n: tuple[tuple[int, float, float], ...]  # (N_ST, delta, delta_norm)
    b: float | None  # prefactor of delta = B / N^2
    b_norm: float | None
    slope: float | None  # free-exponent fit, for scaling checks
    slope_norm: float | None
    mixed: float  # discrepancy of the completely mixed register state


def zeta(spin: Spin) -> int:
    """Number of (initial, final) pairs sharing M_tot on two sites: d(1+2d^2)/3."""
    d = spin.dim
    val = d * (1 + 2 * d * d) / 3
    return int(round(val))


def decoded_distribution(obj, layout: EncodingLayout, by_weight: bool = False):
    """(probability per decoded spin state, unmapped mass).

    Keys are twoM tuples in ket order (site 0 last). obj may be a statevector,
    a density matrix, or a ShotResult.
    """
    if isinstance(obj, ShotResult):
        items = [(i, c / obj.n_shots) for i, c in sorted(obj.counts.items())]
    else:
        p = probabilities(obj)
        nz = np.nonzero(p)[0]
        items = [(int(i), float(p[i])) for i in nz]
    dist: dict[tuple[int, ...], float] = {}
    unmapped = 0.0
    for idx, prob in items:
        state = decode_bitstring(layout, idx, by_weight)
        if state is None:
            unmapped += prob
        else:
            dist[state.twoM] = dist.get(state.twoM, 0.0) + prob
    return dist, unmapped


def initial_state_population(obj, layout: EncodingLayout, initial: LatticeBasisState) -> float:
    """p0: probability of decoding back to the initial product state."""
    idx = encode_state(layout, initial)
    if isinstance(obj, ShotResult):
        return obj.frequency(idx)
    return float(probabilities(obj)[idx])


def average_error(noisy: PopulationSeries, clean: PopulationSeries, t_cutoff: float) -> float:
    """Mean |p_noisy - p_clean| over grid points with t <= t_cutoff."""
    if noisy.times != clean.times:
        raise ValidationError("series are on different time grids")
    diffs = [
        abs(a - b)
        for t, a, b in zip(noisy.times, noisy.values, clean.values)
        if t <= t_cutoff + 1e-12
    ]
    if not diffs:
        raise ValidationError("no grid points below the cutoff")
    return float(np.mean(diffs))


def correlator_SzSz(
    obj, layout: EncodingLayout, site_a: int, site_b: int, initial: LatticeBasisState
) -> CorrelatorResult:
    """<Sz_a Sz_b> from decoded outcomes, raw and post-selected on M_tot.

    Raw sums only mapped outcomes. The normalized value restricts to decoded
    states with the initial M_tot and renormalizes their probability to one;
    an empty sector yields normalized=None.
    """
    dist, _ = decoded_distribution(obj, layout)
    n = layout.n_sites
    raw = 0.0
    sector_mass = 0.0
    sector_sum = 0.0
    target = initial.two_m_tot
    for two_ms, prob in dist.items():
        ma = two_ms[n - 1 - site_a] / 2.0
        mb = two_ms[n - 1 - site_b] / 2.0
        raw += prob * ma * mb
        if sum(two_ms) == target:
            sector_mass += prob
            sector_sum += prob * ma * mb
    normalized = sector_sum / sector_mass if sector_mass > 0 else None
    return CorrelatorResult(raw, normalized, sector_mass)


# ---------------------------------------------------------------------------
# exact references (dense spin-space propagation)


@lru_cache(maxsize=None)
def _chain_setup(two_s: int, n_sites: int):
    lattice = two_site(Spin(two_s)) if n_sites == 2 else open_chain(n_sites, Spin(two_s))
    prop = Propagator(build_heisenberg(lattice))
    return lattice, prop


def exact_state(two_s: int, n_sites: int, initial: LatticeBasisState, t: float) -> np.ndarray:
    _, prop = _chain_setup(two_s, n_sites)
    psi0 = np.zeros(prop.dim, dtype=complex)
    psi0[initial.basis_index()] = 1.0
    return prop(psi0, t)


def exact_pair_populations(spin: Spin, initial: LatticeBasisState, t: float):
    """Final-state probabilities of the exact two-site dynamics, keyed by twoM tuple."""
    psi = exact_state(spin.twoS, 2, initial, t)
    probs = np.abs(psi) ** 2
    out = {}
    d = spin.dim
    for l1 in range(d):
        for l0 in range(d):
            tup = (2 * l1 - spin.twoS, 2 * l0 - spin.twoS)
            out[tup] = float(probs[l1 * d + l0])
    return out


def exact_szsz(two_s: int, n_sites: int, psi: np.ndarray, site_a: int, site_b: int) -> float:
    sz = spin_matrices(Spin(two_s))[0]
    op = site_operator(sz, site_a, n_sites) @ site_operator(sz, site_b, n_sites)
    return float(np.vdot(psi, op @ psi).real)


# ---------------------------------------------------------------------------
# Trotter discrepancy at t = 1 (two sites, Dicke mapping)


def _pair_states(spin: Spin):
    d = spin.dim
    return [
        LatticeBasisState((2 * l1 - spin.twoS, 2 * l0 - spin.twoS), spin)
        for l1 in range(d)
        for l0 in range(d)
    ]


def _fixed_quadratic_prefactor(ns, deltas):
    """Least-squares B for delta = B / N^2 in log space; None if any delta is 0."""
    if any(dv <= 0 for dv in deltas):
        return None
    logs = [math.log(dv) + 2.0 * math.log(nv) for nv, dv in zip(ns, deltas)]
    return float(math.exp(np.mean(logs)))


def _free_slope(ns, deltas):
    if len(ns) < 2 or any(dv <= 0 for dv in deltas):
        return None
    return fit_power_law(ns, deltas).b


def trotter_discrepancy(
    spin: Spin,
    n_steps_list=(2, 8, 32, 128, 512, 2048),
    noise: NoiseConfig | None = None,
    n_shots: int | None = None,
    seed: int = 0,
) -> DiscrepancyReport:
    """Average |p - p_exact| over all initial states and matching-M_tot finals.

    Final time is fixed at t = 1 (so dtau = 1/N_ST). Noise switches to the
    density-matrix backend; n_shots adds multinomial sampling on top.
    """
    lattice = two_site(spin)
    layout = EncodingLayout("dicke", spin, 2)
    ham = build_dicke(lattice)
    states = _pair_states(spin)
    z = zeta(spin)
    delta = {n: 0.0 for n in n_steps_list}
    delta_norm = {n: 0.0 for n in n_steps_list}
    for i_state in states:
        finals = [f for f in states if f.two_m_tot == i_state.two_m_tot]
        idxs = [encode_state(layout, f) for f in finals]
        exact = exact_pair_populations(spin, i_state, 1.0)
        p_ex = [exact[f.twoM] for f in finals]
        engine = None if noise is not None else DickeSectorEngine(ham, layout, i_state)
        for n in n_steps_list:
            plan = TrotterPlan(1.0 / n, n)
            if engine is not None:
                obj = engine.evolve(plan)
            else:
                circ = trotter_circuit(ham, layout, plan, initial=i_state, dress=True)
                obj = run_density_qubits(circ, 0, noise)
            if n_shots is not None:
                shot = sample_shots(obj, n_shots, seed + 7919 * n, layout)
                p = [shot.frequency(ix) for ix in idxs]
            else:
                pr = probabilities(obj)
                p = [float(pr[ix]) for ix in idxs]
            mass = sum(p)
            if mass <= 0:
                raise ValidationError("empty M_tot sector; normalization undefined")
            delta[n] += sum(abs(a - b) for a, b in zip(p, p_ex))
            delta_norm[n] += sum(abs(a / mass - b) for a, b in zip(p, p_ex))
    per_n = tuple((n, delta[n] / z, delta_norm[n] / z) for n in n_steps_list)
    ns = [row[0] for row in per_n]
    return DiscrepancyReport(
        per_n,
        _fixed_quadratic_prefactor(ns, [row[1] for row in per_n]),
        _fixed_quadratic_prefactor(ns, [row[2] for row in per_n]),
        _free_slope(ns, [row[1] for row in per_n]),
        _free_slope(ns, [row[2] for row in per_n]),
        mixed_baseline(spin)[0],
    )


def mixed_baseline(spin: Spin):
    """(discrepancy of the fully mixed register, per-pair mixed population)."""
    layout = EncodingLayout("dicke", spin, 2)
    p_mix = 1.0 / layout.register_dim
    states = _pair_states(spin)
    total = 0.0
    for i_state in states:
        exact = exact_pair_populations(spin, i_state, 1.0)
        for f in states:
            if f.two_m_tot == i_state.two_m_tot:
                total += abs(p_mix - exact[f.twoM])
    return total / zeta(spin), p_mix


def required_dtau(b: float, target_delta: float, t_final: float = 1.0) -> float:
    """Step size giving the target discrepancy after evolving to t_final."""
    if b is None or b <= 0:
        raise ValidationError("need a positive fitted prefactor")
    return math.sqrt(target_delta / (t_final * b))


def fit_inverse_s(s_values, dtaus) -> float:
    """Least-squares C with dtau = C / S."""
    s = np.asarray(s_values, dtype=float)
    d = np.asarray(dtaus, dtype=float)
    return float(np.sum(d / s) / np.sum(1.0 / s**2))


# ---------------------------------------------------------------------------
# two-site population series (the p0-vs-time pipelines)


TWO_SITE_T_CUTOFF = 3.2


def two_site_initial(spin: Spin) -> LatticeBasisState:
    """|M1 = -S, M0 = +S>."""
    return LatticeBasisState((-spin.twoS, spin.twoS), spin)


def exact_p0_series(spin: Spin, times) -> PopulationSeries:
    initial = two_site_initial(spin)
    idx = initial.basis_index()
    vals = []
    for t in times:
        psi = exact_state(spin.twoS, 2, initial, float(t))
        vals.append(float(abs(psi[idx]) ** 2))
    return PopulationSeries(tuple(float(t) for t in times), tuple(vals))


def p0_series(
    spin: Spin,
    mapping: str,
    dtau: float,
    n_steps_list,
    noise: NoiseConfig | None = None,
    n_shots: int | None = None,
    seed: int = 0,
) -> PopulationSeries:
    """Trotterized p0(t) on the t = dtau * N_ST grid for one mapping."""
    lattice = two_site(spin)
    layout = EncodingLayout(mapping, spin, 2)
    initial = two_site_initial(spin)
    if mapping == "qudit":
        ham = build_qudit(lattice)
        levels = ((initial.twoM_site(0) + spin.twoS) // 2, (initial.twoM_site(1) + spin.twoS) // 2)
    else:
        ham = {"compact": build_compact, "direct": build_direct, "dicke": build_dicke}[mapping](
            lattice
        )
    times = []
    values = []
    sigmas = [] if n_shots is not None else None
    for k, n in enumerate(n_steps_list):
        plan = TrotterPlan(dtau, int(n))
        if mapping == "qudit":
            obj = run_density_qudit(
                qudit_trotter_circuit(ham, plan), levels, noise or NoiseConfig(0.0, False)
            )
        elif noise is not None and noise.active:
            circ = trotter_circuit(ham, layout, plan, initial=initial)
            obj = run_density_qubits(circ, 0, noise)
        else:
            circ = trotter_circuit(ham, layout, plan, initial=initial)
            obj = run_statevector(circ)
        if n_shots is not None:
            shot = sample_shots(obj, n_shots, seed + 7919 * k, layout)
            values.append(initial_state_population(shot, layout, initial))
            sigmas.append(
                bootstrap_std(
                    shot, lambda sr: initial_state_population(sr, layout, initial), seed=seed + k
                )
            )
        else:
            values.append(initial_state_population(obj, layout, initial))
        times.append(plan.total_time if n else 0.0)
    return PopulationSeries(
        tuple(times), tuple(values), tuple(sigmas) if sigmas is not None else None
    )


# ---------------------------------------------------------------------------
# four-site chain pipeline


@dataclass(frozen=True)
class ChainResult:
    times: tuple[float, ...]
    raw: tuple[float, ...]
    normalized: tuple[float | None, ...]
    p_sector: tuple[float, ...]
    exact: tuple[float, ...]  # exact <Sz_0 Sz_3>
    pt2: tuple[float, ...]  # second-order perturbative reference


def chain_initial(spin: Spin) -> LatticeBasisState:
    """|M3=-S, M2=-S, M1=-S, M0=+S>, total magnetization -2S."""
    return LatticeBasisState((-spin.twoS, -spin.twoS, -spin.twoS, spin.twoS), spin)


def chain4_series(
    spin: Spin,
    n_steps_max: int,
    dtau: float = math.pi / 10,
    n_shots: int | None = None,
    seed: int = 0,
) -> ChainResult:
    """Correlator and sector population vs time for the four-site open chain."""
    lattice = open_chain(4, spin)
    layout = EncodingLayout("dicke", spin, 4)
    ham = build_dicke(lattice)
    initial = chain_initial(spin)
    engine = DickeSectorEngine(ham, layout, initial)
    s = spin.s
    times, raw, norm, psec, exact, pt2 = [], [], [], [], [], []
    for n in range(n_steps_max + 1):
        t = dtau * n
        psi = engine.evolve(TrotterPlan(dtau, n))
        obj = sample_shots(psi, n_shots, seed + 7919 * n, layout) if n_shots else psi
        res = correlator_SzSz(obj, layout, 0, 3, initial)
        psi_ex = exact_state(spin.twoS, 4, initial, t)
        times.append(t)
        raw.append(res.raw)
        norm.append(res.normalized)
        psec.append(res.p_sector)
        exact.append(exact_szsz(spin.twoS, 4, psi_ex, 0, 3))
        pt2.append((-1.0 + s * t * t) * s * s)
    return ChainResult(
        tuple(times), tuple(raw), tuple(norm), tuple(psec), tuple(exact), tuple(pt2)
    )
