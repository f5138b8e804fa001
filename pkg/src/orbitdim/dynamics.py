"""Truncated-space time evolution, two-copy overlap curves, finite-difference
Gram estimation, and seeded random state sampling.

Evolution exponentiates the generator Hamiltonian projected onto a
photon-number-truncated basis, via Hermitian eigendecomposition, so it is
exactly unitary on the working space. Photon-number-shifting generators get
a configurable buffer of extra photons above the state's support; occupancy
of the top two sectors of the working basis (the guard band) is the
truncation-leakage proxy, checked together with trace and Hermiticity
deviations and never silently accepted.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .fock import (
    DensityOperator,
    Occupation,
    SparseKet,
    SparseOperator,
    ValidationError,
    add,
    basis_ket,
    enumerate_occupations,
    normalize,
    scale,
)
from .generators import (
    GeneratorDescriptor,
    Group,
    apply_generator,
    lie_basis,
    number_shift,
)

_IMAG_RESIDUE_TOL = 1e-12


class LeakageError(RuntimeError):
    """Truncated evolution left too much weight near the cutoff boundary."""


@dataclass(frozen=True)
class TruncatedBasis:
    """Bijective map between occupation vectors of at most ``cutoff`` total
    photons (lexicographic order) and dense indices."""

    modes: int
    cutoff: int
    states: tuple[Occupation, ...]
    index: dict[Occupation, int]

    @classmethod
    def build(cls, modes: int, cutoff: int) -> "TruncatedBasis":
        states = tuple(enumerate_occupations(modes, cutoff))
        index = {occ: i for i, occ in enumerate(states)}
        return cls(modes=modes, cutoff=cutoff, states=states, index=index)

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class EvolutionConfig:
    """Knobs of the truncated evolution: extra photons above the state's
    support, the tolerated boundary/trace deviation, and the default
    finite-difference step."""

    buffer: int = 16
    leakage_tolerance: float = 1e-6
    step: float = 1e-3

    def __post_init__(self) -> None:
        if self.buffer < 0:
            raise ValueError("buffer must be >= 0")
        if self.leakage_tolerance <= 0 or self.step <= 0:
            raise ValueError("tolerances and step must be positive")


@dataclass(frozen=True)
class BetaSample:
    """One overlap sample beta_{I,J}(t); index 0 means the unevolved copy."""

    i: int
    j: int
    t: float
    value: float


def dense_hamiltonian(g: GeneratorDescriptor, basis: TruncatedBasis) -> np.ndarray:
    """Matrix elements <n|H|n'> of the generator over the truncated basis.

    Couplings into states above the cutoff are dropped on both sides, so the
    projected matrix is Hermitian by construction.
    """
    h = np.zeros((basis.size, basis.size), dtype=complex)
    for col, occ in enumerate(basis.states):
        for target, amp in apply_generator(g, basis_ket(occ)).terms.items():
            row = basis.index.get(target)
            if row is not None:
                h[row, col] = amp
    return h


class _Propagator:
    """Cached eigendecomposition of one projected generator."""

    def __init__(self, g: GeneratorDescriptor, basis: TruncatedBasis) -> None:
        h = dense_hamiltonian(g, basis)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(h)

    def unitary(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T


def _dense_operator(op: SparseOperator, basis: TruncatedBasis) -> np.ndarray:
    r = np.zeros((basis.size, basis.size), dtype=complex)
    for (bra, ket), amp in op.entries.items():
        r[basis.index[bra], basis.index[ket]] = amp
    return r


def _sparse_operator(dense: np.ndarray, basis: TruncatedBasis) -> SparseOperator:
    entries = {}
    rows, cols = np.nonzero(dense)
    for i, j in zip(rows.tolist(), cols.tolist()):
        entries[(basis.states[i], basis.states[j])] = complex(dense[i, j])
    return SparseOperator(basis.modes, entries)


def _guard_band_mask(basis: TruncatedBasis) -> np.ndarray:
    totals = np.array([sum(occ) for occ in basis.states])
    return totals > basis.cutoff - 2


def _check_density_leakage(
    dense: np.ndarray,
    basis: TruncatedBasis,
    cfg: EvolutionConfig,
    *,
    shifting: bool,
    context: str,
) -> None:
    trace_dev = abs(np.trace(dense) - 1.0)
    herm_dev = float(np.max(np.abs(dense - dense.conj().T))) if dense.size else 0.0
    boundary = 0.0
    if shifting:
        boundary = float(np.sum(np.real(np.diag(dense))[_guard_band_mask(basis)]))
    worst = max(trace_dev, herm_dev, boundary)
    if worst > cfg.leakage_tolerance:
        raise LeakageError(
            f"{context}: trace deviation {trace_dev:.3e}, hermiticity {herm_dev:.3e}, "
            f"boundary weight {boundary:.3e} exceed tolerance {cfg.leakage_tolerance:.1e} "
            f"(cutoff {basis.cutoff}); increase the buffer or reduce |t|"
        )


def evolve_density(
    rho: DensityOperator,
    g: GeneratorDescriptor,
    t: float,
    cfg: EvolutionConfig = EvolutionConfig(),
) -> DensityOperator:
    """Conjugate rho by exp(-iHt) on the truncated working basis."""
    if t == 0.0:
        return rho
    shifting = g.kind != "I" and number_shift(g.kind) > 0
    cutoff = rho.op.max_total() + (cfg.buffer if shifting else 0)
    basis = TruncatedBasis.build(rho.modes, cutoff)
    u = _Propagator(g, basis).unitary(t)
    dense = u @ _dense_operator(rho.op, basis) @ u.conj().T
    _check_density_leakage(
        dense, basis, cfg, shifting=shifting,
        context=f"evolving under {g.label} for t={t:g}",
    )
    return DensityOperator.validate(_sparse_operator(dense, basis))


class _DensityWorkspace:
    """Shared basis, propagators, and evolved-copy cache for one (rho, group)."""

    def __init__(self, rho: DensityOperator, group: Group, cfg: EvolutionConfig) -> None:
        self.cfg = cfg
        self.basis_elements = lie_basis(group, rho.modes).elements
        self.shifting = any(number_shift(g.kind) > 0 for g in self.basis_elements)
        cutoff = rho.op.max_total() + (cfg.buffer if self.shifting else 0)
        self.basis = TruncatedBasis.build(rho.modes, cutoff)
        self.initial = _dense_operator(rho.op, self.basis)
        self.purity = float(np.vdot(self.initial, self.initial).real)
        self._propagators: dict[int, _Propagator] = {}
        self._evolved: dict[tuple[int, float], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return len(self.basis_elements)

    def evolved(self, index: int, t: float) -> np.ndarray:
        if not 0 <= index <= self.dim:
            raise ValueError(f"generator index {index} out of range 0..{self.dim}")
        if index == 0 or t == 0.0:
            return self.initial
        key = (index, t)
        cached = self._evolved.get(key)
        if cached is not None:
            return cached
        prop = self._propagators.get(index)
        if prop is None:
            prop = _Propagator(self.basis_elements[index - 1], self.basis)
            self._propagators[index] = prop
        u = prop.unitary(t)
        dense = u @ self.initial @ u.conj().T
        g = self.basis_elements[index - 1]
        _check_density_leakage(
            dense, self.basis, self.cfg,
            shifting=number_shift(g.kind) > 0,
            context=f"evolving under {g.label} for t={t:g}",
        )
        self._evolved[key] = dense
        return dense

    def beta(self, i: int, j: int, t: float) -> float:
        value = np.vdot(self.evolved(i, t), self.evolved(j, t))
        if abs(value.imag) > _IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
            raise ValidationError(f"beta overlap has imaginary residue {value.imag:.3e}")
        return float(value.real)


def beta(
    rho: DensityOperator,
    i: int,
    j: int,
    t: float,
    group: Group,
    cfg: EvolutionConfig = EvolutionConfig(),
) -> float:
    """Hilbert-Schmidt overlap of two evolved copies of rho, the copies
    driven by basis generators ``i`` and ``j`` (1-based; 0 = no evolution)."""
    return _DensityWorkspace(rho, group, cfg).beta(i, j, t)


def beta_sample(
    rho: DensityOperator,
    i: int,
    j: int,
    t: float,
    group: Group,
    cfg: EvolutionConfig = EvolutionConfig(),
) -> BetaSample:
    return BetaSample(i=i, j=j, t=t, value=beta(rho, i, j, t, group, cfg))


@dataclass(frozen=True)
class GramEntryEstimate:
    """Finite-difference estimate of one Gram entry: the Richardson value
    plus both raw central-stencil values it was built from."""

    value: float
    coarse: float
    fine: float
    step: float


def _second_derivative(ws: _DensityWorkspace, i: int, j: int, h: float) -> float:
    return (ws.beta(i, j, h) - 2.0 * ws.purity + ws.beta(i, j, -h)) / (h * h)


def _entry_at_step(ws: _DensityWorkspace, i: int, j: int, h: float) -> float:
    dd_ij = _second_derivative(ws, i, j, h)
    dd_i0 = _second_derivative(ws, i, 0, h)
    dd_0j = _second_derivative(ws, 0, j, h)
    return 0.5 * (dd_ij - dd_i0 - dd_0j)


def _estimate_entry(ws: _DensityWorkspace, i: int, j: int, h: float) -> GramEntryEstimate:
    coarse = _entry_at_step(ws, i, j, h)
    fine = _entry_at_step(ws, i, j, h / 2.0)
    return GramEntryEstimate(
        value=(4.0 * fine - coarse) / 3.0,
        coarse=coarse,
        fine=fine,
        step=h,
    )


def estimate_gram_entry(
    rho: DensityOperator,
    i: int,
    j: int,
    group: Group,
    cfg: EvolutionConfig = EvolutionConfig(),
) -> GramEntryEstimate:
    """Estimate one Gram entry from second time derivatives of the overlap
    curves: (d2 beta_ij - d2 beta_i0 - d2 beta_0j) / 2 at t = 0, each
    derivative from the central stencil at the configured step, with one
    Richardson step (h and h/2) applied by default."""
    ws = _DensityWorkspace(rho, group, cfg)
    if not (1 <= i <= ws.dim and 1 <= j <= ws.dim):
        raise ValueError(f"generator indices must lie in 1..{ws.dim}")
    return _estimate_entry(ws, i, j, cfg.step)


@dataclass(frozen=True)
class EstimatedGram:
    group: Group
    modes: int
    step: float
    values: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray


def estimate_gram_matrix(
    rho: DensityOperator,
    group: Group,
    cfg: EvolutionConfig = EvolutionConfig(),
) -> EstimatedGram:
    """Estimate the whole Gram matrix; entries are symmetric because the
    overlap curves are symmetric in their two indices."""
    ws = _DensityWorkspace(rho, group, cfg)
    d = ws.dim
    values = np.zeros((d, d))
    coarse = np.zeros((d, d))
    fine = np.zeros((d, d))
    for i in range(1, d + 1):
        for j in range(i, d + 1):
            est = _estimate_entry(ws, i, j, cfg.step)
            values[i - 1, j - 1] = values[j - 1, i - 1] = est.value
            coarse[i - 1, j - 1] = coarse[j - 1, i - 1] = est.coarse
            fine[i - 1, j - 1] = fine[j - 1, i - 1] = est.fine
    return EstimatedGram(group=group, modes=rho.modes, step=cfg.step, values=values, coarse=coarse, fine=fine)


def sample_sphere_state(m: int, n_cutoff: int, seed: int) -> SparseKet:
    """Uniformly random state on the unit sphere of the cutoff subspace:
    independent standard complex Gaussian amplitudes per basis element
    (lexicographic order), then normalized. Deterministic under the seed."""
    occs = enumerate_occupations(m, n_cutoff)
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(len(occs)) + 1j * rng.standard_normal(len(occs))
    amps /= np.linalg.norm(amps)
    return SparseKet(m, {occ: complex(a) for occ, a in zip(occs, amps)})


def apply_group_word(
    psi: SparseKet,
    word: Sequence[tuple[GeneratorDescriptor, float]],
    cfg: EvolutionConfig = EvolutionConfig(),
) -> SparseKet:
    """Apply exp(-i t_1 H_1) ... exp(-i t_a H_a) to the ket, rightmost factor
    first. Photon-number-preserving words are sector-exact; shifting words
    are guard-band checked after every factor."""
    if not word:
        return psi
    if psi.is_zero():
        raise ValidationError("cannot evolve the zero ket")
    shifting = any(number_shift(g.kind) > 0 for g, _ in word)
    cutoff = psi.max_total() + (cfg.buffer if shifting else 0)
    basis = TruncatedBasis.build(psi.modes, cutoff)
    vec = np.zeros(basis.size, dtype=complex)
    for occ, amp in psi.terms.items():
        vec[basis.index[occ]] = amp
    norm0 = float(np.linalg.norm(vec))
    propagators: dict[GeneratorDescriptor, _Propagator] = {}
    band = _guard_band_mask(basis)
    for g, t in reversed(list(word)):
        if t == 0.0:
            continue
        prop = propagators.get(g)
        if prop is None:
            prop = _Propagator(g, basis)
            propagators[g] = prop
        vec = prop.unitary(t) @ vec
        if shifting:
            boundary = float(np.sum(np.abs(vec[band]) ** 2))
            if boundary > cfg.leakage_tolerance:
                raise LeakageError(
                    f"group word factor {g.label} (t={t:g}) pushed weight {boundary:.3e} "
                    f"into the guard band (cutoff {basis.cutoff}, tol {cfg.leakage_tolerance:.1e})"
                )
    norm_dev = abs(float(np.linalg.norm(vec)) - norm0)
    if norm_dev > cfg.leakage_tolerance:
        raise LeakageError(f"group word changed the norm by {norm_dev:.3e}")
    terms = {basis.states[k]: complex(vec[k]) for k in np.nonzero(vec)[0].tolist()}
    return SparseKet(psi.modes, terms)


def perturb_state(
    psi: SparseKet,
    eps: float,
    n_cutoff: int,
    seed: int,
    m: int | None = None,
) -> SparseKet:
    """normalize(psi + eps * chi) for a seeded sphere sample chi on the
    cutoff subspace; eps = 0 returns psi unchanged."""
    if m is not None and m != psi.modes:
        raise ValueError(f"mode count {m} does not match the ket ({psi.modes})")
    if eps == 0.0:
        return psi
    chi = sample_sphere_state(psi.modes, n_cutoff, seed)
    return normalize(add(psi, scale(eps, chi)))
