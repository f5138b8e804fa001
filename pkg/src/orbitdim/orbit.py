"""Orbit dimensions as Gram-matrix ranks, with closed-form, genericity, and
witness oracles.

The orbit dimension of a state under one of the optical groups equals the
real rank of the generator directions at that state: {H_I |psi>} in the ket
picture, {[H_I, rho]} in the density pictures. Both ranks are evaluated as
the rank of the corresponding real symmetric Gram matrix, thresholded on its
eigenvalue spectrum.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fock import (
    DensityOperator,
    SparseKet,
    ValidationError,
    basis_ket,
    enumerate_occupations,
    inner,
    normalize,
    op_mul,
    op_trace,
    outer,
    real_inner,
    trace_product,
)
from .generators import (
    Group,
    LieBasis,
    apply_generator,
    commutator_with_density,
    left_apply_generator,
    lie_basis,
)

DEFAULT_RANK_TOL = 1e-8
NORM_TOL = 1e-10
_SYMMETRY_TOL = 1e-12
_PSD_FLOOR = 1e-9


class PictureError(ValueError):
    """State representation incompatible with the requested picture."""


class Picture(Enum):
    KET = "ket"
    KETBRA = "ketbra"
    MIXED = "mixed"


class Exactness(Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"


@dataclass(frozen=True)
class GramMatrix:
    """Real symmetric PSD matrix of generator-direction correlations."""

    group: Group
    picture: Picture
    modes: int
    values: np.ndarray
    basis: LieBasis

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        d = self.group.dimension(self.modes)
        if values.shape != (d, d):
            raise ValidationError(f"Gram matrix shape {values.shape} does not match dimension {d}")
        asym = float(np.max(np.abs(values - values.T))) if d else 0.0
        if asym > _SYMMETRY_TOL:
            raise ValidationError(f"Gram asymmetry {asym:.3e} exceeds {_SYMMETRY_TOL:.1e}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class RankResult:
    """Thresholded rank with the full spectrum and the tolerance actually used."""

    rank: int
    eigenvalues: tuple[float, ...]
    tolerance_used: float
    relative: bool


def _check_normalized(psi: SparseKet, norm_tol: float) -> None:
    nrm = psi.norm()
    if abs(nrm - 1.0) > norm_tol:
        raise ValidationError(f"state is not normalized: measured norm {nrm!r} (tol {norm_tol:.1e})")


def _stack_terms(vectors: Sequence[dict], keys: Sequence) -> np.ndarray:
    index = {key: i for i, key in enumerate(keys)}
    v = np.zeros((len(vectors), len(keys)), dtype=complex)
    for row, vec in enumerate(vectors):
        for key, amp in vec.items():
            v[row, index[key]] = amp
    return v


def _real_gram(vectors: Sequence[dict]) -> np.ndarray:
    """Symmetric matrix of Re <v_I, v_J> over the union support."""
    support = sorted(set().union(*vectors)) if vectors else []
    v = _stack_terms(vectors, support)
    g = (v.conj() @ v.T).real
    return (g + g.T) / 2.0


def gram_ket(group: Group, psi: SparseKet, *, norm_tol: float = NORM_TOL) -> GramMatrix:
    """Gram matrix of the ket-picture directions {H_I |psi>}."""
    _check_normalized(psi, norm_tol)
    basis = lie_basis(group, psi.modes)
    vectors = [apply_generator(g, psi).terms for g in basis.elements]
    return GramMatrix(group, Picture.KET, psi.modes, _real_gram(vectors), basis)


def gram_ketbra(group: Group, psi: SparseKet, *, norm_tol: float = NORM_TOL) -> GramMatrix:
    """Gram matrix of the projector-picture directions {[H_I, |psi><psi|]}."""
    _check_normalized(psi, norm_tol)
    basis = lie_basis(group, psi.modes)
    rho = outer(psi)
    vectors = [commutator_with_density(g, rho).entries for g in basis.elements]
    return GramMatrix(group, Picture.KETBRA, psi.modes, _real_gram(vectors), basis)


def gram_mixed(group: Group, rho: DensityOperator, *, method: str = "commutator") -> GramMatrix:
    """Gram matrix of the density-picture directions {[H_I, rho]}.

    ``method="commutator"`` stacks the commutators and takes Hilbert-Schmidt
    inner products (the primary path); ``method="trace"`` evaluates the
    equivalent second-moment trace form entry by entry (kept as an
    independent cross-check path).
    """
    if not isinstance(rho, DensityOperator):
        raise PictureError("gram_mixed requires a validated DensityOperator")
    basis = lie_basis(group, rho.modes)
    if method == "commutator":
        vectors = [commutator_with_density(g, rho).entries for g in basis.elements]
        values = _real_gram(vectors)
    elif method == "trace":
        values = _gram_mixed_trace(basis, rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GramMatrix(group, Picture.MIXED, rho.modes, values, basis)


def _gram_mixed_trace(basis: LieBasis, rho: DensityOperator) -> np.ndarray:
    """Entries 2 Tr[{H_I,H_J} rho^2] - 2 Tr[H_I rho H_J rho]."""
    d = len(basis)
    rho2 = op_mul(rho.op, rho.op)
    h_rho = [left_apply_generator(g, rho.op) for g in basis.elements]
    h_rho2 = [left_apply_generator(g, rho2) for g in basis.elements]
    values = np.zeros((d, d))
    for i in range(d):
        gi = basis.elements[i]
        for j in range(i, d):
            gj = basis.elements[j]
            tr_ij = op_trace(left_apply_generator(gi, h_rho2[j]))
            tr_ji = op_trace(left_apply_generator(gj, h_rho2[i]))
            tr_cross = trace_product(h_rho[i], h_rho[j])
            entry = (tr_ij + tr_ji - 2.0 * tr_cross).real
            values[i, j] = values[j, i] = entry
    return values


def gram_ket_expectation(group: Group, psi: SparseKet, *, norm_tol: float = NORM_TOL) -> np.ndarray:
    """Cross-check path for gram_ket: entries as anticommutator expectation
    values <psi| {H_I, H_J} |psi>, evaluated through sequential generator
    applications."""
    _check_normalized(psi, norm_tol)
    basis = lie_basis(group, psi.modes)
    applied = [apply_generator(g, psi) for g in basis.elements]
    d = len(basis)
    values = np.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            ij = inner(psi, apply_generator(basis.elements[i], applied[j]))
            ji = inner(psi, apply_generator(basis.elements[j], applied[i]))
            values[i, j] = values[j, i] = 0.5 * (ij + ji).real
    return values


def gram_ketbra_covariance(group: Group, psi: SparseKet, *, norm_tol: float = NORM_TOL) -> np.ndarray:
    """Cross-check path for gram_ketbra: entries as twice the symmetrized
    covariance 2(E[{H_I,H_J}] - E[H_I] E[H_J])."""
    basis = lie_basis(group, psi.modes)
    anticomm = gram_ket_expectation(group, psi, norm_tol=norm_tol)
    means = np.array([real_inner(psi, apply_generator(g, psi)) for g in basis.elements])
    return 2.0 * (anticomm - np.outer(means, means))


def generator_expectations(group: Group, psi: SparseKet) -> np.ndarray:
    """The expectation values E[H_I] in basis order."""
    basis = lie_basis(group, psi.modes)
    return np.array([real_inner(psi, apply_generator(g, psi)) for g in basis.elements])


def rank_psd(gram: GramMatrix | np.ndarray, tolerance: float | None = None) -> RankResult:
    """Eigenvalue-thresholded rank of a symmetric PSD matrix.

    The default tolerance is ``1e-8 * max(1, lambda_max)`` (relative with an
    absolute floor); passing ``tolerance`` uses it as an absolute threshold.
    The full descending spectrum is returned so callers can re-threshold.
    """
    values = gram.values if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=float)
    if np.isnan(values).any():
        raise ValidationError("Gram matrix contains NaN entries")
    eigs = np.linalg.eigvalsh(values)
    lam_max = float(eigs[-1]) if eigs.size else 0.0
    floor = -_PSD_FLOOR * max(1.0, lam_max)
    if eigs.size and float(eigs[0]) < floor:
        raise ValidationError(
            f"matrix is not PSD within tolerance: min eigenvalue {eigs[0]:.3e} < {floor:.3e}"
        )
    if tolerance is None:
        tol = DEFAULT_RANK_TOL * max(1.0, lam_max)
        relative = True
    else:
        tol = float(tolerance)
        relative = False
    rank = int(np.count_nonzero(eigs > tol))
    return RankResult(
        rank=rank,
        eigenvalues=tuple(float(x) for x in eigs[::-1]),
        tolerance_used=tol,
        relative=relative,
    )


def gram_matrix(
    group: Group,
    state: SparseKet | DensityOperator,
    picture: Picture,
    *,
    norm_tol: float = NORM_TOL,
) -> GramMatrix:
    """Dispatch to the Gram construction matching ``picture``.

    Kets are accepted in every picture (the mixed picture lifts them to the
    projector); density operators only in the mixed picture.
    """
    if picture is Picture.KET:
        if not isinstance(state, SparseKet):
            raise PictureError("the ket picture requires a pure-state ket")
        return gram_ket(group, state, norm_tol=norm_tol)
    if picture is Picture.KETBRA:
        if not isinstance(state, SparseKet):
            raise PictureError("the ketbra picture requires a pure-state ket")
        return gram_ketbra(group, state, norm_tol=norm_tol)
    if picture is Picture.MIXED:
        if isinstance(state, SparseKet):
            _check_normalized(state, norm_tol)
            return gram_mixed(group, outer(state))
        if isinstance(state, DensityOperator):
            return gram_mixed(group, state)
        raise PictureError("the mixed picture requires a ket or a DensityOperator")
    raise PictureError(f"unknown picture {picture!r}")


def orbit_dimension(
    group: Group,
    state: SparseKet | DensityOperator,
    picture: Picture,
    tolerance: float | None = None,
) -> RankResult:
    """Orbit dimension of ``state`` under ``group`` in the given picture."""
    return rank_psd(gram_matrix(group, state, picture), tolerance)


# --------------------------------------------------------------------------
# Structured state families with closed-form dimensions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FockBasisState:
    """A single occupation-number basis state |n1, ..., nm>."""

    occupation: tuple[int, ...]

    def __post_init__(self) -> None:
        occ = tuple(int(n) for n in self.occupation)
        if not occ or any(n < 0 for n in occ):
            raise ValidationError(f"invalid occupation {self.occupation!r}")
        object.__setattr__(self, "occupation", occ)

    @property
    def modes(self) -> int:
        return len(self.occupation)

    @property
    def unoccupied(self) -> int:
        return sum(1 for n in self.occupation if n == 0)

    def to_ket(self) -> SparseKet:
        return basis_ket(self.occupation)

    @property
    def params_label(self) -> str:
        return "occ=" + ",".join(str(n) for n in self.occupation)


@dataclass(frozen=True)
class OneModeSuperposition:
    """(sum_n alpha_n |n>) on mode 1, tensored with a Fock product on the
    remaining modes. At least two nonzero amplitudes are required."""

    amplitudes: tuple[complex, ...]
    tail: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        amps = tuple(complex(a) for a in self.amplitudes)
        tail = tuple(int(n) for n in self.tail)
        if sum(1 for a in amps if a != 0) < 2:
            raise ValidationError("a one-mode superposition needs at least two nonzero terms")
        if any(n < 0 for n in tail):
            raise ValidationError(f"invalid tail {self.tail!r}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tail", tail)

    @property
    def modes(self) -> int:
        return 1 + len(self.tail)

    @property
    def unoccupied(self) -> int:
        return sum(1 for n in self.tail if n == 0)

    def to_ket(self) -> SparseKet:
        terms = {
            (n, *self.tail): amp
            for n, amp in enumerate(self.amplitudes)
            if amp != 0
        }
        return normalize(SparseKet(self.modes, terms))

    @property
    def params_label(self) -> str:
        amps = ";".join(f"{a.real:g}{a.imag:+g}j" for a in self.amplitudes)
        tail = ",".join(str(n) for n in self.tail)
        return f"amps={amps}|tail={tail}"


@dataclass(frozen=True)
class NoonState:
    """(|N,0> + |0,N>) / sqrt(2) on the first two modes, tensored with a
    Fock product tail."""

    photons: int
    tail: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.photons < 1:
            raise ValidationError("NOON photon number must be >= 1")
        tail = tuple(int(n) for n in self.tail)
        if any(n < 0 for n in tail):
            raise ValidationError(f"invalid tail {self.tail!r}")
        object.__setattr__(self, "tail", tail)

    @property
    def modes(self) -> int:
        return 2 + len(self.tail)

    @property
    def unoccupied(self) -> int:
        return sum(1 for n in self.tail if n == 0)

    def to_ket(self) -> SparseKet:
        amp = 1.0 / math.sqrt(2.0)
        return SparseKet(
            self.modes,
            {
                (self.photons, 0, *self.tail): amp,
                (0, self.photons, *self.tail): amp,
            },
        )

    @property
    def params_label(self) -> str:
        tail = ",".join(str(n) for n in self.tail)
        return f"N={self.photons}|tail={tail}"


StateFamily = FockBasisState | OneModeSuperposition | NoonState


@dataclass(frozen=True)
class ClosedFormValue:
    value: int
    exactness: Exactness


_GROUP_BASE = {
    Group.PLO: lambda m: m * (m - 1),
    Group.DPLO: lambda m: m * (m + 1),
    Group.ALO: lambda m: 2 * m * m,
    Group.GO: lambda m: 2 * m * (m + 1),
}


def closed_form(family: StateFamily, group: Group, picture: Picture) -> ClosedFormValue:
    """Closed-form orbit dimension for the structured families.

    The ket picture adds one to most entries (the global-phase direction);
    UPPER_BOUND marks the one-mode-superposition cells for which only an
    analytic upper bound is known.
    """
    if picture is Picture.MIXED:
        raise ValidationError("closed forms cover the pure-state pictures only")
    delta = 1 if picture is Picture.KET else 0
    m = family.modes
    u = family.unoccupied
    base = _GROUP_BASE[group](m) - u * (u - 1)
    if isinstance(family, FockBasisState):
        if group in (Group.PLO, Group.ALO):
            return ClosedFormValue(base + delta * (1 if u != m else 0), Exactness.EXACT)
        return ClosedFormValue(base + delta, Exactness.EXACT)
    if isinstance(family, OneModeSuperposition):
        if group is Group.PLO:
            return ClosedFormValue(base + 1, Exactness.EXACT)
        return ClosedFormValue(base + 1 + delta, Exactness.UPPER_BOUND)
    if isinstance(family, NoonState):
        if family.photons < 3:
            raise ValidationError("the NOON closed form requires at least 3 photons")
        return ClosedFormValue(base + 1 + delta, Exactness.EXACT)
    raise TypeError(f"unknown family {family!r}")


def generic_dimension(group: Group, m: int, n_cutoff: int, picture: Picture) -> int:
    """Orbit dimension attained with probability one by a uniformly random
    state on the unit sphere of the photon-number-cutoff subspace."""
    if m < 1:
        raise ValueError("mode count must be >= 1")
    if n_cutoff < 0:
        raise ValueError("photon cutoff must be >= 0")
    value = group.dimension(m)
    if n_cutoff == 0:
        value -= m * m
    elif n_cutoff == 1:
        value -= (m - 1) * (m - 1)
    if picture in (Picture.KETBRA, Picture.MIXED) and group in (Group.DPLO, Group.GO):
        value -= 1  # the identity commutes with every density operator
    return value


def uniform_phase_state(m: int, n_cutoff: int) -> SparseKet:
    """Uniform superposition of every basis state with at most min(2, N)
    photons, the j-th term (lexicographic order, 1-based) carrying phase
    exp(2 pi i j / J)."""
    occs = enumerate_occupations(m, min(2, n_cutoff))
    j_count = len(occs)
    amp = 1.0 / math.sqrt(j_count)
    terms = {
        occ: amp * cmath.exp(2j * math.pi * (j + 1) / j_count)
        for j, occ in enumerate(occs)
    }
    return SparseKet(m, terms)


@dataclass(frozen=True)
class WitnessResult:
    dimension: int
    threshold: int
    witnessed: bool
    rank: RankResult


def nongaussianity_witness(psi: SparseKet, tolerance: float | None = None) -> WitnessResult:
    """Witness non-Gaussianity of a pure state: its projector-picture orbit
    dimension under the full Gaussian group exceeds m(m+3) only for
    non-Gaussian states (every Gaussian pure state sits in the vacuum orbit,
    whose dimension is exactly m(m+3))."""
    result = orbit_dimension(Group.GO, psi, Picture.KETBRA, tolerance)
    threshold = psi.modes * (psi.modes + 3)
    return WitnessResult(
        dimension=result.rank,
        threshold=threshold,
        witnessed=result.rank > threshold,
        rank=result,
    )


@dataclass(frozen=True)
class CnotReport:
    group: Group
    dim_plus_zero: int
    dim_bell: int
    distinct: bool

    @property
    def verdict(self) -> str:
        if self.distinct:
            return (
                "input and output lie in different orbits: no deterministic "
                f"{self.group.value.upper()} unitary implements the dual-rail CNOT"
            )
        return "orbit dimensions agree: no obstruction from this invariant"


def cnot_separable_input() -> SparseKet:
    """Dual-rail |+0>_L = (|1,0,1,0> + |1,0,0,1>) / sqrt(2)."""
    amp = 1.0 / math.sqrt(2.0)
    return SparseKet(4, {(1, 0, 1, 0): amp, (1, 0, 0, 1): amp})


def cnot_entangled_output() -> SparseKet:
    """Dual-rail |Phi+>_L = (|1,0,1,0> + |0,1,0,1>) / sqrt(2)."""
    amp = 1.0 / math.sqrt(2.0)
    return SparseKet(4, {(1, 0, 1, 0): amp, (0, 1, 0, 1): amp})


def cnot_demo(group: Group = Group.GO, tolerance: float | None = None) -> CnotReport:
    """Compare the projector-picture orbit dimensions of the dual-rail CNOT
    input |+0>_L and output |Phi+>_L; distinct values rule out a
    deterministic CNOT inside the group."""
    dim_in = orbit_dimension(group, cnot_separable_input(), Picture.KETBRA, tolerance).rank
    dim_out = orbit_dimension(group, cnot_entangled_output(), Picture.KETBRA, tolerance).rank
    return CnotReport(
        group=group,
        dim_plus_zero=dim_in,
        dim_bell=dim_out,
        distinct=dim_in != dim_out,
    )


# --------------------------------------------------------------------------
# Closed-form verification grid
# --------------------------------------------------------------------------


def _fock_patterns(m: int) -> list[tuple[int, ...]]:
    fill = [1, 2, 3]
    patterns: list[tuple[int, ...]] = []
    for u in range(m + 1):
        occupied = [fill[i % 3] for i in range(m - u)]
        patterns.append(tuple([0] * u + occupied))
        if 0 < u < m:
            patterns.append(tuple(occupied + [0] * u))
    patterns.append(tuple(fill[(i + 1) % 3] for i in range(m)))
    patterns.append((3,) * m)
    seen: set[tuple[int, ...]] = set()
    unique = []
    for occ in patterns:
        if occ not in seen:
            seen.add(occ)
            unique.append(occ)
    return unique


def _tails(length: int) -> list[tuple[int, ...]]:
    tails = [(0,) * length]
    if length > 0:
        tails.append(tuple([1, 2][i % 2] for i in range(length)))
    if length > 1:
        tails.append(tuple([1 if i == 0 else 0 for i in range(length)]))
    seen: set[tuple[int, ...]] = set()
    unique = []
    for t in tails:
        if t not in seen:
            seen.add(t)
            unique.append(t)
    return unique


_SUPERPOSITION_AMPLITUDES: tuple[tuple[complex, ...], ...] = (
    (1.0, 1.0),
    (0.7, 0.5, -0.5j),
    (0.5, 0.5j, -0.5, 0.5),
)


def table_families(m_max: int = 4) -> list[StateFamily]:
    """Deterministic verification grid over the three structured families:
    Fock patterns covering every unoccupied count u at each mode number,
    NOON states with 3 to 5 photons and assorted tails, and one-mode
    superpositions of 2 to 4 terms."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    families: list[StateFamily] = []
    for m in range(1, m_max + 1):
        families.extend(FockBasisState(occ) for occ in _fock_patterns(m))
    for m in range(1, m_max + 1):
        for amps in _SUPERPOSITION_AMPLITUDES:
            for tail in _tails(m - 1):
                families.append(OneModeSuperposition(amps, tail))
    for m in range(2, m_max + 1):
        for photons in (3, 4, 5):
            for tail in _tails(m - 2):
                families.append(NoonState(photons, tail))
    return families


@dataclass(frozen=True)
class TableRow:
    family: str
    params: str
    group: Group
    picture: Picture
    modes: int
    closed_value: int
    exactness: Exactness
    numerical: int
    passed: bool


def closed_form_report(
    m_max: int = 4,
    tolerance: float | None = None,
    families: Sequence[StateFamily] | None = None,
) -> list[TableRow]:
    """Numerically recompute the closed-form grid: exact cells must match,
    upper-bound cells must dominate the numerical value."""
    if families is None:
        families = table_families(m_max)
    rows: list[TableRow] = []
    for family in families:
        psi = family.to_ket()
        for group in Group:
            for picture in (Picture.KET, Picture.KETBRA):
                expected = closed_form(family, group, picture)
                numerical = orbit_dimension(group, psi, picture, tolerance).rank
                if expected.exactness is Exactness.EXACT:
                    passed = numerical == expected.value
                else:
                    passed = numerical <= expected.value
                rows.append(
                    TableRow(
                        family=type(family).__name__,
                        params=family.params_label,
                        group=group,
                        picture=picture,
                        modes=family.modes,
                        closed_value=expected.value,
                        exactness=expected.exactness,
                        numerical=numerical,
                        passed=passed,
                    )
                )
    return rows
