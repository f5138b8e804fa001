"""Quadratic Hamiltonians of linear and Gaussian optics, their Lie-algebra
bases per group, and a numerical closure check.

Generator catalogue (1-based mode indices, k < l for two-mode kinds):

    e[k,l]  (a+_k a_l + a+_l a_k) / 2        beam splitter (pi/2 phase)
    E[k,l]  i (a+_k a_l - a+_l a_k) / 2      beam splitter
    r[k,l]  (a+_k a+_l + a_k a_l) / 2        two-mode squeezer
    R[k,l]  i (a+_k a+_l - a_k a_l) / 2      two-mode squeezer
    N[k]    a+_k a_k                         phase shifter
    s[k]    (a+_k^2 + a_k^2) / 2             single-mode squeezer
    S[k]    i (a+_k^2 - a_k^2) / 2           single-mode squeezer
    q[k]    (a+_k + a_k) / sqrt(2)           displacement (position)
    p[k]    i (a+_k - a_k) / sqrt(2)         displacement (momentum)
    id      identity

Each group's basis is ordered canonically: e pairs in lexicographic (k, l)
order, then E pairs, then N, then (when present) q, p, identity, then (when
present) r, R, s, S. The ordering fixes matrix layouts everywhere; it never
affects ranks.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fock import (
    DensityOperator,
    Occupation,
    SparseKet,
    SparseOperator,
    add,
    apply_annihilation,
    apply_creation,
    basis_ket,
    dagger,
    enumerate_occupations,
    op_add,
    op_scale,
    scale,
)

_SQRT_HALF = 1.0 / math.sqrt(2.0)

TWO_MODE_KINDS = frozenset({"e", "E", "r", "R"})
ONE_MODE_KINDS = frozenset({"N", "s", "S", "q", "p"})
IDENTITY_KIND = "I"

#: Largest change in total photon number a single application can cause.
_NUMBER_SHIFT = {
    "e": 0, "E": 0, "N": 0, IDENTITY_KIND: 0,
    "q": 1, "p": 1,
    "r": 2, "R": 2, "s": 2, "S": 2,
}


def number_shift(kind: str) -> int:
    return _NUMBER_SHIFT[kind]


@dataclass(frozen=True)
class GeneratorDescriptor:
    """Symbolic tag plus mode indices identifying one Hamiltonian."""

    kind: str
    modes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind in TWO_MODE_KINDS:
            if len(self.modes) != 2 or not self.modes[0] < self.modes[1] or self.modes[0] < 1:
                raise ValueError(f"{self.kind} requires mode indices 1 <= k < l, got {self.modes}")
        elif self.kind in ONE_MODE_KINDS:
            if len(self.modes) != 1 or self.modes[0] < 1:
                raise ValueError(f"{self.kind} requires one mode index >= 1, got {self.modes}")
        elif self.kind == IDENTITY_KIND:
            if self.modes:
                raise ValueError("the identity carries no mode indices")
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == IDENTITY_KIND:
            return "id"
        return f"{self.kind}[{','.join(str(k) for k in self.modes)}]"


class Group(Enum):
    """The four optical unitary groups."""

    PLO = "plo"
    DPLO = "dplo"
    ALO = "alo"
    GO = "go"

    def dimension(self, m: int) -> int:
        if m < 1:
            raise ValueError("mode count must be >= 1")
        return {
            Group.PLO: m * m,
            Group.DPLO: m * m + 2 * m + 1,
            Group.ALO: 2 * m * m + m,
            Group.GO: 2 * m * m + 3 * m + 1,
        }[self]


@dataclass(frozen=True)
class LieBasis:
    """Ordered Lie-algebra basis (as Hermitian generators H_I; the algebra
    elements are iH_I) for one group at a fixed mode count."""

    group: Group
    modes: int
    elements: tuple[GeneratorDescriptor, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.elements)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


def _pairs(m: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(1, m) for l in range(k + 1, m + 1)]


def lie_basis(group: Group, m: int) -> LieBasis:
    """The canonical ordered basis for (group, m); its length equals
    ``group.dimension(m)``."""
    if m < 1:
        raise ValueError("mode count must be >= 1")
    pairs = _pairs(m)
    singles = range(1, m + 1)
    elements: list[GeneratorDescriptor] = []
    elements += [GeneratorDescriptor("e", kl) for kl in pairs]
    elements += [GeneratorDescriptor("E", kl) for kl in pairs]
    elements += [GeneratorDescriptor("N", (k,)) for k in singles]
    if group in (Group.DPLO, Group.GO):
        elements += [GeneratorDescriptor("q", (k,)) for k in singles]
        elements += [GeneratorDescriptor("p", (k,)) for k in singles]
        elements.append(GeneratorDescriptor(IDENTITY_KIND))
    if group in (Group.ALO, Group.GO):
        elements += [GeneratorDescriptor("r", kl) for kl in pairs]
        elements += [GeneratorDescriptor("R", kl) for kl in pairs]
        elements += [GeneratorDescriptor("s", (k,)) for k in singles]
        elements += [GeneratorDescriptor("S", (k,)) for k in singles]
    basis = LieBasis(group=group, modes=m, elements=tuple(elements))
    assert len(basis) == group.dimension(m)
    return basis


def apply_generator(g: GeneratorDescriptor, psi: SparseKet) -> SparseKet:
    """H psi for the Hermitian generator described by ``g``, built by
    composing ladder-operator applications."""
    kind = g.kind
    if kind == IDENTITY_KIND:
        return psi
    if kind == "N":
        (k,) = g.modes
        return apply_creation(k, apply_annihilation(k, psi))
    if kind in ("e", "E"):
        k, l = g.modes
        x = apply_creation(k, apply_annihilation(l, psi))
        y = apply_creation(l, apply_annihilation(k, psi))
        if kind == "e":
            return scale(0.5, add(x, y))
        return scale(0.5j, add(x, scale(-1.0, y)))
    if kind in ("r", "R"):
        k, l = g.modes
        up = apply_creation(k, apply_creation(l, psi))
        down = apply_annihilation(k, apply_annihilation(l, psi))
        if kind == "r":
            return scale(0.5, add(up, down))
        return scale(0.5j, add(up, scale(-1.0, down)))
    if kind in ("s", "S"):
        (k,) = g.modes
        up = apply_creation(k, apply_creation(k, psi))
        down = apply_annihilation(k, apply_annihilation(k, psi))
        if kind == "s":
            return scale(0.5, add(up, down))
        return scale(0.5j, add(up, scale(-1.0, down)))
    if kind in ("q", "p"):
        (k,) = g.modes
        up = apply_creation(k, psi)
        down = apply_annihilation(k, psi)
        if kind == "q":
            return scale(_SQRT_HALF, add(up, down))
        return scale(1j * _SQRT_HALF, add(up, scale(-1.0, down)))
    raise ValueError(f"unknown generator kind {kind!r}")


def left_apply_generator(g: GeneratorDescriptor, a: SparseOperator) -> SparseOperator:
    """The operator product H a, applying the generator to the bra slot."""
    if g.kind == IDENTITY_KIND:
        return a
    actions: dict[Occupation, dict[Occupation, complex]] = {}
    out: dict[tuple[Occupation, Occupation], complex] = {}
    for (j, ket), amp in a.entries.items():
        action = actions.get(j)
        if action is None:
            action = apply_generator(g, basis_ket(j)).terms
            actions[j] = action
        for target, coeff in action.items():
            key = (target, ket)
            out[key] = out.get(key, 0j) + coeff * amp
    return SparseOperator(a.modes, out)


def commutator_with_density(g: GeneratorDescriptor, rho: DensityOperator) -> SparseOperator:
    """[H, rho] = H rho - rho H; uses rho H = (H rho)^dag for Hermitian rho."""
    if g.kind != IDENTITY_KIND and g.modes and max(g.modes) > rho.modes:
        raise ValueError(f"generator {g.label} exceeds the {rho.modes}-mode register")
    left = left_apply_generator(g, rho.op)
    return op_add(left, op_scale(-1.0, dagger(left)))


@dataclass(frozen=True)
class ClosureReport:
    """Result of fitting every basis-pair commutator back onto the basis."""

    group: Group
    modes: int
    probe_count: int
    fit_labels: tuple[str, ...]
    max_residual: float
    residuals: dict[tuple[int, int], float]
    coefficients: dict[tuple[int, int], np.ndarray]
    min_normal_eigenvalue: float

    def coefficient(self, pair: tuple[int, int], fit_label: str) -> float:
        return float(self.coefficients[pair][self.fit_labels.index(fit_label)])


def default_closure_probes(m: int) -> list[SparseKet]:
    """Every Fock basis state of at most two photons, plus the two-photon
    uniform-phase state (which breaks residual degeneracies the basis states
    alone would leave)."""
    from .orbit import uniform_phase_state

    probes = [basis_ket(occ) for occ in enumerate_occupations(m, 2)]
    probes.append(uniform_phase_state(m, 2))
    return probes


def _stack_block(
    vectors: Sequence[dict[Occupation, complex]],
    support: Sequence[Occupation],
) -> np.ndarray:
    index = {occ: i for i, occ in enumerate(support)}
    block = np.zeros((2 * len(support), len(vectors)), dtype=float)
    for col, vec in enumerate(vectors):
        for occ, amp in vec.items():
            row = index[occ]
            block[row, col] = amp.real
            block[row + len(support), col] = amp.imag
    return block


def verify_closure(
    group: Group,
    m: int,
    probes: Sequence[SparseKet] | None = None,
    *,
    exclude: Iterable[GeneratorDescriptor] = (),
    extra_fit: Iterable[GeneratorDescriptor] = (),
) -> ClosureReport:
    """Check numerically that the basis is closed under commutators.

    For every basis pair, [iH_I, iH_J] applied to each probe is fitted by a
    real combination of the fitted set {iH_K psi} (the full basis minus
    ``exclude``, plus any ``extra_fit`` descriptors), simultaneously over all
    probes. Reports the per-pair least-squares residual norms, the coefficient
    table, and the smallest eigenvalue of the normal matrix as a conditioning
    indicator.

    ``extra_fit`` is a diagnostic handle: it widens only the fitting set, not
    the commutator pairs, so it can localize exactly which direction a failed
    closure is missing (for ALO, adjoining the identity).
    """
    basis = lie_basis(group, m)
    if probes is None:
        probes = default_closure_probes(m)
    probes = list(probes)
    if not probes:
        raise ValueError("empty probe list")
    for psi in probes:
        if psi.modes != m:
            raise ValueError("probe mode count does not match the basis")

    excluded = set(exclude)
    fit = [g for g in basis.elements if g not in excluded]
    fit.extend(g for g in extra_fit if g not in fit)
    d = len(basis.elements)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]

    a_blocks: list[np.ndarray] = []
    b_blocks: list[np.ndarray] = []
    for psi in probes:
        applied = [apply_generator(g, psi) for g in basis.elements]
        columns = [scale(1j, apply_generator(g, psi)).terms for g in fit]
        targets = []
        for i, j in pairs:
            # [iH_I, iH_J] psi = H_J (H_I psi) - H_I (H_J psi)
            t = add(
                apply_generator(basis.elements[j], applied[i]),
                scale(-1.0, apply_generator(basis.elements[i], applied[j])),
            )
            targets.append(t.terms)
        support: set[Occupation] = set(psi.terms)
        for vec in columns:
            support.update(vec)
        for vec in targets:
            support.update(vec)
        ordered = sorted(support)
        a_blocks.append(_stack_block(columns, ordered))
        b_blocks.append(_stack_block(targets, ordered))

    a_mat = np.vstack(a_blocks) if a_blocks else np.zeros((0, len(fit)))
    b_mat = np.vstack(b_blocks) if b_blocks else np.zeros((0, len(pairs)))
    normal = a_mat.T @ a_mat
    min_eig = float(np.linalg.eigvalsh(normal)[0]) if len(fit) else 0.0
    if pairs:
        rhs = a_mat.T @ b_mat
        try:
            coeff = np.linalg.solve(normal, rhs)
        except np.linalg.LinAlgError:
            coeff = np.linalg.lstsq(a_mat, b_mat, rcond=None)[0]
        resid = np.linalg.norm(a_mat @ coeff - b_mat, axis=0)
    else:
        coeff = np.zeros((len(fit), 0))
        resid = np.zeros(0)

    residuals: dict[tuple[int, int], float] = {(i, i): 0.0 for i in range(d)}
    coefficients: dict[tuple[int, int], np.ndarray] = {
        (i, i): np.zeros(len(fit)) for i in range(d)
    }
    for col, (i, j) in enumerate(pairs):
        residuals[(i, j)] = residuals[(j, i)] = float(resid[col])
        coefficients[(i, j)] = coeff[:, col].copy()
        coefficients[(j, i)] = -coeff[:, col]
    return ClosureReport(
        group=group,
        modes=m,
        probe_count=len(probes),
        fit_labels=tuple(g.label for g in fit),
        max_residual=float(resid.max()) if resid.size else 0.0,
        residuals=residuals,
        coefficients=coefficients,
        min_normal_eigenvalue=min_eig,
    )
