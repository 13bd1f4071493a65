"""Single-time contexts and their multi-time generalization.

A context is a complete family of mutually exclusive atomic projectors at one
time; it generates a boolean sublattice on which Born probabilities are well
defined.  Contexts at several times form a generalized context when all their
atoms commute after translation to a common reference time; the pairwise
products of the translated atoms ("composed atoms") are then again a complete
exclusive family, and carry the probabilities of multi-time conjunctions.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    ExclusivityViolation,
    ForeignProperty,
    IncompatibleContexts,
    InvariantViolation,
    TimeOrderViolation,
)
from .lattice import TimedProperty, translate
from .linop import (
    DensityOperator,
    HermitianOperator,
    Projector,
    max_entry_norm,
)

__all__ = [
    "Context",
    "GeneralizedContext",
    "CompositeProperty",
    "validate_context",
    "build_generalized_context",
    "composite_probability",
    "composite_meet",
    "composite_join",
    "composite_negate",
    "conditional_probability",
    "property_projector",
]

LabelTuple = tuple[str, ...]


class Context:
    """A time plus a complete, mutually exclusive family of atomic projectors."""

    def __init__(
        self,
        time: float,
        atoms: Sequence[Projector],
        labels: Sequence[str] | None = None,
        *,
        tols: Tolerances = DEFAULT_TOLERANCES,
    ):
        atoms = tuple(atoms)
        if not atoms:
            raise InvariantViolation("a context needs at least one atom")
        dim = atoms[0].dim
        for atom in atoms[1:]:
            if atom.dim != dim:
                raise DimensionMismatch("context atoms act on different dimensions")
        if labels is None:
            labels = tuple(str(i) for i in range(len(atoms)))
        else:
            labels = tuple(str(l) for l in labels)
            if len(labels) != len(atoms):
                raise InvariantViolation(
                    f"{len(labels)} labels for {len(atoms)} atoms"
                )
            if len(set(labels)) != len(labels):
                raise InvariantViolation("atom labels must be unique")

        exclusivity = []
        for i in range(len(atoms)):
            for j in range(i + 1, len(atoms)):
                residual = max_entry_norm(atoms[i].matrix @ atoms[j].matrix)
                if residual > tols.proj:
                    exclusivity.append((i, j, residual))
        if exclusivity:
            worst = max(exclusivity, key=lambda v: v[2])
            raise ExclusivityViolation(
                f"atoms {labels[worst[0]]!r} and {labels[worst[1]]!r} have "
                f"non-zero product (residual {worst[2]:.3e}); "
                f"{len(exclusivity)} offending pair(s) in total",
                exclusivity,
            )
        total = sum(atom.matrix for atom in atoms)
        residual = max_entry_norm(total - np.eye(dim))
        if residual > tols.proj:
            raise CompletenessViolation(
                f"atom sum deviates from identity by {residual:.3e}",
                (residual,),
            )

        self._time = float(time)
        self._atoms = atoms
        self._labels = labels

    @property
    def time(self) -> float:
        return self._time

    @property
    def atoms(self) -> tuple[Projector, ...]:
        return self._atoms

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def dim(self) -> int:
        return self._atoms[0].dim

    def __len__(self) -> int:
        return len(self._atoms)

    def __repr__(self) -> str:
        return f"Context(time={self._time}, atoms={len(self._atoms)}, dim={self.dim})"


def validate_context(
    atoms: Sequence[Projector],
    time: float = 0.0,
    labels: Sequence[str] | None = None,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Context:
    """Check the exclusivity and completeness laws and return the context.

    On failure raises ``ExclusivityViolation`` or ``CompletenessViolation``
    whose ``violations`` attribute names the offending pairs/sum with their
    residual magnitudes.
    """
    return Context(time, atoms, labels, tols=tols)


def _translated_atom_matrices(
    contexts: Sequence[Context],
    ref_time: float,
    hamiltonian: HermitianOperator,
    hbar: float,
    tols: Tolerances,
) -> list[list[np.ndarray]]:
    translated = []
    for ctx in contexts:
        moved = [
            translate(
                TimedProperty(atom, ctx.time), ref_time, hamiltonian, hbar, tols=tols
            ).projector.matrix
            for atom in ctx.atoms
        ]
        translated.append(moved)
    return translated


def _commutation_failures(
    contexts: Sequence[Context],
    translated: list[list[np.ndarray]],
    tols: Tolerances,
) -> list[tuple[tuple[int, str], tuple[int, str], float]]:
    failures = []
    for a in range(len(contexts)):
        for b in range(a + 1, len(contexts)):
            for i, mat_a in enumerate(translated[a]):
                for j, mat_b in enumerate(translated[b]):
                    residual = max_entry_norm(mat_a @ mat_b - mat_b @ mat_a)
                    if residual > tols.commute:
                        failures.append(
                            (
                                (a, contexts[a].labels[i]),
                                (b, contexts[b].labels[j]),
                                residual,
                            )
                        )
    return failures


class GeneralizedContext:
    """Contexts at several times whose atoms commute at a common time.

    Construction translates every atom to ``ref_time``, requires all
    cross-context commutators to vanish within ``tols.commute`` (the check is
    repeated at a second, deterministically drawn reference time, where the
    condition must hold as well), and builds the composed atoms as ordered
    products indexed by label tuples.
    """

    def __init__(
        self,
        contexts: Sequence[Context],
        ref_time: float,
        hamiltonian: HermitianOperator,
        hbar: float = 1.0,
        *,
        tols: Tolerances = DEFAULT_TOLERANCES,
    ):
        contexts = tuple(contexts)
        if not contexts:
            raise InvariantViolation("need at least one context")
        dim = contexts[0].dim
        for ctx in contexts:
            if ctx.dim != dim:
                raise DimensionMismatch("contexts act on different dimensions")
            if ctx.dim != hamiltonian.dim:
                raise DimensionMismatch("context and Hamiltonian dimensions differ")
        times = [ctx.time for ctx in contexts]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise TimeOrderViolation(
                f"context times must be strictly increasing, got {times}"
            )

        translated = _translated_atom_matrices(
            contexts, ref_time, hamiltonian, hbar, tols
        )
        failures = _commutation_failures(contexts, translated, tols)
        if failures:
            raise IncompatibleContexts(
                f"{len(failures)} translated atom pair(s) fail to commute "
                f"at t={ref_time!r}; worst residual "
                f"{max(f[2] for f in failures):.3e}",
                failures,
            )

        # the compatibility condition does not depend on the meeting time;
        # spot-check it at a second, deterministically drawn reference time
        alt_seed = abs(hash((float(ref_time), *map(float, times)))) % 2**32
        span = max(times) - min(times + [ref_time])
        alt_time = ref_time + float(
            np.random.default_rng(alt_seed).uniform(0.5, 1.5)
        ) * max(1.0, span)
        alt_translated = _translated_atom_matrices(
            contexts, alt_time, hamiltonian, hbar, tols
        )
        alt_failures = _commutation_failures(contexts, alt_translated, tols)
        if alt_failures:
            raise IncompatibleContexts(
                f"commutation holds at t={ref_time!r} but fails at the "
                f"re-check time t={alt_time!r}",
                alt_failures,
            )

        composed: dict[LabelTuple, Projector] = {}
        for combo in itertools.product(*(range(len(c)) for c in contexts)):
            product = translated[0][combo[0]]
            for k in range(1, len(contexts)):
                product = product @ translated[k][combo[k]]
            label = tuple(contexts[k].labels[combo[k]] for k in range(len(contexts)))
            composed[label] = Projector(product, tols=tols)

        self._verify_family_laws(composed, dim, tols)

        self._contexts = contexts
        self._ref_time = float(ref_time)
        self._hamiltonian = hamiltonian
        self._hbar = float(hbar)
        self._translated = tuple(
            tuple(Projector(m, tols=tols) for m in mats) for mats in translated
        )
        self._composed = composed

    @staticmethod
    def _verify_family_laws(
        composed: Mapping[LabelTuple, Projector], dim: int, tols: Tolerances
    ) -> None:
        mats = np.stack([p.matrix for p in composed.values()])
        total = mats.sum(axis=0)
        residual = max_entry_norm(total - np.eye(dim))
        if residual > tols.proj:
            raise InvariantViolation(
                f"composed atoms do not sum to identity (residual {residual:.3e})"
            )
        products = np.einsum("aij,bjk->abik", mats, mats)
        products[np.arange(len(mats)), np.arange(len(mats))] -= mats
        residual = max_entry_norm(products)
        if residual > tols.proj:
            raise InvariantViolation(
                f"composed atoms are not mutually exclusive "
                f"(residual {residual:.3e})"
            )

    @property
    def contexts(self) -> tuple[Context, ...]:
        return self._contexts

    @property
    def ref_time(self) -> float:
        return self._ref_time

    @property
    def hamiltonian(self) -> HermitianOperator:
        return self._hamiltonian

    @property
    def hbar(self) -> float:
        return self._hbar

    @property
    def dim(self) -> int:
        return self._contexts[0].dim

    @property
    def translated_atoms(self) -> tuple[tuple[Projector, ...], ...]:
        """Per-context atoms translated to the reference time."""
        return self._translated

    @property
    def composed_atoms(self) -> dict[LabelTuple, Projector]:
        return dict(self._composed)

    @property
    def label_tuples(self) -> tuple[LabelTuple, ...]:
        return tuple(self._composed.keys())

    def property(self, selected: Iterable[LabelTuple]) -> "CompositeProperty":
        return CompositeProperty(self, selected)

    def full_property(self) -> "CompositeProperty":
        return CompositeProperty(self, self.label_tuples)

    def __repr__(self) -> str:
        return (
            f"GeneralizedContext(times={[c.time for c in self._contexts]}, "
            f"ref_time={self._ref_time}, dim={self.dim})"
        )


def build_generalized_context(
    contexts: Sequence[Context],
    ref_time: float,
    hamiltonian: HermitianOperator,
    hbar: float = 1.0,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> GeneralizedContext:
    """Validate compatibility of the contexts and assemble the composed atoms.

    Raises ``IncompatibleContexts`` carrying every non-commuting translated
    atom pair, or ``TimeOrderViolation`` for unsorted context times.
    """
    return GeneralizedContext(contexts, ref_time, hamiltonian, hbar, tols=tols)


class CompositeProperty:
    """A disjunction of composed atoms of one generalized context."""

    def __init__(self, parent: GeneralizedContext, selected: Iterable[LabelTuple]):
        selected = frozenset(tuple(str(x) for x in tup) for tup in selected)
        known = set(parent.label_tuples)
        unknown = selected - known
        if unknown:
            raise InvariantViolation(
                f"label tuples not in the generalized context: {sorted(unknown)}"
            )
        self._parent = parent
        self._selected = selected

    @property
    def parent(self) -> GeneralizedContext:
        return self._parent

    @property
    def selected(self) -> frozenset[LabelTuple]:
        return self._selected

    def __repr__(self) -> str:
        return f"CompositeProperty({sorted(self._selected)})"


def _require_same_parent(a: CompositeProperty, b: CompositeProperty) -> None:
    if a.parent is not b.parent:
        raise ForeignProperty(
            "composite properties belong to different generalized contexts"
        )


def property_projector(
    prop: CompositeProperty, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> Projector:
    """Projector represented by the property: the sum of its composed atoms."""
    gc = prop.parent
    total = np.zeros((gc.dim, gc.dim), dtype=np.complex128)
    for label in gc.label_tuples:
        if label in prop.selected:
            total += gc.composed_atoms[label].matrix
    return Projector(total, tols=tols)


def composite_probability(
    gc: GeneralizedContext,
    prop: CompositeProperty,
    rho: DensityOperator,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Born probability of a composite property, state given at ref_time.

    Sums Tr(rho Pi) over the selected composed atoms; additive over disjoint
    selections, and the full selection carries probability one.
    """
    if prop.parent is not gc:
        raise ForeignProperty("property does not belong to this generalized context")
    if rho.dim != gc.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs context dim {gc.dim}")
    value = 0.0
    for label in gc.label_tuples:
        if label in prop.selected:
            value += float(np.trace(rho.matrix @ gc.composed_atoms[label].matrix).real)
    if value < -tols.prob or value > 1.0 + tols.prob:
        raise InvariantViolation(
            f"probability {value!r} lies outside [0, 1] beyond {tols.prob:.1e}"
        )
    return min(1.0, max(0.0, value))


def composite_meet(a: CompositeProperty, b: CompositeProperty) -> CompositeProperty:
    """Conjunction: intersection of the selected label tuples."""
    _require_same_parent(a, b)
    return CompositeProperty(a.parent, a.selected & b.selected)


def composite_join(a: CompositeProperty, b: CompositeProperty) -> CompositeProperty:
    """Disjunction: union of the selected label tuples."""
    _require_same_parent(a, b)
    return CompositeProperty(a.parent, a.selected | b.selected)


def composite_negate(a: CompositeProperty) -> CompositeProperty:
    """Complement within the parent's label-tuple grid."""
    return CompositeProperty(a.parent, set(a.parent.label_tuples) - a.selected)


def conditional_probability(
    gc: GeneralizedContext,
    a: CompositeProperty,
    b: CompositeProperty,
    rho: DensityOperator,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> float | None:
    """Pr(b | a) = Pr(b and a) / Pr(a), or None when Pr(a) is null.

    A conditioning probability below ``tols.prob`` leaves the ratio
    undefined; that case is flagged by returning None rather than raising.
    """
    _require_same_parent(a, b)
    if a.parent is not gc:
        raise ForeignProperty("properties do not belong to this generalized context")
    p_a = composite_probability(gc, a, rho, tols=tols)
    if p_a < tols.prob:
        return None
    p_ab = composite_probability(gc, composite_meet(a, b), rho, tols=tols)
    return p_ab / p_a
