"""History operators, their probabilities, and consistency conditions.

A history picks one atom per time from per-time projector families; its
operator is the time-ordered product of the atoms conjugated into the
Heisenberg picture at the initial time.  History probabilities are only
well defined (positive, normalized, additive) when the family passes a
consistency condition: either the pairwise trace condition of Gell-Mann and
Hartle, or, for two-time binary families, the weaker necessary-and-sufficient
real-part condition of Griffiths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .contexts import Context, GeneralizedContext, LabelTuple
from .errors import (
    ConditionOnNull,
    DimensionMismatch,
    InconsistentFamily,
    InvariantViolation,
    TimeOrderViolation,
    UnsupportedShape,
)
from .linop import (
    DensityOperator,
    HermitianOperator,
    Operator,
    Projector,
    evolution_operator,
)

__all__ = [
    "HistoryFamily",
    "History",
    "ConsistencyReport",
    "heisenberg_projector",
    "history_operator",
    "history_probability",
    "gmh_check",
    "griffiths_check",
    "family_from_generalized_context",
    "omnes_implies",
]


def heisenberg_projector(
    E: Projector,
    event_time: float,
    ref_time: float,
    hamiltonian: HermitianOperator,
    hbar: float = 1.0,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Projector:
    """Conjugate an atom into the Heisenberg picture at the reference time.

    Returns exp(+iH(t-t0)/hbar) E exp(-iH(t-t0)/hbar); this coincides with
    translating the property from its event time to the reference time.
    """
    w = evolution_operator(hamiltonian, event_time, ref_time, hbar, tols=tols).matrix
    return Projector(w @ E.matrix @ w.conj().T, tols=tols)


class HistoryFamily:
    """Per-time projector families with an initial state and dynamics.

    Times must be strictly increasing and all later than the initial time at
    which the state is given.  Atoms are conjugated into the Heisenberg
    picture at the initial time once, at construction.
    """

    def __init__(
        self,
        contexts: Sequence[Context],
        hamiltonian: HermitianOperator,
        initial_time: float,
        initial_state: DensityOperator,
        hbar: float = 1.0,
        *,
        tols: Tolerances = DEFAULT_TOLERANCES,
    ):
        contexts = tuple(contexts)
        if not contexts:
            raise InvariantViolation("a history family needs at least one time")
        dim = contexts[0].dim
        for ctx in contexts:
            if ctx.dim != dim:
                raise DimensionMismatch("per-time families act on different dimensions")
        if hamiltonian.dim != dim or initial_state.dim != dim:
            raise DimensionMismatch("state/Hamiltonian dimension differs from atoms")
        times = [ctx.time for ctx in contexts]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise TimeOrderViolation(
                f"family times must be strictly increasing, got {times}"
            )
        if times[0] <= initial_time:
            raise TimeOrderViolation(
                f"family times must follow the initial time {initial_time!r}"
            )

        self._contexts = contexts
        self._hamiltonian = hamiltonian
        self._hbar = float(hbar)
        self._initial_time = float(initial_time)
        self._initial_state = initial_state
        self._tols = tols
        self._atoms_ref = tuple(
            tuple(
                heisenberg_projector(
                    atom, ctx.time, initial_time, hamiltonian, hbar, tols=tols
                )
                for atom in ctx.atoms
            )
            for ctx in contexts
        )

    @property
    def contexts(self) -> tuple[Context, ...]:
        return self._contexts

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(ctx.time for ctx in self._contexts)

    @property
    def hamiltonian(self) -> HermitianOperator:
        return self._hamiltonian

    @property
    def hbar(self) -> float:
        return self._hbar

    @property
    def initial_time(self) -> float:
        return self._initial_time

    @property
    def initial_state(self) -> DensityOperator:
        return self._initial_state

    @property
    def dim(self) -> int:
        return self._contexts[0].dim

    @property
    def heisenberg_atoms(self) -> tuple[tuple[Projector, ...], ...]:
        """Per-time atoms conjugated to the initial time."""
        return self._atoms_ref

    @property
    def label_grid(self) -> tuple[LabelTuple, ...]:
        """Every elementary history as a tuple of per-time labels."""
        return tuple(
            itertools.product(*(ctx.labels for ctx in self._contexts))
        )

    def with_initial_state(self, rho: DensityOperator) -> "HistoryFamily":
        """Same family evaluated from a different initial state."""
        return HistoryFamily(
            self._contexts,
            self._hamiltonian,
            self._initial_time,
            rho,
            self._hbar,
            tols=self._tols,
        )

    def history(self, choices: Sequence[str]) -> "History":
        return History(self, tuple(str(c) for c in choices))

    def _choice_indices(self, choices: LabelTuple) -> tuple[int, ...]:
        if len(choices) != len(self._contexts):
            raise InvariantViolation(
                f"history needs {len(self._contexts)} choices, got {len(choices)}"
            )
        indices = []
        for ctx, label in zip(self._contexts, choices):
            if label not in ctx.labels:
                raise InvariantViolation(
                    f"label {label!r} is not an atom of the family at t={ctx.time}"
                )
            indices.append(ctx.labels.index(label))
        return tuple(indices)

    def _operator_matrix(self, choices: LabelTuple) -> np.ndarray:
        indices = self._choice_indices(choices)
        product = self._atoms_ref[0][indices[0]].matrix
        for k in range(1, len(indices)):
            product = self._atoms_ref[k][indices[k]].matrix @ product
        return product

    def __repr__(self) -> str:
        return (
            f"HistoryFamily(times={list(self.times)}, dim={self.dim}, "
            f"initial_time={self._initial_time})"
        )


@dataclass(frozen=True, eq=False)
class History:
    """One atom choice per time of a history family."""

    family: HistoryFamily
    choices: LabelTuple

    def __post_init__(self):
        self.family._choice_indices(self.choices)


def history_operator(h: History) -> Operator:
    """Ordered product of the Heisenberg atoms, latest time leftmost.

    The product of non-commuting projectors is generally not a projector.
    """
    return Operator(h.family._operator_matrix(h.choices))


def history_probability(h: History) -> float:
    """Probability weight Tr(C rho C^dag) of one history.

    Non-negative by construction, but only additive and bounded by one when
    the family passes a consistency check.
    """
    c = h.family._operator_matrix(h.choices)
    rho = h.family.initial_state.matrix
    value = float(np.trace(c @ rho @ c.conj().T).real)
    return max(0.0, value)


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of a consistency check over a history family.

    ``violations`` holds (choices_a, choices_b, residual) for every history
    pair whose consistency trace exceeds the threshold; the verdict is true
    exactly when that list is empty.  ``probabilities`` maps every elementary
    history to its probability weight.
    """

    criterion: str
    verdict: bool
    violations: tuple[tuple[LabelTuple, LabelTuple, float], ...]
    probabilities: dict[LabelTuple, float]

    def max_residual(self) -> float:
        return max((v[2] for v in self.violations), default=0.0)


def _decoherence_gram(
    family: HistoryFamily, rho: DensityOperator
) -> tuple[tuple[LabelTuple, ...], np.ndarray]:
    """Matrix of cross-history traces Tr(C_a rho C_b^dag) over the grid."""
    grid = family.label_grid
    ops = np.stack([family._operator_matrix(choices) for choices in grid])
    n, d = ops.shape[0], ops.shape[1]
    weighted = (ops @ rho.matrix).reshape(n, d * d)
    flat = ops.reshape(n, d * d)
    return grid, weighted @ flat.conj().T


def gmh_check(
    family: HistoryFamily, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> ConsistencyReport:
    """Pairwise trace condition: Tr(C_a rho C_b^dag) = 0 for all a != b.

    Each unordered pair is evaluated once (the swapped trace is the complex
    conjugate) and reported with the magnitude of its trace.
    """
    grid, gram = _decoherence_gram(family, family.initial_state)
    violations = []
    for a in range(len(grid)):
        for b in range(a + 1, len(grid)):
            residual = abs(gram[a, b])
            if residual > tols.consist:
                violations.append((grid[a], grid[b], float(residual)))
    probabilities = {
        choices: max(0.0, float(gram[k, k].real)) for k, choices in enumerate(grid)
    }
    return ConsistencyReport("gmh", not violations, tuple(violations), probabilities)


def griffiths_check(
    family: HistoryFamily, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> ConsistencyReport:
    """Two-time binary condition: the real part of the consistency trace.

    Evaluates Re Tr(E1 rho E1c E2), with E1/E1c the two first-time atoms and
    E2 the first second-time atom, all in the Heisenberg picture; the verdict
    does not depend on which atom of each pair is taken first.

    Only defined for families with exactly two times and two atoms per time;
    anything else raises ``UnsupportedShape``.  The reported violation pair
    is the pair of histories that differ in their first-time choice.
    """
    if len(family.contexts) != 2 or any(len(ctx) != 2 for ctx in family.contexts):
        raise UnsupportedShape(
            "the real-part condition is defined for two times with "
            "two atoms per time"
        )
    (e1, e1_bar), (e2, _) = family.heisenberg_atoms
    rho = family.initial_state.matrix
    trace = complex(np.trace(e1.matrix @ rho @ e1_bar.matrix @ e2.matrix))
    residual = abs(trace.real)
    labels1, labels2 = (ctx.labels for ctx in family.contexts)
    violations = []
    if residual > tols.consist:
        violations.append(
            ((labels1[0], labels2[0]), (labels1[1], labels2[0]), float(residual))
        )
    probabilities = {
        choices: history_probability(History(family, choices))
        for choices in family.label_grid
    }
    return ConsistencyReport(
        "griffiths", not violations, tuple(violations), probabilities
    )


def family_from_generalized_context(
    gc: GeneralizedContext,
    rho: DensityOperator,
    *,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> HistoryFamily:
    """History family with the generalized context's per-time atom families.

    The family reuses the context times, dynamics, and reference time; the
    state is taken at the reference time, which must precede the first
    context time.
    """
    return HistoryFamily(
        gc.contexts, gc.hamiltonian, gc.ref_time, rho, gc.hbar, tols=tols
    )


def _normalize_history_set(
    family: HistoryFamily, selection: Iterable[LabelTuple]
) -> frozenset[LabelTuple]:
    grid = set(family.label_grid)
    chosen = frozenset(tuple(str(x) for x in tup) for tup in selection)
    unknown = chosen - grid
    if unknown:
        raise InvariantViolation(
            f"history choices not in the family grid: {sorted(unknown)}"
        )
    return chosen


def omnes_implies(
    family: HistoryFamily,
    a: Iterable[LabelTuple],
    b: Iterable[LabelTuple],
    rho: DensityOperator | None = None,
    *,
    criterion: str = "gmh",
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """Probabilistic implication between history sets: Pr(b | a) = 1.

    History sets are subsets of the elementary-history grid and intersect as
    sets.  The family (with ``rho`` substituted, if given) must pass the
    selected consistency check; conditioning on a set of probability below
    ``tols.prob`` raises ``ConditionOnNull``.
    """
    set_a = _normalize_history_set(family, a)
    set_b = _normalize_history_set(family, b)
    if rho is not None:
        family = family.with_initial_state(rho)
    if criterion == "gmh":
        report = gmh_check(family, tols=tols)
    elif criterion == "griffiths":
        report = griffiths_check(family, tols=tols)
    else:
        raise InvariantViolation(f"unknown consistency criterion {criterion!r}")
    if not report.verdict:
        raise InconsistentFamily(
            f"family fails the {criterion} condition "
            f"(max residual {report.max_residual():.3e})"
        )
    pr_a = sum(report.probabilities[choices] for choices in set_a)
    if pr_a <= tols.prob:
        raise ConditionOnNull(
            f"conditioning set has probability {pr_a!r} below {tols.prob:.1e}"
        )
    pr_ab = sum(report.probabilities[choices] for choices in set_a & set_b)
    return abs(pr_ab / pr_a - 1.0) <= tols.prob
