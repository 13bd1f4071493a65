"""Reading, validating, and writing system description files.

A system description is one YAML document: dimension, dynamics (Hamiltonian
and hbar), an initial state with its time, a reference time, and a list of
contexts.  Each context carries its time and one of three atom forms:
explicit projector matrices, an observable with spectral windows, or a spin
direction (dimension-2 systems).  Complex entries are written as two-element
``[re, im]`` arrays; plain numbers are accepted on input as real values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .config import DEFAULT_TOLERANCES, Tolerances
from .contexts import Context
from .errors import (
    InvariantViolation,
    NonHermitianInput,
    ParseError,
    QpropsError,
    ValidationError,
)
from .linop import (
    DensityOperator,
    HermitianOperator,
    Projector,
    SpectralWindow,
    spectral_projectors,
)
from .spin import Direction, spin_projectors

__all__ = [
    "ContextSpec",
    "SystemSpec",
    "RealizedSystem",
    "parse_system_spec",
    "load_system_spec",
    "spec_to_mapping",
    "dumps_system_spec",
    "dump_system_spec",
    "realize_context",
    "realize_system",
    "matrix_to_pairs",
]

_DIRECTION_NORM_WARN = 1e-9


def _parse_scalar(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ParseError(f"{where}: booleans are not matrix entries")
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in value)
    ):
        return complex(value[0], value[1])
    raise ParseError(
        f"{where}: expected a number or a [re, im] pair, got {value!r}"
    )


def _parse_matrix(value, dim: int, where: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)):
        raise ParseError(f"{where}: expected a nested array, got {type(value).__name__}")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, (list, tuple)):
            raise ParseError(f"{where}: row {r} is not an array")
        rows.append([_parse_scalar(x, f"{where}[{r}][{c}]") for c, x in enumerate(row)])
    arr = np.array(rows, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape != (dim, dim):
        raise ValidationError(
            f"{where}: expected a {dim}x{dim} matrix, got shape {arr.shape}"
        )
    return arr


def _scalar_to_value(z: complex) -> Any:
    return [float(z.real), float(z.imag)]


def matrix_to_pairs(matrix: np.ndarray) -> list[list[list[float]]]:
    """Nested row-major representation with [re, im] entries."""
    arr = np.asarray(matrix, dtype=np.complex128)
    return [[_scalar_to_value(z) for z in row] for row in arr]


@dataclass(frozen=True, eq=False)
class ContextSpec:
    """One context entry of a system description (a single atom form is set)."""

    time: float
    labels: tuple[str, ...] | None = None
    atoms: tuple[np.ndarray, ...] | None = None
    observable: np.ndarray | None = None
    windows: tuple[SpectralWindow, ...] | None = None
    direction: Direction | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContextSpec):
            return NotImplemented
        if (self.time, self.labels, self.direction, self.windows) != (
            other.time,
            other.labels,
            other.direction,
            other.windows,
        ):
            return False
        if (self.atoms is None) != (other.atoms is None):
            return False
        if self.atoms is not None and (
            len(self.atoms) != len(other.atoms)
            or any(not np.array_equal(a, b) for a, b in zip(self.atoms, other.atoms))
        ):
            return False
        if (self.observable is None) != (other.observable is None):
            return False
        if self.observable is not None and not np.array_equal(
            self.observable, other.observable
        ):
            return False
        return True


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Parsed system description: dynamics, state, and proposed contexts."""

    dimension: int
    hbar: float
    hamiltonian: np.ndarray
    initial_time: float
    initial_state: np.ndarray
    reference_time: float
    contexts: tuple[ContextSpec, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemSpec):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.hbar == other.hbar
            and np.array_equal(self.hamiltonian, other.hamiltonian)
            and self.initial_time == other.initial_time
            and np.array_equal(self.initial_state, other.initial_state)
            and self.reference_time == other.reference_time
            and self.contexts == other.contexts
        )


def _parse_context_entry(entry, dim: int, index: int) -> ContextSpec:
    where = f"contexts[{index}]"
    if not isinstance(entry, Mapping):
        raise ParseError(f"{where}: expected a mapping")
    if "time" not in entry:
        raise ParseError(f"{where}: missing 'time'")
    time = entry["time"]
    if not isinstance(time, (int, float)) or isinstance(time, bool):
        raise ParseError(f"{where}: 'time' must be a number")

    forms = [k for k in ("atoms", "observable", "direction") if k in entry]
    if len(forms) != 1:
        raise ParseError(
            f"{where}: exactly one of 'atoms', 'observable', or 'direction' "
            f"must be given, found {forms or 'none'}"
        )
    labels = entry.get("labels")
    if labels is not None:
        if not isinstance(labels, (list, tuple)) or not all(
            isinstance(l, str) for l in labels
        ):
            raise ParseError(f"{where}: 'labels' must be an array of strings")
        labels = tuple(labels)

    if "atoms" in entry:
        if not isinstance(entry["atoms"], (list, tuple)) or not entry["atoms"]:
            raise ParseError(f"{where}: 'atoms' must be a non-empty array")
        atoms = tuple(
            _parse_matrix(a, dim, f"{where}.atoms[{k}]")
            for k, a in enumerate(entry["atoms"])
        )
        return ContextSpec(float(time), labels, atoms=atoms)

    if "observable" in entry:
        observable = _parse_matrix(entry["observable"], dim, f"{where}.observable")
        if labels is not None:
            raise ParseError(
                f"{where}: observable contexts take their labels from the windows"
            )
        raw_windows = entry.get("windows")
        if not isinstance(raw_windows, (list, tuple)) or not raw_windows:
            raise ParseError(f"{where}: 'windows' must be a non-empty array")
        windows = []
        for k, win in enumerate(raw_windows):
            if not isinstance(win, Mapping) or not {"label", "lo", "hi"} <= set(win):
                raise ParseError(
                    f"{where}.windows[{k}]: expected keys 'label', 'lo', 'hi'"
                )
            try:
                windows.append(
                    SpectralWindow(str(win["label"]), float(win["lo"]), float(win["hi"]))
                )
            except InvariantViolation as err:
                raise ValidationError(f"{where}.windows[{k}]: {err}") from err
        return ContextSpec(float(time), None, observable=observable, windows=tuple(windows))

    raw = entry["direction"]
    if dim != 2:
        raise ValidationError(
            f"{where}: direction contexts require dimension 2, got {dim}"
        )
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 3
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw)
    ):
        raise ParseError(f"{where}: 'direction' must be a 3-vector of numbers")
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise ValidationError(f"{where}: direction vector is zero")
    if abs(norm - 1.0) > _DIRECTION_NORM_WARN:
        warnings.warn(
            f"{where}: direction {list(raw)} has norm {norm!r}; auto-normalizing",
            stacklevel=2,
        )
    direction = Direction.normalized(float(raw[0]), float(raw[1]), float(raw[2]))
    return ContextSpec(float(time), labels, direction=direction)


def parse_system_spec(document, source: str = "<memory>") -> SystemSpec:
    """Build a ``SystemSpec`` from a parsed YAML/JSON mapping.

    Raises ``ParseError`` for structural problems and ``ValidationError``
    for semantic ones (shape mismatches, non-increasing times).
    """
    if not isinstance(document, Mapping):
        raise ParseError(f"{source}: top level must be a mapping")
    for key in ("dimension", "initial_time", "initial_state", "contexts"):
        if key not in document:
            raise ParseError(f"{source}: missing required key {key!r}")
    dim = document["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"{source}: 'dimension' must be a positive integer")

    hbar = document.get("hbar", 1.0)
    if not isinstance(hbar, (int, float)) or isinstance(hbar, bool) or hbar <= 0:
        raise ValidationError(f"{source}: 'hbar' must be a positive number")

    initial_time = document["initial_time"]
    if not isinstance(initial_time, (int, float)) or isinstance(initial_time, bool):
        raise ParseError(f"{source}: 'initial_time' must be a number")

    if "hamiltonian" in document and document["hamiltonian"] is not None:
        hamiltonian = _parse_matrix(document["hamiltonian"], dim, f"{source}.hamiltonian")
    else:
        hamiltonian = np.zeros((dim, dim), dtype=np.complex128)
    initial_state = _parse_matrix(document["initial_state"], dim, f"{source}.initial_state")
    reference_time = document.get("reference_time", initial_time)
    if not isinstance(reference_time, (int, float)) or isinstance(reference_time, bool):
        raise ParseError(f"{source}: 'reference_time' must be a number")

    raw_contexts = document["contexts"]
    if not isinstance(raw_contexts, (list, tuple)) or not raw_contexts:
        raise ParseError(f"{source}: 'contexts' must be a non-empty array")
    contexts = tuple(
        _parse_context_entry(entry, dim, k) for k, entry in enumerate(raw_contexts)
    )
    times = [ctx.time for ctx in contexts]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ValidationError(
            f"{source}: context times must be strictly increasing, got {times}"
        )
    if times[0] <= float(initial_time):
        raise ValidationError(
            f"{source}: context times must follow the initial time {initial_time!r}"
        )

    return SystemSpec(
        dimension=dim,
        hbar=float(hbar),
        hamiltonian=hamiltonian,
        initial_time=float(initial_time),
        initial_state=initial_state,
        reference_time=float(reference_time),
        contexts=contexts,
    )


def load_system_spec(path) -> SystemSpec:
    """Parse a system description file (YAML; JSON is a YAML subset)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from err
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ParseError(f"{path}: {err}") from err
    return parse_system_spec(document, source=str(path))


def _context_to_mapping(ctx: ContextSpec) -> dict:
    out: dict[str, Any] = {"time": ctx.time}
    if ctx.atoms is not None:
        out["atoms"] = [matrix_to_pairs(a) for a in ctx.atoms]
        if ctx.labels is not None:
            out["labels"] = list(ctx.labels)
    elif ctx.observable is not None:
        out["observable"] = matrix_to_pairs(ctx.observable)
        out["windows"] = [
            {"label": w.label, "lo": w.lo, "hi": w.hi} for w in ctx.windows
        ]
    else:
        out["direction"] = [ctx.direction.x, ctx.direction.y, ctx.direction.z]
        if ctx.labels is not None:
            out["labels"] = list(ctx.labels)
    return out


def spec_to_mapping(spec: SystemSpec) -> dict:
    """Plain mapping mirroring the file schema, with [re, im] complex entries."""
    return {
        "dimension": spec.dimension,
        "hbar": spec.hbar,
        "hamiltonian": matrix_to_pairs(spec.hamiltonian),
        "initial_time": spec.initial_time,
        "initial_state": matrix_to_pairs(spec.initial_state),
        "reference_time": spec.reference_time,
        "contexts": [_context_to_mapping(ctx) for ctx in spec.contexts],
    }


def dumps_system_spec(spec: SystemSpec) -> str:
    return yaml.safe_dump(spec_to_mapping(spec), sort_keys=False)


def dump_system_spec(spec: SystemSpec, path) -> None:
    Path(path).write_text(dumps_system_spec(spec))


@dataclass(frozen=True, eq=False)
class RealizedSystem:
    """Operator-level view of a system description."""

    dimension: int
    hbar: float
    hamiltonian: HermitianOperator
    initial_time: float
    initial_state: DensityOperator
    reference_time: float
    contexts: tuple[Context, ...]


def realize_context(
    ctx: ContextSpec, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> Context:
    """Build and validate the context described by one entry.

    Propagates the underlying invariant errors (non-projector atoms,
    exclusivity/completeness violations, uncovered eigenvalues, ...).
    """
    if ctx.atoms is not None:
        atoms = [Projector(a, tols=tols) for a in ctx.atoms]
        return Context(ctx.time, atoms, ctx.labels, tols=tols)
    if ctx.observable is not None:
        observable = HermitianOperator(ctx.observable, tols=tols)
        atoms = spectral_projectors(observable, ctx.windows, tols=tols)
        return Context(ctx.time, atoms, [w.label for w in ctx.windows], tols=tols)
    labels = ctx.labels if ctx.labels is not None else ("+", "-")
    return Context(ctx.time, spin_projectors(ctx.direction, tols=tols), labels, tols=tols)


def realize_system(
    spec: SystemSpec, *, tols: Tolerances = DEFAULT_TOLERANCES
) -> RealizedSystem:
    """Build every operator of the description, validating all invariants.

    Invariant failures are reported as ``ValidationError`` (the description
    itself is faulty); use ``realize_context`` directly to inspect individual
    context failures.
    """
    try:
        hamiltonian = HermitianOperator(spec.hamiltonian, tols=tols)
    except NonHermitianInput as err:
        raise ValidationError(f"hamiltonian: {err}") from err
    try:
        initial_state = DensityOperator(spec.initial_state, tols=tols)
    except InvariantViolation as err:
        raise ValidationError(f"initial_state: {err}") from err
    contexts = []
    for k, ctx in enumerate(spec.contexts):
        try:
            contexts.append(realize_context(ctx, tols=tols))
        except QpropsError as err:
            raise ValidationError(f"contexts[{k}]: {err}") from err
    return RealizedSystem(
        dimension=spec.dimension,
        hbar=spec.hbar,
        hamiltonian=hamiltonian,
        initial_time=spec.initial_time,
        initial_state=initial_state,
        reference_time=spec.reference_time,
        contexts=tuple(contexts),
    )
