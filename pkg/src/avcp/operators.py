"""Hermitian operators, spectra, states, and projective measurement.

Everything lives on finite-dimensional complex Hilbert spaces held as dense
numpy arrays.  Operators are validated on construction and carry a lazily
cached eigensystem with a deterministic ordering and phase convention, so any
quantity derived from a spectrum is reproducible bit for bit on a given
platform.  All tolerance checks use the max-norm (largest entry magnitude).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimMismatch,
    DomainError,
    ImaginaryResidue,
    NonFinite,
    NotHermitian,
    StateNotNormalized,
)

#: relative asymmetry admitted by the Hermiticity gate
HERMITICITY_RTOL = 1e-12
#: residual allowed in A V = V Lambda and V^dag V = I (scaled by max(1, |A|))
SPECTRUM_TOL = 1e-10
#: eigenvalues closer than this (times max(1, |A|)) merge into one outcome
DEGENERACY_RTOL = 1e-9
#: admissible deviation of a state vector from unit norm
STATE_NORM_TOL = 1e-12

_PHASE_CUTOFF = 1e-12


def max_norm(m) -> float:
    """Largest entry magnitude; the norm used by every tolerance check here."""
    arr = np.asarray(m)
    return float(np.abs(arr).max()) if arr.size else 0.0


def as_complex_matrix(m) -> np.ndarray:
    """Return `m` as a square complex ndarray with finite entries."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFinite("matrix contains non-finite entries")
    return arr


def make_rng(seed) -> np.random.Generator:
    """Seeded random generator; the only RNG constructor used in this package."""
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian operator.

    Eigenvalues ascend and eigenvectors are the matching columns.  Each
    column is phase-fixed so its first component above a small cutoff is real
    and positive, and columns inside a degenerate run are ordered
    lexicographically, which makes the decomposition deterministic.

    `outcome_groups` partitions the indices into runs whose adjacent
    eigenvalue gaps stay within the degeneracy tolerance; each group is one
    measurement outcome, with value `group_values[g]` and projector
    `projector(g)` onto the group eigenspace.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    outcome_groups: tuple[tuple[int, ...], ...]
    group_values: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def projector(self, group: int) -> np.ndarray:
        cols = self.eigenvectors[:, list(self.outcome_groups[group])]
        p = cols @ cols.conj().T
        p.setflags(write=False)
        return p

    def projectors(self) -> list[np.ndarray]:
        cached = getattr(self, "_projectors", None)
        if cached is None:
            cached = [self.projector(g) for g in range(len(self.outcome_groups))]
            object.__setattr__(self, "_projectors", cached)
        return cached


class HermitianOperator:
    """A validated Hermitian matrix representing a quantum measurement."""

    __slots__ = ("matrix", "_spectrum")

    def __init__(self, matrix):
        arr = as_complex_matrix(matrix)
        asym = max_norm(arr - arr.conj().T)
        allowed = HERMITICITY_RTOL * max_norm(arr)
        if asym > allowed:
            raise NotHermitian(asym, allowed)
        arr.setflags(write=False)
        self.matrix = arr
        self._spectrum = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> Spectrum:
        """Cached eigensystem (computed on first access)."""
        if self._spectrum is None:
            self._spectrum = eigensystem(self)
        return self._spectrum

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


def hermitian_from_matrix(m) -> HermitianOperator:
    """Wrap `m` as a HermitianOperator, enforcing the Hermiticity gate."""
    return HermitianOperator(m)


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, HermitianOperator):
        return op.matrix
    return as_complex_matrix(op)


class QuantumState:
    """Normalized complex vector on a (possibly composite) Hilbert space.

    `factor_dims` records the subsystem dimensions; their product must equal
    the total dimension.  A plain system has `factor_dims == (dim,)`.
    """

    __slots__ = ("amplitudes", "factor_dims")

    def __init__(self, amplitudes, factor_dims: Sequence[int] | None = None):
        arr = np.array(amplitudes, dtype=complex).reshape(-1)
        if arr.size == 0:
            raise DimMismatch("state vector must be non-empty")
        if not np.isfinite(arr).all():
            raise NonFinite("state vector contains non-finite entries")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise StateNotNormalized(f"norm deviates from 1 by {abs(norm - 1.0):.3e}")
        if factor_dims is None:
            factor_dims = (arr.size,)
        factor_dims = tuple(int(d) for d in factor_dims)
        if any(d <= 0 for d in factor_dims) or int(np.prod(factor_dims)) != arr.size:
            raise DimMismatch(
                f"factor dims {factor_dims} do not multiply to dim {arr.size}"
            )
        arr.setflags(write=False)
        self.amplitudes = arr
        self.factor_dims = factor_dims

    @classmethod
    def normalized(cls, amplitudes, factor_dims=None) -> "QuantumState":
        """Build a state from an unnormalized vector."""
        arr = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise StateNotNormalized("cannot normalize the zero vector")
        return cls(arr / norm, factor_dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __repr__(self):
        return f"QuantumState(dim={self.dim}, factors={self.factor_dims})"


def eigensystem(h: HermitianOperator) -> Spectrum:
    """Deterministic eigendecomposition of a Hermitian operator.

    Ascending eigenvalues; ties within the degeneracy tolerance are ordered
    by the lexicographic key of the phase-fixed eigenvector.
    """
    a = h.matrix
    try:
        eigenvalues, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare in practice
        raise ConvergenceFailure(str(exc)) from None
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    vectors = np.array(vectors, dtype=complex)

    for c in range(vectors.shape[1]):
        col = vectors[:, c]
        above = np.flatnonzero(np.abs(col) > _PHASE_CUTOFF)
        pivot = above[0] if above.size else int(np.argmax(np.abs(col)))
        z = col[pivot]
        if abs(z) > 0:
            vectors[:, c] = col * (z.conjugate() / abs(z))

    scale = max(1.0, max_norm(a))
    tol = DEGENERACY_RTOL * scale
    groups = _group_by_gap(eigenvalues, tol)

    # deterministic order inside each degenerate run
    order = []
    for g in groups:
        keyed = sorted(g, key=lambda c: _lex_key(vectors[:, c]))
        order.extend(keyed)
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    groups = _group_by_gap(eigenvalues, tol)

    if max_norm(a @ vectors - vectors * eigenvalues) > SPECTRUM_TOL * scale:
        raise ConvergenceFailure("eigenpair residual exceeds tolerance")
    eye = np.eye(a.shape[0])
    if max_norm(vectors.conj().T @ vectors - eye) > SPECTRUM_TOL:
        raise ConvergenceFailure("eigenvector matrix is not unitary")

    group_values = np.array([float(np.mean(eigenvalues[list(g)])) for g in groups])
    eigenvalues.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(eigenvalues, vectors, groups, group_values)


def _group_by_gap(values: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


def _lex_key(col: np.ndarray) -> tuple:
    return tuple(x for pair in zip(col.real, col.imag) for x in pair)


def apply_spectral_function(h: HermitianOperator, f: Callable[[float], float]) -> HermitianOperator:
    """Spectral functional calculus: sum of f(a_i) v_i v_i^dag.

    `f` is applied to each eigenvalue as a Python float; it must return a
    finite real number everywhere on the spectrum.
    """
    s = h.spectrum
    values = np.empty(s.dim, dtype=float)
    for i, lam in enumerate(s.eigenvalues):
        try:
            values[i] = float(f(float(lam)))
        except (ValueError, ArithmeticError, TypeError) as exc:
            raise DomainError(f"function undefined at eigenvalue {lam!r}: {exc}") from None
    if not np.isfinite(values).all():
        raise DomainError("function produced a non-finite value on the spectrum")
    m = (s.eigenvectors * values) @ s.eigenvectors.conj().T
    # exact symmetry can be lost to rounding; the result is Hermitian by construction
    return HermitianOperator((m + m.conj().T) / 2)


def commutator(a, b) -> np.ndarray:
    """A B - B A for matrices or HermitianOperators of equal dimension.

    Products go through einsum rather than gemm: 3M-style complex gemm adds
    roundoff that would spoil the exact zero of structurally commuting
    operators (for example, embeddings on disjoint tensor factors).
    """
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimMismatch(f"dims {ma.shape[0]} and {mb.shape[0]} differ")
    return np.einsum("ik,kj->ij", ma, mb) - np.einsum("ik,kj->ij", mb, ma)


def expectation(h, v: QuantumState) -> float:
    """<v|H|v> for Hermitian H; the imaginary residue must be negligible."""
    m = _as_matrix(h)
    if m.shape[0] != v.dim:
        raise DimMismatch(f"operator dim {m.shape[0]} vs state dim {v.dim}")
    val = complex(v.amplitudes.conj() @ (m @ v.amplitudes))
    tol = 1e-12 * max(1.0, abs(val), max_norm(m))
    if abs(val.imag) > tol:
        raise ImaginaryResidue(f"imaginary part {val.imag:.3e} exceeds {tol:.3e}")
    return val.real


def tensor(a, b):
    """Kronecker product of two operators or two states."""
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(np.kron(a.matrix, b.matrix))
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        return QuantumState(
            np.kron(a.amplitudes, b.amplitudes), a.factor_dims + b.factor_dims
        )
    raise TypeError("tensor expects two HermitianOperators or two QuantumStates")


def embed_operator(op: HermitianOperator, factor_dims: Sequence[int], subsystem: int) -> HermitianOperator:
    """Embed `op`, acting on one factor, into the full composite space."""
    factor_dims = tuple(int(d) for d in factor_dims)
    if not 0 <= subsystem < len(factor_dims):
        raise DimMismatch(f"subsystem {subsystem} outside factors {factor_dims}")
    if op.dim != factor_dims[subsystem]:
        raise DimMismatch(
            f"operator dim {op.dim} does not match factor {factor_dims[subsystem]}"
        )
    m = np.eye(1, dtype=complex)
    for k, d in enumerate(factor_dims):
        m = np.kron(m, op.matrix if k == subsystem else np.eye(d))
    return HermitianOperator(m)


@dataclass(frozen=True)
class MeasurementOutcome:
    value: float
    collapsed: QuantumState
    outcome_index: int


def outcome_probabilities(v: QuantumState, h: HermitianOperator) -> np.ndarray:
    """Born probabilities of each outcome group of `h` in state `v`."""
    s = h.spectrum
    if s.dim != v.dim:
        raise DimMismatch(f"operator dim {s.dim} vs state dim {v.dim}")
    probs = np.array(
        [float(np.linalg.norm(p @ v.amplitudes) ** 2) for p in s.projectors()]
    )
    return probs / probs.sum()


def measure_projective(v: QuantumState, h: HermitianOperator, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement with collapse onto the outcome eigenspace.

    Consumes exactly one uniform draw from `rng` and selects the outcome by
    inverting the cumulative Born distribution over outcome groups, taken in
    spectrum order.
    """
    s = h.spectrum
    if s.dim != v.dim:
        raise DimMismatch(f"operator dim {s.dim} vs state dim {v.dim}")
    projected = [p @ v.amplitudes for p in s.projectors()]
    probs = np.array([float(np.linalg.norm(w) ** 2) for w in projected])
    probs = probs / probs.sum()
    u = float(rng.random())
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    idx = min(idx, len(probs) - 1)
    w = projected[idx]
    collapsed = QuantumState(w / np.linalg.norm(w), v.factor_dims)
    return MeasurementOutcome(float(s.group_values[idx]), collapsed, idx)


# ---------------------------------------------------------------------------
# JSON serialization: {"dim": n, "re": [...], "im": [...]} flattened row-major
# ---------------------------------------------------------------------------

def matrix_to_dict(m) -> dict:
    arr = as_complex_matrix(m)
    return {
        "dim": arr.shape[0],
        "re": arr.real.reshape(-1).tolist(),
        "im": arr.imag.reshape(-1).tolist(),
    }


def matrix_from_dict(d: dict) -> np.ndarray:
    n = int(d["dim"])
    re = np.asarray(d["re"], dtype=float).reshape(n, n)
    im = np.asarray(d.get("im", np.zeros(n * n)), dtype=float).reshape(n, n)
    return re + 1j * im


def operator_to_dict(h: HermitianOperator) -> dict:
    return matrix_to_dict(h.matrix)


def operator_from_dict(d: dict) -> HermitianOperator:
    return HermitianOperator(matrix_from_dict(d))


def state_to_dict(v: QuantumState) -> dict:
    out = {
        "dim": v.dim,
        "re": v.amplitudes.real.tolist(),
        "im": v.amplitudes.imag.tolist(),
    }
    if v.factor_dims != (v.dim,):
        out["factor_dims"] = list(v.factor_dims)
    return out


def state_from_dict(d: dict) -> QuantumState:
    n = int(d["dim"])
    re = np.asarray(d["re"], dtype=float).reshape(n)
    im = np.asarray(d.get("im", np.zeros(n)), dtype=float).reshape(n)
    return QuantumState(re + 1j * im, d.get("factor_dims"))


def operator_to_json(h: HermitianOperator) -> str:
    return json.dumps(operator_to_dict(h), sort_keys=True)


def operator_from_json(text: str) -> HermitianOperator:
    return operator_from_dict(json.loads(text))


def state_to_json(v: QuantumState) -> str:
    return json.dumps(state_to_dict(v), sort_keys=True)


def state_from_json(text: str) -> QuantumState:
    return state_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# random ensembles used by the verification suites and tests
# ---------------------------------------------------------------------------

def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianOperator:
    """Random Hermitian operator with entries of order `scale`."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(scale * (g + g.conj().T) / 2)


def random_state(dim: int, rng: np.random.Generator, factor_dims: Sequence[int] | None = None) -> QuantumState:
    g = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState.normalized(g, factor_dims)


def random_commuting_family(
    dim: int, count: int, rng: np.random.Generator
) -> list[HermitianOperator]:
    """Hermitian operators sharing one random eigenbasis, so they all commute."""
    basis = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
    out = []
    for _ in range(count):
        vals = rng.normal(size=dim)
        m = (basis * vals) @ basis.conj().T
        out.append(HermitianOperator((m + m.conj().T) / 2))
    return out
