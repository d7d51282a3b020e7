"""Unitary time evolution generated by Hamiltonian schedules.

In a time-independent background a state picks up exp(-i H dt / alpha); a
time-dependent background is handled by slicing the interval and multiplying
the per-slice propagators, with the Hamiltonian sampled at slice midpoints
(second-order accurate in the slice width).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimMismatch, ScheduleGap
from .operators import (
    HermitianOperator,
    QuantumState,
    commutator,
    expectation,
    hermitian_from_matrix,
    matrix_from_dict,
    matrix_to_dict,
)

_CONTIGUITY_RTOL = 1e-12
_NORM_DRIFT_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Hamiltonian as a function of time over a finite interval.

    Either a list of contiguous constant `pieces` (t0, t1, operator) or a
    callable `fn(t) -> HermitianOperator`, together with the covered span and
    the evolution constant `alpha`.
    """

    t_start: float
    t_end: float
    alpha: float = 1.0
    pieces: tuple[tuple[float, float, HermitianOperator], ...] | None = None
    fn: Callable[[float], HermitianOperator] | None = None

    @classmethod
    def piecewise(cls, pieces: Sequence[tuple[float, float, HermitianOperator]], alpha: float = 1.0):
        items = sorted(((float(a), float(b), h) for a, b, h in pieces), key=lambda p: p[0])
        if not items:
            raise ScheduleGap("schedule needs at least one piece")
        dims = {h.dim for _, _, h in items}
        if len(dims) != 1:
            raise DimMismatch(f"schedule pieces disagree on dimension: {sorted(dims)}")
        span = items[-1][1] - items[0][0]
        tol = _CONTIGUITY_RTOL * max(1.0, abs(span))
        for (a0, b0, _), (a1, _, _) in zip(items, items[1:]):
            if abs(a1 - b0) > tol:
                raise ScheduleGap(f"pieces are not contiguous at t={b0!r} vs {a1!r}")
        for a, b, _ in items:
            if b < a:
                raise ScheduleGap(f"piece with negative duration: [{a}, {b}]")
        return cls(items[0][0], items[-1][1], float(alpha), tuple(items), None)

    @classmethod
    def constant(cls, h: HermitianOperator, t_start: float, t_end: float, alpha: float = 1.0):
        return cls.piecewise([(t_start, t_end, h)], alpha)

    @classmethod
    def from_function(cls, fn, t_start: float, t_end: float, alpha: float = 1.0):
        if t_end < t_start:
            raise ScheduleGap("t_end precedes t_start")
        return cls(float(t_start), float(t_end), float(alpha), None, fn)

    @property
    def dim(self) -> int:
        if self.pieces is not None:
            return self.pieces[0][2].dim
        return self.at(self.t_start).dim

    def at(self, t: float) -> HermitianOperator:
        """Hamiltonian in force at time `t`."""
        if self.fn is not None:
            h = self.fn(t)
            return h if isinstance(h, HermitianOperator) else hermitian_from_matrix(h)
        for a, b, h in self.pieces:
            if a <= t <= b:
                return h
        raise ScheduleGap(f"t={t!r} outside schedule [{self.t_start}, {self.t_end}]")

    def restrict(self, t0: float, t1: float) -> "HamiltonianSchedule":
        """Sub-schedule over [t0, t1], which must sit inside the span."""
        tol = _CONTIGUITY_RTOL * max(1.0, abs(self.t_end - self.t_start))
        if t0 < self.t_start - tol or t1 > self.t_end + tol or t1 < t0:
            raise ScheduleGap(f"[{t0}, {t1}] not inside [{self.t_start}, {self.t_end}]")
        if self.fn is not None:
            return HamiltonianSchedule(t0, t1, self.alpha, None, self.fn)
        kept = []
        for a, b, h in self.pieces:
            lo, hi = max(a, t0), min(b, t1)
            if hi > lo + tol or (t0 == t1 and lo <= t0 <= hi):
                kept.append((lo, hi, h))
        if not kept:
            kept = [(t0, t1, self.pieces[0][2])]
        return HamiltonianSchedule.piecewise(kept, self.alpha)

    @classmethod
    def from_dict(cls, d) -> "HamiltonianSchedule":
        """JSON form: list of pieces {t0, t1, operator}, or a wrapper with alpha."""
        alpha = 1.0
        pieces = d
        if isinstance(d, dict):
            alpha = float(d.get("alpha", 1.0))
            pieces = d["pieces"]
        items = [
            (float(p["t0"]), float(p["t1"]), hermitian_from_matrix(matrix_from_dict(p["operator"])))
            for p in pieces
        ]
        return cls.piecewise(items, alpha)

    def to_dict(self) -> dict:
        if self.pieces is None:
            raise ValueError("only piecewise schedules serialize to JSON")
        return {
            "alpha": self.alpha,
            "pieces": [
                {"t0": a, "t1": b, "operator": matrix_to_dict(h.matrix)}
                for a, b, h in self.pieces
            ],
        }


def propagator(h: HermitianOperator, dt: float, alpha: float = 1.0) -> np.ndarray:
    """Unitary exp(-i H dt / alpha), built through the spectral calculus."""
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    if dt == 0.0:
        return np.eye(h.dim, dtype=complex)
    s = h.spectrum
    phases = np.exp(-1j * s.eigenvalues * (dt / alpha))
    return (s.eigenvectors * phases) @ s.eigenvectors.conj().T


def evolve(v: QuantumState, sched: HamiltonianSchedule, steps: int) -> QuantumState:
    """Propagate across the schedule span with `steps` midpoint-sampled slices."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    span = sched.t_end - sched.t_start
    if span == 0:
        return QuantumState(v.amplitudes.copy(), v.factor_dims)
    if sched.dim != v.dim:
        raise DimMismatch(f"schedule dim {sched.dim} vs state dim {v.dim}")
    amps = np.array(v.amplitudes, dtype=complex)
    dt = span / steps
    for k in range(steps):
        mid = sched.t_start + (k + 0.5) * dt
        amps = propagator(sched.at(mid), dt, sched.alpha) @ amps
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > _NORM_DRIFT_TOL:
            raise DimMismatch(f"norm drifted by {abs(norm - 1.0):.3e} in one slice")
        amps /= norm
    return QuantumState(amps, v.factor_dims)


def check_energy_conservation(v: QuantumState, h: HermitianOperator, dt: float, alpha: float = 1.0) -> float:
    """|<H> after - <H> before| under the constant-background propagator."""
    before = expectation(h, v)
    after_amps = propagator(h, dt, alpha) @ v.amplitudes
    after = expectation(h, QuantumState.normalized(after_amps, v.factor_dims))
    return abs(after - before)


def check_ehrenfest(
    f: HermitianOperator, h: HermitianOperator, v: QuantumState, dt: float, alpha: float = 1.0
) -> float:
    """Residual of the finite-difference form of d<F>/dt = (i/alpha) <[H, F]>.

    The residual is O(dt); pick dt well below 1/|H| for a meaningful check.
    """
    now = expectation(f, v)
    later_amps = propagator(h, dt, alpha) @ v.amplitudes
    later = expectation(f, QuantumState.normalized(later_amps, v.factor_dims))
    drift = (later - now) / dt
    rate = (1j / alpha) * complex(
        v.amplitudes.conj() @ (commutator(h, f) @ v.amplitudes)
    )
    return abs(drift - rate.real) + abs(rate.imag)
