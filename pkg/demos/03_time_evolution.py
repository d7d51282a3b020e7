"""Temporal evolution: the propagator, schedules, and conservation checks.

A constant background evolves states by exp(-i H dt / alpha).  Time-dependent
backgrounds are handled by slicing and multiplying constant-background
propagators; midpoint sampling makes the error second order in the slice
width.  Energy expectation is conserved in any constant background, and the
rate of change of any expectation is (i/alpha) <[H, F]>.
"""

import numpy as np

from avcp import (
    HamiltonianSchedule,
    HermitianOperator,
    QuantumState,
    check_ehrenfest,
    check_energy_conservation,
    evolve,
    expectation,
    make_rng,
    propagator,
)
from avcp.operators import random_hermitian, random_state

print(__doc__)

# --- phases on eigenstates ---------------------------------------------------
h = HermitianOperator(np.diag([1.0, 3.5]).astype(complex))
ground = QuantumState([1, 0])
dt, alpha = 0.8, 1.0
u = propagator(h, dt, alpha)
phase = (u @ ground.amplitudes)[0]
print(f"eigenstate phase:  exp(-i E dt / alpha) = {np.exp(-1j * 1.0 * dt):.6f}")
print(f"propagator gives:  {phase:.6f}")
print()

# --- conservation -------------------------------------------------------------
rng = make_rng(5)
h4 = random_hermitian(4, rng)
v4 = random_state(4, rng)
print(f"energy conservation residual: {check_energy_conservation(v4, h4, 0.37):.3e}")
print()

# --- Rabi oscillation checks --------------------------------------------------
omega = 1.3
hx = HermitianOperator(0.5 * omega * np.array([[0, 1], [1, 0]], dtype=complex))
sz = HermitianOperator(np.array([[1, 0], [0, -1]], dtype=complex))
up = QuantumState([1, 0])
for t in (0.3, 0.9, 1.7):
    sched = HamiltonianSchedule.constant(hx, 0.0, t)
    got = expectation(sz, evolve(up, sched, 64))
    print(f"  <sz>(t={t}):  evolved {got:+.9f}   closed form {np.cos(omega * t):+.9f}")
print()
print(f"instantaneous-rate residual (dt=1e-5): {check_ehrenfest(sz, hx, random_state(2, rng), 1e-5):.3e}")
print()

# --- second-order convergence for a time-dependent background -----------------
h0 = random_hermitian(3, rng)
h1 = random_hermitian(3, rng)
sched_t = HamiltonianSchedule.from_function(
    lambda t: HermitianOperator(h0.matrix + t * h1.matrix), 0.0, 1.0
)
v0 = random_state(3, rng)
reference = evolve(v0, sched_t, 10_000).amplitudes
errors = {
    n: np.linalg.norm(evolve(v0, sched_t, n).amplitudes - reference) for n in (8, 16, 32, 64)
}
print("slices   error        ratio to previous")
prev = None
for n, e in errors.items():
    ratio = "" if prev is None else f"{prev / e:.2f}"
    print(f"{n:6d}   {e:.3e}   {ratio}")
    prev = e
print("doubling the slice count divides the error by about 4: midpoint")
print("sampling is second order.")
