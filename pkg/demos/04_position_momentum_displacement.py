"""Position, momentum, and displacement on a truncated ladder basis.

The pair x, p built from ladder operators satisfies [x, p] = i*alpha exactly
except at the very last diagonal entry, where the truncation deposits a known
defect of -i*alpha*n.  States that keep essentially no weight near the
boundary therefore behave exactly canonically: exp(-i eps p / alpha) shifts
<x> by eps while leaving <p> untouched, and a Hamiltonian c*p drifts <x> at
rate c.
"""

import numpy as np

from avcp import (
    QuantumState,
    boundary_weight,
    build_fock,
    canonical_defect,
    coherent_state,
    displacement_unitary,
    expectation,
    photon_drift_check,
)
from avcp.errors import UnsafeState

print(__doc__)

f = build_fock(64, alpha=1.0)
d = canonical_defect(f)
off = d.copy()
off[-1, -1] = 0
print(f"defect corner entry     : {d[-1, -1]:.1f}   (expected -i*alpha*n = -64i)")
print(f"max |defect| elsewhere  : {np.abs(off).max():.2e}   (float dust only)")
strictly_off = off - np.diag(np.diag(off))
print(f"strictly off-diagonal   : {np.abs(strictly_off).max():.1f}   (exactly zero)")
print()

state = coherent_state(f, 1.2 + 0.4j)
print(f"boundary weight of the probe state: {boundary_weight(state):.2e}")
eps = 0.1
shifted = QuantumState.normalized(displacement_unitary(f, eps) @ state.amplitudes)
print(f"<x> before  {expectation(f.x_op, state):+.9f}")
print(f"<x> after   {expectation(f.x_op, shifted):+.9f}   (shift requested: {eps})")
print(f"<p> before  {expectation(f.p_op, state):+.9f}")
print(f"<p> after   {expectation(f.p_op, shifted):+.9f}   (unchanged)")
print()

print(f"drift residual for H = c p, c = 1, dt = 1e-4: {photon_drift_check(f, 1.0, state, 1e-4):.2e}")
print()

# the safety gate refuses states that pile up against the truncation boundary
top_heavy = QuantumState.normalized(np.linspace(0.0, 1.0, f.n_levels))
try:
    photon_drift_check(f, 1.0, top_heavy, 1e-4)
except UnsafeState as exc:
    print(f"top-heavy state rejected: {exc}")
