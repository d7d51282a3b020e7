"""Why 'a measurement of A squared' is ambiguous, and what averaging fixes.

Classically it makes no difference whether you measure A once and square,
measure it twice on the same system and multiply, or measure two identically
prepared systems and multiply.  Quantum mechanically the first two agree with
<A^2> while the third gives <A>^2.  Requiring agreement *on average* is what
singles out A^2 as the operator for the first two implementations, and rules
out any operator at all for the third.
"""

from avcp import (
    BindingSet,
    ExperimentSpec,
    HermitianOperator,
    expectation,
    make_rng,
    run_trials,
)
from avcp.operators import random_hermitian, random_state

rng = make_rng(42)
op = random_hermitian(3, rng)
state = random_state(3, rng)

print(__doc__)
print(f"<A^2> = {expectation(HermitianOperator(op.matrix @ op.matrix), state):+.6f}")
print(f"<A>^2 = {expectation(op, state) ** 2:+.6f}")
print()

# (i) one copy: measure A, square the outcome
one = ExperimentSpec(state, BindingSet({"A": op}), ["A"], "A^2")
# (ii) one copy: measure A twice in a row, multiply the outcomes
both = BindingSet({"A1": op, "A2": op})
same_copy = ExperimentSpec(state, both, ["A1", "A2"], "A1*A2")
# (iii) two copies: the planner would put two commuting measurements on one
# copy, so the two-copy arrangement is forced explicitly
two_copies = ExperimentSpec(state, both, ["A1", "A2"], "A1*A2", groups=[["A1"], ["A2"]])

for label, spec in [("square the outcome", one),
                    ("repeat on the same copy", same_copy),
                    ("multiply across two copies", two_copies)]:
    report = run_trials(spec, 50_000, seed=7)
    print(f"--- {label} ---")
    print(report.to_text())
    print()

print("The same-copy implementations estimate <A^2>; the two-copy one")
print("estimates <A>^2.  Only the former can be represented by an operator")
print("whose expectation matches for every preparation, namely A^2 itself.")
