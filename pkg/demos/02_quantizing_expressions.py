"""From classical expressions to operators: parsing, simplicity, quantization.

An expression over named measurements quantizes only if it is *simple*: its
polynomial expansion never multiplies outcomes of non-commuting measurements.
Sums always pass; products need commuting (or disjoint-subsystem) operators.
The popular fallback of symmetrizing non-commuting products is shown to be
self-contradictory, which is why it is rejected rather than adopted.
"""

import numpy as np

from avcp import (
    BindingSet,
    HermitianOperator,
    NonSimpleExpression,
    classify_simple,
    demonstrate_inconsistency,
    expand_polynomial,
    parse,
    quantize,
    to_string,
)

sx = HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex))
sy = HermitianOperator(np.array([[0, -1j], [1j, 0]], dtype=complex))
sz = HermitianOperator(np.array([[1, 0], [0, -1]], dtype=complex))

print(__doc__)

# --- expansion ------------------------------------------------------------
e = parse("(A + B)^2")
print(f"(A + B)^2 expands to: {to_string(expand_polynomial(e).to_expr())}")
print()

# --- simplicity against bindings -------------------------------------------
noncommuting = BindingSet({"A": sx, "B": sy})
for text in ("A + B", "A^2", "A*B", "(A + B)^2", "cos(A)"):
    verdict = classify_simple(parse(text), noncommuting)
    tag = "simple" if verdict.simple else f"NOT simple {verdict.offending_pairs}"
    print(f"  {text:12s} with [A,B] != 0  ->  {tag}")
print()

# operators on different subsystems always commute, so their product is fine
composite = BindingSet(
    {"A": (sx, 0), "B": (sz, 1)}, factor_dims=[2, 2]
)
print(f"  A*B across subsystems  ->  simple: {classify_simple(parse('A*B'), composite).simple}")
print()

# --- quantization -----------------------------------------------------------
print("quantize('A + B') =\n", quantize(parse("A + B"), noncommuting).matrix.real)
try:
    quantize(parse("A*B"), noncommuting)
except NonSimpleExpression as exc:
    print(f"quantize('A*B') raises: {exc}")
print()

# --- the symmetrization rule eats itself ------------------------------------
report = demonstrate_inconsistency(sx, sy)
print("Symmetrized-product quantizations of A^2*B:")
print("  grouped A*(A*B):\n", np.round(report.nested.matrix, 6))
print("  grouped (A^2)*B:\n", np.round(report.flat.matrix, 6))
print(f"  disagreement (max-norm): {report.difference_norm:.6f}")
