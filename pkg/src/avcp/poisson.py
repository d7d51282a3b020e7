"""Exact Poisson brackets for polynomial observables on canonical pairs.

Polynomials over (x_1..x_N; p_1..p_N) carry exact rational coefficients, so
the bracket axioms (antisymmetry, Leibniz, Jacobi) hold identically, not just
numerically.  The bracket-commutator rule

    i*alpha * Op({F, H}) = [Op(F), Op(H)]

is checked in a truncated ladder representation on the sub-block that
truncation leaves intact, provided F, H and {F, H} are all simple there; the
x^3 / p^3 pair shows what goes wrong when the bracket is not simple.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import expressions as ex
from .errors import DimTooSmall, NonSimpleInput, UnboundVariable, UnsupportedExpression
from .expressions import BindingSet
from .kinematics import FockTruncation
from .operators import commutator, max_norm

_Exponents = tuple  # (x1..xN, p1..pN) exponent tuple


def _coerce(c) -> Fraction:
    # Fraction(float) is exact for the binary value, so nothing is lost here
    return c if isinstance(c, Fraction) else Fraction(c)


@dataclass(frozen=True)
class CanonicalPolynomial:
    """Polynomial over canonical coordinates with exact coefficients."""

    n_pairs: int
    terms: tuple[tuple[_Exponents, Fraction], ...]

    @classmethod
    def from_terms(cls, terms: Mapping[_Exponents, object], n_pairs: int) -> "CanonicalPolynomial":
        clean = {}
        for exps, c in terms.items():
            exps = tuple(int(k) for k in exps)
            if len(exps) != 2 * n_pairs or any(k < 0 for k in exps):
                raise ValueError(f"bad exponent tuple {exps} for {n_pairs} pair(s)")
            c = _coerce(c)
            if c != 0:
                clean[exps] = clean.get(exps, Fraction(0)) + c
        return cls(n_pairs, tuple(sorted((e, c) for e, c in clean.items() if c != 0)))

    @classmethod
    def zero(cls, n_pairs: int = 1) -> "CanonicalPolynomial":
        return cls(n_pairs, ())

    @classmethod
    def coordinate(cls, kind: str, index: int = 0, n_pairs: int = 1) -> "CanonicalPolynomial":
        """The monomial x_index or p_index."""
        if kind not in ("x", "p") or not 0 <= index < n_pairs:
            raise ValueError(f"no coordinate {kind}{index} with {n_pairs} pair(s)")
        exps = [0] * (2 * n_pairs)
        exps[index + (n_pairs if kind == "p" else 0)] = 1
        return cls.from_terms({tuple(exps): 1}, n_pairs)

    @classmethod
    def constant(cls, c, n_pairs: int = 1) -> "CanonicalPolynomial":
        return cls.from_terms({(0,) * (2 * n_pairs): c}, n_pairs)

    def _dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other):
        other = self._match(other)
        d = self._dict()
        for e, c in other.terms:
            d[e] = d.get(e, Fraction(0)) + c
        return CanonicalPolynomial.from_terms(d, self.n_pairs)

    def __sub__(self, other):
        other = self._match(other)
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return CanonicalPolynomial.from_terms(
                {e: c * _coerce(other) for e, c in self.terms}, self.n_pairs
            )
        other = self._match(other)
        out: dict[_Exponents, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return CanonicalPolynomial.from_terms(out, self.n_pairs)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = CanonicalPolynomial.constant(1, self.n_pairs)
        for _ in range(k):
            out = out * self
        return out

    def _match(self, other) -> "CanonicalPolynomial":
        if isinstance(other, (int, float, Fraction)):
            return CanonicalPolynomial.constant(other, self.n_pairs)
        if other.n_pairs != self.n_pairs:
            raise ValueError("polynomials use different numbers of canonical pairs")
        return other

    def differentiate(self, kind: str, index: int = 0) -> "CanonicalPolynomial":
        pos = index + (self.n_pairs if kind == "p" else 0)
        out: dict[_Exponents, Fraction] = {}
        for e, c in self.terms:
            if e[pos] == 0:
                continue
            key = tuple(k - 1 if i == pos else k for i, k in enumerate(e))
            out[key] = out.get(key, Fraction(0)) + c * e[pos]
        return CanonicalPolynomial.from_terms(out, self.n_pairs)

    def total_degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, xs, ps) -> float:
        total = 0.0
        for e, c in self.terms:
            val = float(c)
            for i in range(self.n_pairs):
                val *= xs[i] ** e[i] * ps[i] ** e[self.n_pairs + i]
            total += val
        return total

    def variable_name(self, pos: int) -> str:
        if self.n_pairs == 1:
            return "x" if pos == 0 else "p"
        return (f"x{pos + 1}" if pos < self.n_pairs else f"p{pos - self.n_pairs + 1}")

    def to_expr(self) -> ex.ObservableExpr:
        """Equivalent observable expression over x/p (or x1..xN, p1..pN)."""
        parts = []
        for e, c in self.terms:
            factors: list = []
            if c != 1 or not any(e):
                factors.append(ex.Const(float(c)))
            for pos, k in enumerate(e):
                if k == 0:
                    continue
                var = ex.Var(self.variable_name(pos))
                factors.append(var if k == 1 else ex.Pow(var, k))
            parts.append(factors[0] if len(factors) == 1 else ex.Mul(tuple(factors)))
        if not parts:
            return ex.Const(0.0)
        return parts[0] if len(parts) == 1 else ex.Add(tuple(parts))

    def __repr__(self):
        return f"CanonicalPolynomial({ex.to_string(self.to_expr())!r})"


def parse_canonical(text: str, n_pairs: int = 1) -> CanonicalPolynomial:
    """Parse a polynomial over the reserved names x1..xN, p1..pN (x, p when N=1)."""
    form = ex.expand_polynomial(ex.parse(text))
    allowed: dict[str, int] = {}
    for i in range(n_pairs):
        allowed[f"x{i + 1}"] = i
        allowed[f"p{i + 1}"] = n_pairs + i
    if n_pairs == 1:
        allowed["x"] = 0
        allowed["p"] = 1
    terms: dict[_Exponents, Fraction] = {}
    for m, c in form.terms:
        if m.func_powers:
            raise UnsupportedExpression("canonical polynomials admit no function factors")
        exps = [0] * (2 * n_pairs)
        for name, k in m.var_powers:
            if name not in allowed:
                raise UnboundVariable(
                    f"{name!r} is not a canonical coordinate for {n_pairs} pair(s)"
                )
            exps[allowed[name]] += k
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + _coerce(c)
    return CanonicalPolynomial.from_terms(terms, n_pairs)


def poisson_bracket(f: CanonicalPolynomial, h: CanonicalPolynomial) -> CanonicalPolynomial:
    """{f, h} = sum_i (df/dx_i dh/dp_i - dh/dx_i df/dp_i), exactly."""
    if f.n_pairs != h.n_pairs:
        raise ValueError("polynomials use different numbers of canonical pairs")
    out = CanonicalPolynomial.zero(f.n_pairs)
    for i in range(f.n_pairs):
        out = out + f.differentiate("x", i) * h.differentiate("p", i)
        out = out - h.differentiate("x", i) * f.differentiate("p", i)
    return out


def _fock_bindings(rep: FockTruncation) -> BindingSet:
    return BindingSet({"x": rep.x_op, "p": rep.p_op})


@dataclass(frozen=True)
class DiracRuleReport:
    """Residual of i*alpha*Op({f,h}) = [Op(f), Op(h)] on the safe sub-block."""

    residual: float
    scale: float
    tolerance: float
    passed: bool
    safe_dim: int
    total_degree: int
    bracket: CanonicalPolynomial


def check_dirac_rule(
    f: CanonicalPolynomial, h: CanonicalPolynomial, rep: FockTruncation
) -> DiracRuleReport:
    """Verify the bracket-commutator rule for simple f, h on one canonical pair.

    Truncation corrupts only the top rows/columns, one per unit of total
    degree of f*h, so the comparison is restricted to the leading sub-block.
    Raises NonSimpleInput naming whichever of f, h, {f,h} mixes x and p.
    """
    if f.n_pairs != 1 or h.n_pairs != 1:
        raise ValueError("operator checks run on a single canonical pair")
    bracket = poisson_bracket(f, h)
    bindings = _fock_bindings(rep)
    failures = {}
    for label, poly in (("f", f), ("h", h), ("{f,h}", bracket)):
        verdict = ex.classify_simple(poly.to_expr(), bindings)
        if not verdict.simple:
            failures[label] = verdict.offending_pairs
    if failures:
        raise NonSimpleInput(failures)

    f_op = ex.quantize(f.to_expr(), bindings)
    h_op = ex.quantize(h.to_expr(), bindings)
    pb_op = ex.quantize(bracket.to_expr(), bindings)
    degree = f.total_degree() + h.total_degree()
    safe = rep.n_levels - degree
    if safe < 1:
        raise DimTooSmall(f"degree {degree} leaves no safe sub-block at n={rep.n_levels}")
    lhs = 1j * rep.alpha * pb_op.matrix
    rhs = commutator(f_op, h_op)
    diff = (lhs - rhs)[:safe, :safe]
    scale = 1.0 + max_norm(rhs[:safe, :safe])
    residual = max_norm(diff)
    tol = 1e-9 * scale
    return DiracRuleReport(residual, scale, tol, residual <= tol, safe, degree, bracket)


@dataclass(frozen=True)
class CounterexampleReport:
    """Gap between [x^3, gamma p^3] and the symmetrized bracket operator.

    `scalar` is the fitted constant lambda with difference ~ lambda * I on
    the safe sub-block; `off_scalar_residual` measures how far the
    difference is from an exact scalar matrix there.
    """

    gamma: float
    alpha: float
    safe_dim: int
    scalar: complex
    scalar_magnitude: float
    off_scalar_residual: float
    bracket: CanonicalPolynomial

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "safe_dim": self.safe_dim,
            "scalar_re": self.scalar.real,
            "scalar_im": self.scalar.imag,
            "scalar_magnitude": self.scalar_magnitude,
            "off_scalar_residual": self.off_scalar_residual,
        }


def counterexample_report(gamma: float, rep: FockTruncation) -> CounterexampleReport:
    """Quantify the failure of the bracket rule for f = x^3, h = gamma p^3.

    The bracket {f, h} = 9 gamma x^2 p^2 is not simple, so no operator
    represents it; symmetrizing anyway gives (9 i gamma alpha / 2)
    (X^2 P^2 + P^2 X^2), which misses the true commutator by the scalar
    matrix 3i gamma alpha^3 I on the safe sub-block.
    """
    if rep.n_levels < 16:
        raise DimTooSmall("need at least 16 levels for a meaningful sub-block")
    x = rep.x_op.matrix
    p = rep.p_op.matrix
    x2, p2 = x @ x, p @ p
    lhs = commutator(x2 @ x, gamma * (p2 @ p))
    rhs = (9j * gamma * rep.alpha / 2) * (x2 @ p2 + p2 @ x2)
    safe = rep.n_levels - 6
    diff = (lhs - rhs)[:safe, :safe]
    scalar = complex(np.trace(diff) / safe)
    off = max_norm(diff - scalar * np.eye(safe))
    f = parse_canonical("x^3")
    h = parse_canonical("p^3") * gamma
    return CounterexampleReport(
        gamma=float(gamma),
        alpha=rep.alpha,
        safe_dim=safe,
        scalar=scalar,
        scalar_magnitude=abs(scalar),
        off_scalar_residual=off,
        bracket=poisson_bracket(f, h),
    )
