"""Residual-based verification suites behind the `verify` command.

Each suite runs a fixed list of seeded checks and reports every residual
against its threshold.  Reports are plain dicts of Python scalars so their
JSON rendering is byte-stable for a given seed.
"""

from __future__ import annotations

import math

import numpy as np

from .angular import (
    casimir_matrix,
    check_frame_rotation_covariance,
    check_rotation_identity,
    commutant_scalar_residual,
    full_turn_matrix,
    rotation_generator,
    spin_operators,
)
from .errors import AvcpError
from .evolution import HamiltonianSchedule, check_energy_conservation, evolve, propagator
from .experiments import ExperimentSpec, check_avcp, run_trials
from .expressions import BindingSet
from .kinematics import (
    boundary_weight,
    build_fock,
    canonical_defect,
    coherent_state,
    displacement_shift_residual,
    momentum_invariance_residual,
    photon_drift_check,
)
from .operators import (
    HermitianOperator,
    QuantumState,
    apply_spectral_function,
    commutator,
    expectation,
    make_rng,
    max_norm,
    measure_projective,
    operator_from_dict,
    operator_to_dict,
    random_commuting_family,
    random_hermitian,
    random_state,
    state_from_dict,
    state_to_dict,
    tensor,
)
from .poisson import (
    CanonicalPolynomial,
    check_dirac_rule,
    counterexample_report,
    parse_canonical,
    poisson_bracket,
)

SUITE_NAMES = ("operators", "avcp", "evolution", "kinematics", "angular", "poisson")


def _check(name: str, value: float, threshold: float, op: str = "<=") -> dict:
    value = float(value)
    threshold = float(threshold)
    passed = value <= threshold if op == "<=" else value >= threshold
    return {"name": name, "value": value, "threshold": threshold, "op": op, "passed": bool(passed)}


def _error_check(name: str, exc: Exception) -> dict:
    return {
        "name": name,
        "error": type(exc).__name__,
        "detail": str(exc),
        "passed": False,
    }


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _suite_operators(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    rng = make_rng(seed)
    checks = []

    worst = 0.0
    for dim in (2, 3, 4, 6, 8):
        h = random_hermitian(dim, rng)
        s = h.spectrum
        rebuilt = (s.eigenvectors * s.eigenvalues) @ s.eigenvectors.conj().T
        worst = max(worst, max_norm(rebuilt - h.matrix))
    checks.append(_check("spectral_reconstruction", worst, 1e-10))

    h = random_hermitian(5, rng)
    g = lambda x: 2 * x * x - 1.0
    f = lambda x: x**3 - x
    direct = apply_spectral_function(h, lambda x: f(g(x)))
    composed = apply_spectral_function(apply_spectral_function(h, g), f)
    checks.append(
        _check("functional_calculus_composition", max_norm(direct.matrix - composed.matrix), 1e-10)
    )

    v = random_state(4, rng)
    h4 = random_hermitian(4, rng)
    phased = QuantumState(v.amplitudes * np.exp(1j * 0.8137))
    checks.append(
        _check(
            "global_phase_invariance",
            abs(expectation(h4, v) - expectation(h4, phased)),
            1e-12,
        )
    )

    probe = random_hermitian(3, rng)
    state3 = random_state(3, rng)
    probs = np.array(
        [float(np.linalg.norm(p @ state3.amplitudes) ** 2) for p in probe.spectrum.projectors()]
    )
    n_draws = 6000
    counts = np.zeros(len(probs))
    for _ in range(n_draws):
        counts[measure_projective(state3, probe, rng).outcome_index] += 1
    freq = counts / n_draws
    z = 0.0
    for pk, fk in zip(probs, freq):
        sigma = math.sqrt(max(pk * (1 - pk), 1e-12) / n_draws)
        z = max(z, abs(fk - pk) / sigma)
    checks.append(_check("born_rule_sampling_z", z, 4.0))

    left = tensor(random_hermitian(2, rng), HermitianOperator(np.eye(3)))
    right = tensor(HermitianOperator(np.eye(2)), random_hermitian(3, rng))
    checks.append(_check("disjoint_factor_commutation", max_norm(commutator(left, right)), 0.0))

    op = random_hermitian(4, rng)
    state4 = random_state(4, rng)
    op_rt = operator_from_dict(operator_to_dict(op))
    st_rt = state_from_dict(state_to_dict(state4))
    round_trip = max(max_norm(op_rt.matrix - op.matrix), max_norm(st_rt.amplitudes - state4.amplitudes))
    checks.append(_check("json_round_trip", round_trip, 1e-15))
    return checks


# ---------------------------------------------------------------------------
# avcp
# ---------------------------------------------------------------------------

def _suite_avcp(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    rng = make_rng(seed)
    checks = []

    op = random_hermitian(4, rng)
    state = random_state(4, rng)
    spec_sq = ExperimentSpec(state, BindingSet({"A": op}), ["A"], "A^2")
    lhs = expectation(HermitianOperator(op.matrix @ op.matrix), state)
    from .experiments import enumerate_expectation

    checks.append(
        _check("square_same_copy_enumeration", abs(enumerate_expectation(spec_sq) - lhs), 1e-12)
    )

    two = BindingSet({"A1": op, "A2": op})
    spec_cop = ExperimentSpec(state, two, ["A1", "A2"], "A1*A2", groups=[["A1"], ["A2"]])
    checks.append(
        _check(
            "square_two_copies_enumeration",
            abs(enumerate_expectation(spec_cop) - expectation(op, state) ** 2),
            1e-12,
        )
    )

    a = random_hermitian(3, rng)
    b = random_hermitian(3, rng)
    st3 = random_state(3, rng)
    v = check_avcp(ExperimentSpec(st3, BindingSet({"A": a, "B": b}), ["A", "B"], "A + B"))
    checks.append(_check("sum_rule_noncommuting", v.residual, v.tolerance))

    ca, cb = random_commuting_family(4, 2, rng)
    st4 = random_state(4, rng)
    v = check_avcp(ExperimentSpec(st4, BindingSet({"A": ca, "B": cb}), ["A", "B"], "A*B"))
    checks.append(_check("product_rule_commuting", v.residual, v.tolerance))

    herm = HermitianOperator((a.matrix @ b.matrix + b.matrix @ a.matrix) / 2)
    worst = 0.0
    for _ in range(8):
        probe = random_state(3, rng)
        vv = check_avcp(
            ExperimentSpec(probe, BindingSet({"A": a, "B": b, "C": herm}), ["A", "B"], "A*B", target="C")
        )
        worst = max(worst, vv.residual)
    checks.append(_check("hermitized_product_violation", worst, 1e-6, op=">="))

    report = run_trials(
        ExperimentSpec(st3, BindingSet({"A": a, "B": b}), ["A", "B"], "A + 0.5*B"), 4000, seed
    )
    checks.append(_check("sampling_vs_enumeration_z", max(report.z_lhs, report.z_rhs), 4.0))

    rep = run_trials(
        ExperimentSpec(state, two, ["A1", "A2"], "A1*A2"), 500, seed, keep_trials=True
    )
    repeat_gap = float(np.abs(rep.trial_values["A1"] - rep.trial_values["A2"]).max())
    checks.append(_check("same_copy_repetition_identical", repeat_gap, 0.0))

    r1 = run_trials(ExperimentSpec(st3, BindingSet({"A": a, "B": b}), ["A", "B"], "A + B"), 2000, seed)
    r2 = run_trials(ExperimentSpec(st3, BindingSet({"A": a, "B": b}), ["A", "B"], "A + B"), 2000, seed)
    same = float(max(abs(x - y) for x, y in zip(r1.to_dict().values(), r2.to_dict().values()) if isinstance(x, float)))
    checks.append(_check("seeded_reproducibility", same, 0.0))
    return checks


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def _suite_evolution(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    rng = make_rng(seed)
    checks = []
    worst_u = worst_norm = worst_energy = worst_comp = 0.0
    for _ in range(10):
        dim = int(rng.integers(2, 7))
        h = random_hermitian(dim, rng)
        v = random_state(dim, rng)
        dt = float(rng.uniform(0.1, 2.0))
        u = propagator(h, dt, alpha)
        worst_u = max(worst_u, max_norm(u.conj().T @ u - np.eye(dim)))
        worst_norm = max(worst_norm, abs(np.linalg.norm(u @ v.amplitudes) - 1.0))
        worst_energy = max(worst_energy, check_energy_conservation(v, h, dt, alpha))
        t1, t2 = float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.1, 1.0))
        comp = propagator(h, t2, alpha) @ propagator(h, t1, alpha) - propagator(h, t1 + t2, alpha)
        worst_comp = max(worst_comp, max_norm(comp))
    checks.append(_check("propagator_unitarity", worst_u, 1e-10))
    checks.append(_check("norm_conservation", worst_norm, 1e-12))
    checks.append(_check("energy_conservation", worst_energy, 1e-10))
    checks.append(_check("propagator_composition", worst_comp, 1e-10))

    h = random_hermitian(4, rng)
    s = h.spectrum
    eigstate = QuantumState(s.eigenvectors[:, 1])
    sched = HamiltonianSchedule.constant(h, 0.0, 1.3, alpha)
    evolved = evolve(eigstate, sched, 7)
    worst = 0.0
    for _ in range(4):
        probe = random_hermitian(4, rng)
        worst = max(worst, abs(expectation(probe, evolved) - expectation(probe, eigstate)))
    checks.append(_check("eigenstate_observables_frozen", worst, 1e-10))

    h0 = random_hermitian(3, rng)
    h1 = random_hermitian(3, rng)
    v0 = random_state(3, rng)

    def ht(t):
        return HermitianOperator(h0.matrix + t * h1.matrix)

    sched_t = HamiltonianSchedule.from_function(ht, 0.0, 1.0, alpha)
    ref = evolve(v0, sched_t, 4096).amplitudes

    def err(steps):
        return float(np.linalg.norm(evolve(v0, sched_t, steps).amplitudes - ref))

    ratio = err(16) / err(32)
    checks.append(_check("midpoint_order_ratio_dev", abs(ratio - 4.0), 0.45))
    return checks


# ---------------------------------------------------------------------------
# kinematics
# ---------------------------------------------------------------------------

def _suite_kinematics(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    checks = []
    worst_off = 0.0
    worst_diag = 0.0
    worst_corner = 0.0
    for n in (2, 3, 5, 8, 16, 32, max(2, levels)):
        f = build_fock(n, alpha)
        d = canonical_defect(f)
        corner = d[n - 1, n - 1]
        worst_corner = max(worst_corner, abs(corner - (-1j * alpha * n)) / max(1.0, alpha * n))
        d = np.array(d)
        d[n - 1, n - 1] = 0
        worst_diag = max(worst_diag, float(np.abs(np.diag(d)).max()))
        np.fill_diagonal(d, 0)
        worst_off = max(worst_off, max_norm(d))
    checks.append(_check("defect_strictly_offdiagonal", worst_off, 0.0))
    checks.append(_check("defect_diagonal_dust", worst_diag, 1e-13 * max(1.0, alpha)))
    checks.append(_check("defect_corner_value", worst_corner, 1e-12))

    f = build_fock(max(16, levels), alpha)
    state = coherent_state(f, 1.1 + 0.3j)
    checks.append(_check("coherent_state_is_safe", boundary_weight(state), 1e-10))
    checks.append(_check("displacement_shifts_x", displacement_shift_residual(f, state, 0.1), 1e-6))
    checks.append(_check("displacement_preserves_p", momentum_invariance_residual(f, state, 0.1), 1e-10))
    checks.append(_check("photon_drift", photon_drift_check(f, 1.0, state, 1e-4), 1e-5))
    return checks


# ---------------------------------------------------------------------------
# angular
# ---------------------------------------------------------------------------

def _suite_angular(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    rng = make_rng(seed)
    lo, hi = dims
    checks = []
    worst_cyc = worst_cas = worst_rot = 0.0
    for n in range(lo, hi + 1):
        t = spin_operators(n, alpha)
        pairs = (
            (t.lx, t.ly, t.lz),
            (t.ly, t.lz, t.lx),
            (t.lz, t.lx, t.ly),
        )
        for a, b, c in pairs:
            worst_cyc = max(
                worst_cyc, max_norm(commutator(a, b) - 1j * alpha * c.matrix)
            )
        cas = casimir_matrix(t) - alpha**2 * t.j * (t.j + 1) * np.eye(n)
        worst_cas = max(worst_cas, max_norm(cas))
        rz = rotation_generator("z", t)
        worst_rot = max(
            worst_rot,
            max_norm(commutator(rz, t.lx) - 1j * t.ly.matrix),
            max_norm(commutator(rz, t.ly) + 1j * t.lx.matrix),
            max_norm(commutator(rz, t.lz)),
        )
    checks.append(_check("cyclic_commutators", worst_cyc, 1e-10 * max(1.0, alpha**2)))
    checks.append(_check("casimir_scalar", worst_cas, 1e-10 * max(1.0, alpha**2)))
    checks.append(_check("rotation_generator_commutators", worst_rot, 1e-10 * max(1.0, alpha)))

    t2 = spin_operators(2, alpha)
    t3 = spin_operators(3, alpha)
    eps = 0.05
    ratios = []
    for t in (t2, t3):
        v = random_state(t.n, rng)
        ratios.append(check_rotation_identity(t, v, eps) / check_rotation_identity(t, v, eps / 2))
    dev = max(abs(r - 8.0) for r in ratios)
    checks.append(_check("rotation_identity_cubic_ratio_dev", dev, 2.0))

    v3 = random_state(3, rng)
    r1 = check_frame_rotation_covariance(t3, v3, 0.1)
    r2 = check_frame_rotation_covariance(t3, v3, 0.05)
    checks.append(_check("frame_covariance_quadratic_ratio_dev", abs(r1 / r2 - 4.0), 0.8))

    worst_comm = 0.0
    for n in (2, 3, 5, 8):
        null_dim, resid = commutant_scalar_residual(spin_operators(n, alpha))
        worst_comm = max(worst_comm, resid if null_dim == 1 else math.inf)
    checks.append(_check("commutant_is_scalar", worst_comm, 1e-8))

    worst_turn = 0.0
    for n in range(lo, hi + 1):
        t = spin_operators(n, alpha)
        sign = 1.0 if (n % 2) == 1 else -1.0
        worst_turn = max(worst_turn, max_norm(full_turn_matrix(t) - sign * np.eye(n)))
    checks.append(_check("full_turn_sign", worst_turn, 1e-10))
    return checks


# ---------------------------------------------------------------------------
# poisson
# ---------------------------------------------------------------------------

def _random_poly(rng, n_pairs=1, max_terms=4, max_deg=3) -> CanonicalPolynomial:
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        exps = tuple(int(rng.integers(0, max_deg + 1)) for _ in range(2 * n_pairs))
        terms[exps] = int(rng.integers(-5, 6))
    return CanonicalPolynomial.from_terms(terms, n_pairs)


def _suite_poisson(seed: int, alpha: float, levels: int, dims) -> list[dict]:
    rng = make_rng(seed)
    checks = []

    exact_failures = 0
    for _ in range(40):
        f = _random_poly(rng, n_pairs=2)
        g = _random_poly(rng, n_pairs=2)
        h = _random_poly(rng, n_pairs=2)
        if not (poisson_bracket(f, g) + poisson_bracket(g, f)).is_zero():
            exact_failures += 1
        if not (poisson_bracket(f * g, h) - f * poisson_bracket(g, h) - poisson_bracket(f, h) * g).is_zero():
            exact_failures += 1
        jac = (
            poisson_bracket(f, poisson_bracket(g, h))
            + poisson_bracket(g, poisson_bracket(h, f))
            + poisson_bracket(h, poisson_bracket(f, g))
        )
        if not jac.is_zero():
            exact_failures += 1
    checks.append(_check("bracket_axioms_exact_failures", exact_failures, 0.0))

    x = CanonicalPolynomial.coordinate("x", 0, 2)
    p2 = CanonicalPolynomial.coordinate("p", 1, 2)
    kron = poisson_bracket(x, p2)
    checks.append(_check("canonical_pairs_kronecker", 0.0 if kron.is_zero() else 1.0, 0.0))

    rep = build_fock(levels, alpha)
    pairs = [
        ("x", "p^2 + x^2"),
        ("x^2", "p"),
        ("x + p", "x - p"),
        ("x^3", "x^2 + 2*x"),
        ("p^2", "x"),
    ]
    worst = 0.0
    for fs, hs in pairs:
        rep_report = check_dirac_rule(parse_canonical(fs), parse_canonical(hs), rep)
        worst = max(worst, rep_report.residual / rep_report.scale)
    checks.append(_check("dirac_rule_safe_block", worst, 1e-9))

    ce = counterexample_report(1.0, rep)
    checks.append(_check("counterexample_off_scalar", ce.off_scalar_residual, 1e-8))
    checks.append(
        _check(
            "counterexample_gap_vs_oracle",
            abs(ce.scalar - 3j * 1.0 * alpha**3),
            1e-8 * max(1.0, alpha**3),
        )
    )
    return checks


_SUITES = {
    "operators": _suite_operators,
    "avcp": _suite_avcp,
    "evolution": _suite_evolution,
    "kinematics": _suite_kinematics,
    "angular": _suite_angular,
    "poisson": _suite_poisson,
}


def run_suite(
    suite: str,
    seed: int = 0,
    alpha: float = 1.0,
    levels: int = 64,
    dims: tuple[int, int] = (2, 12),
    extra_bindings: dict | None = None,
) -> dict:
    """Run one suite (or `all`) and return a JSON-ready report."""
    names = list(SUITE_NAMES) if suite == "all" else [suite]
    for name in names:
        if name not in _SUITES:
            raise ValueError(f"unknown suite {name!r}; options: all, {', '.join(SUITE_NAMES)}")
    checks: list[dict] = []
    for name in names:
        try:
            suite_checks = _SUITES[name](seed, alpha, levels, dims)
        except AvcpError as exc:
            suite_checks = [_error_check(f"{name}_suite", exc)]
        for c in suite_checks:
            c["suite"] = name
        checks.extend(suite_checks)
    if extra_bindings is not None:
        checks.append(_validate_bindings(extra_bindings))
    return {
        "suite": suite,
        "seed": seed,
        "alpha": alpha,
        "levels": levels,
        "dims": list(dims),
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def _validate_bindings(raw: dict) -> dict:
    try:
        BindingSet.from_dict(raw)
    except AvcpError as exc:
        out = _error_check("bindings_validation", exc)
        out["suite"] = "bindings"
        return out
    return {"name": "bindings_validation", "value": 0.0, "threshold": 0.0, "op": "<=", "passed": True, "suite": "bindings"}


def render_text(report: dict) -> str:
    lines = [
        f"suite: {report['suite']}   seed: {report['seed']}   alpha: {report['alpha']}",
        "",
    ]
    width = max(len(c["name"]) for c in report["checks"]) + 2
    for c in report["checks"]:
        if "error" in c:
            lines.append(f"FAIL  {c['name'].ljust(width)} error {c['error']}: {c['detail']}")
            continue
        mark = "ok  " if c["passed"] else "FAIL"
        lines.append(
            f"{mark}  {c['name'].ljust(width)} {c['value']:.3e} {c['op']} {c['threshold']:.3e}"
        )
    lines.append("")
    lines.append("PASSED" if report["passed"] else "FAILED")
    return "\n".join(lines)
