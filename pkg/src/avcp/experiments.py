"""Multi-copy measurement experiments.

A classically described measurement relates a target outcome to a function
`f` of implementation outcomes.  The quantum arrangement prepares one copy of
the system per set-up: measurements whose operators commute (or act on
different factors) share a copy and are performed in sequence with collapse,
while non-commuting measurements go on separate copies.  The target
measurement always gets its own copy.

This module plans those set-ups, computes the exact expectation of `f` by
enumerating outcome sequences, estimates it by seeded Monte Carlo, and
renders a verdict comparing the target operator's expectation against the
enumerated value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expressions as ex
from .errors import StateSpaceTooLarge, UnboundVariable
from .evolution import HamiltonianSchedule, evolve
from .expressions import BindingSet
from .operators import QuantumState, expectation, state_from_dict, state_to_dict

#: exact enumeration refuses to expand more outcome tuples than this
ENUMERATION_BUDGET = 10**6
#: verdict: |lhs - rhs| <= AVCP_RTOL * (1 + |lhs|)
AVCP_RTOL = 1e-9
_BRANCH_PRUNE = 1e-30


@dataclass(frozen=True)
class SetupPlan:
    """Partition of the implementation measurements into system copies."""

    groups: tuple[tuple[str, ...], ...]

    def slots(self) -> list[tuple[int, str]]:
        return [(g, name) for g, group in enumerate(self.groups) for name in group]


def plan_setups(names: Sequence[str], bindings: BindingSet) -> SetupPlan:
    """Greedy first-fit grouping.

    Scanning in declared order, each measurement joins the first group whose
    members it commutes with (different-factor pairs always commute); if none
    fits, it opens a new group.  The partition is deterministic but not the
    only one satisfying the pairwise constraints.
    """
    groups: list[list[str]] = []
    for name in names:
        bindings.binding(name)
        for group in groups:
            if all(bindings.commute(name, other) for other in group):
                group.append(name)
                break
        else:
            groups.append([name])
    return SetupPlan(tuple(tuple(g) for g in groups))


@dataclass(frozen=True)
class EvolutionWindow:
    """Shared background between preparation and the two measurement times.

    The schedule starts at the preparation time; the implementation
    measurements happen at `t1` and the target measurement at `t2`, each on a
    fresh copy evolved from the initial state.
    """

    schedule: HamiltonianSchedule
    t1: float
    t2: float
    steps: int = 128

    def state_at(self, v0: QuantumState, t: float) -> QuantumState:
        sub = self.schedule.restrict(self.schedule.t_start, t)
        if sub.t_end == sub.t_start:
            return v0
        return evolve(v0, sub, self.steps)

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionWindow":
        sched = HamiltonianSchedule.from_dict(d["schedule"])
        return cls(sched, float(d["t1"]), float(d["t2"]), int(d.get("steps", 128)))

    def to_dict(self) -> dict:
        return {
            "schedule": self.schedule.to_dict(),
            "t1": self.t1,
            "t2": self.t2,
            "steps": self.steps,
        }


class ExperimentSpec:
    """Declarative description of one experimental arrangement.

    `f` relates the implementation outcomes (its variables) to the target
    outcome.  When `target` is None the target operator is derived by
    quantizing `f`, which requires `f` to be simple; binding the target to an
    explicit measurement allows deliberately unsound candidates to be put to
    the test.  `groups` overrides the planner (the override must still keep
    non-commuting measurements apart), which is how same-operator
    measurements are forced onto separate copies.
    """

    def __init__(
        self,
        initial_state: QuantumState,
        bindings: BindingSet,
        implementation: Sequence[str],
        f,
        target: str | None = None,
        evolution: EvolutionWindow | None = None,
        groups: Sequence[Sequence[str]] | None = None,
    ):
        self.initial_state = initial_state
        self.bindings = bindings
        self.implementation = tuple(implementation)
        self.f = ex.parse(f) if isinstance(f, str) else f
        self.target = target
        self.evolution = evolution
        if initial_state.dim != bindings.dim:
            raise UnboundVariable(
                f"state dim {initial_state.dim} does not match bindings dim {bindings.dim}"
            )
        for name in self.implementation:
            bindings.binding(name)
        if target is not None:
            bindings.binding(target)
            if target in self.implementation:
                raise ValueError("target must not be an implementation measurement")
        missing = ex.variables(self.f) - set(self.implementation)
        if missing:
            raise UnboundVariable(f"f uses non-implementation variables {sorted(missing)}")
        if groups is None:
            self.plan = plan_setups(self.implementation, bindings)
        else:
            self.plan = SetupPlan(tuple(tuple(g) for g in groups))
            flat = [n for g in self.plan.groups for n in g]
            if sorted(flat) != sorted(self.implementation):
                raise ValueError("groups override must cover the implementation exactly")
            for group in self.plan.groups:
                for i, a in enumerate(group):
                    for b in group[i + 1:]:
                        if not bindings.commute(a, b):
                            raise ValueError(
                                f"override groups {a!r} and {b!r} together but they do not commute"
                            )

    def state_at_t1(self) -> QuantumState:
        if self.evolution is None:
            return self.initial_state
        return self.evolution.state_at(self.initial_state, self.evolution.t1)

    def state_at_t2(self) -> QuantumState:
        if self.evolution is None:
            return self.initial_state
        return self.evolution.state_at(self.initial_state, self.evolution.t2)

    def target_operator(self):
        if self.target is not None:
            return self.bindings.embedded(self.target)
        return ex.quantize(self.f, self.bindings)

    # JSON schema: {state, bindings, implementation, target?, f, n_trials,
    # seed, evolution?, groups?}
    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(
            initial_state=state_from_dict(d["state"]),
            bindings=BindingSet.from_dict(d["bindings"]),
            implementation=d["implementation"],
            f=d["f"],
            target=d.get("target"),
            evolution=(
                EvolutionWindow.from_dict(d["evolution"]) if d.get("evolution") else None
            ),
            groups=d.get("groups"),
        )

    def to_dict(self) -> dict:
        out = {
            "state": state_to_dict(self.initial_state),
            "bindings": self.bindings.to_dict(),
            "implementation": list(self.implementation),
            "f": ex.to_string(self.f),
        }
        if self.target is not None:
            out["target"] = self.target
        if self.evolution is not None:
            out["evolution"] = self.evolution.to_dict()
        out["groups"] = [list(g) for g in self.plan.groups]
        return out


def _group_branches(group: Sequence[str], bindings: BindingSet, state: QuantumState):
    """All outcome sequences of one copy: (probability, {name: value}).

    Measurements are applied in declaration order with collapse, so the
    probability of a branch is the product of conditional Born probabilities.
    """
    branches = [(1.0, np.array(state.amplitudes), {})]
    for name in group:
        spectrum = bindings.embedded(name).spectrum
        projs = spectrum.projectors()
        nxt = []
        for prob, amps, values in branches:
            for g, p in enumerate(projs):
                w = p @ amps
                q = float(np.vdot(w, w).real)
                if q <= _BRANCH_PRUNE:
                    continue
                nxt.append(
                    (
                        prob * q,
                        w / math.sqrt(q),
                        {**values, name: float(spectrum.group_values[g])},
                    )
                )
        branches = nxt
        if len(branches) > ENUMERATION_BUDGET:
            raise StateSpaceTooLarge(f"more than {ENUMERATION_BUDGET} outcome branches")
    return [(p, values) for p, _, values in branches]


def enumerate_expectation(spec: ExperimentSpec) -> float:
    """Exact E[f]: independent copies across groups, sequential collapse within."""
    budget = 1
    for group in spec.plan.groups:
        for name in group:
            budget *= len(spec.bindings.embedded(name).spectrum.outcome_groups)
        if budget > ENUMERATION_BUDGET:
            raise StateSpaceTooLarge(f"more than {ENUMERATION_BUDGET} outcome tuples")
    v1 = spec.state_at_t1()
    per_group = [_group_branches(g, spec.bindings, v1) for g in spec.plan.groups]
    total = 0.0
    for combo in itertools.product(*per_group):
        prob = 1.0
        values: dict[str, float] = {}
        for p, vals in combo:
            prob *= p
            values.update(vals)
        total += prob * float(ex.evaluate(spec.f, values))
    return total


@dataclass(frozen=True)
class AvcpVerdict:
    holds: bool
    lhs: float
    rhs: float
    residual: float
    tolerance: float


def check_avcp(spec: ExperimentSpec) -> AvcpVerdict:
    """Compare the target operator's expectation against the enumerated E[f]."""
    lhs = expectation(spec.target_operator(), spec.state_at_t2())
    rhs = enumerate_expectation(spec)
    residual = abs(lhs - rhs)
    tol = AVCP_RTOL * (1.0 + abs(lhs))
    return AvcpVerdict(residual <= tol, lhs, rhs, residual, tol)


@dataclass
class ExperimentReport:
    """Sampled and exact expectations plus the correspondence verdict.

    `holds` is decided from the exact numbers at the standard tolerance; the
    z-scores locate the sampled means relative to their exact counterparts
    and to each other.
    """

    n_trials: int
    seed: int
    plan: tuple[tuple[str, ...], ...]
    sampled_lhs: float
    stderr_lhs: float
    sampled_rhs: float
    stderr_rhs: float
    exact_lhs: float
    exact_rhs: float
    residual: float
    tolerance: float
    holds: bool
    z_lhs: float
    z_rhs: float
    z_gap: float
    trial_target: np.ndarray | None = field(default=None, repr=False)
    trial_f: np.ndarray | None = field(default=None, repr=False)
    trial_values: dict[str, np.ndarray] | None = field(default=None, repr=False)

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "violated"

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "seed": self.seed,
            "plan": [list(g) for g in self.plan],
            "sampled_lhs": self.sampled_lhs,
            "stderr_lhs": self.stderr_lhs,
            "sampled_rhs": self.sampled_rhs,
            "stderr_rhs": self.stderr_rhs,
            "exact_lhs": self.exact_lhs,
            "exact_rhs": self.exact_rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "z_lhs": self.z_lhs,
            "z_rhs": self.z_rhs,
            "z_gap": self.z_gap,
        }

    def to_text(self) -> str:
        rows = [
            ("set-ups", " | ".join(",".join(g) for g in self.plan)),
            ("trials", str(self.n_trials)),
            ("seed", str(self.seed)),
            ("target mean (sampled)", f"{self.sampled_lhs:+.6f} +/- {self.stderr_lhs:.6f}"),
            ("f mean (sampled)", f"{self.sampled_rhs:+.6f} +/- {self.stderr_rhs:.6f}"),
            ("target mean (exact)", f"{self.exact_lhs:+.12f}"),
            ("f mean (exact)", f"{self.exact_rhs:+.12f}"),
            ("residual", f"{self.residual:.3e} (tolerance {self.tolerance:.3e})"),
            ("z-scores", f"lhs {self.z_lhs:.2f}, rhs {self.z_rhs:.2f}, gap {self.z_gap:.2f}"),
            ("verdict", self.verdict),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _batch_measure(states: np.ndarray, spectrum, u: np.ndarray):
    """Vectorized projective measurement of every row state.

    Row i consumes uniform u[i]; outcome selection inverts the cumulative
    Born distribution over outcome groups, matching the scalar
    `measure_projective` draw for draw.
    """
    projs = np.stack(spectrum.projectors())
    projected = np.einsum("gij,nj->ngi", projs, states)
    probs = np.einsum("ngi,ngi->ng", projected.conj(), projected).real
    probs /= probs.sum(axis=1, keepdims=True)
    cum = np.cumsum(probs, axis=1)
    idx = np.minimum((cum <= u[:, None]).sum(axis=1), len(projs) - 1)
    chosen = projected[np.arange(states.shape[0]), idx]
    norms = np.linalg.norm(chosen, axis=1, keepdims=True)
    values = spectrum.group_values[idx]
    return values, chosen / norms


def run_trials(spec: ExperimentSpec, n: int, seed: int, keep_trials: bool = False) -> ExperimentReport:
    """Run `n` independent trials of the experimental arrangement.

    Trial i draws its randomness from row i of a uniform table generated
    once from `seed` (one column per measurement slot, target last), so the
    outcome of a trial is a function of (seed, trial index) alone and the
    report does not depend on execution order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    slots = spec.plan.slots()
    uniforms = np.random.default_rng(seed).random((n, len(slots) + 1))

    v1 = spec.state_at_t1().amplitudes
    values: dict[str, np.ndarray] = {}
    col = 0
    for group in spec.plan.groups:
        states = np.tile(v1, (n, 1))
        for name in group:
            spectrum = spec.bindings.embedded(name).spectrum
            values[name], states = _batch_measure(states, spectrum, uniforms[:, col])
            col += 1

    v2 = spec.state_at_t2()
    target_op = spec.target_operator()
    target_vals, _ = _batch_measure(
        np.tile(v2.amplitudes, (n, 1)), target_op.spectrum, uniforms[:, col]
    )

    f_vals = np.asarray(ex.evaluate(spec.f, values), dtype=float)
    if f_vals.ndim == 0:
        f_vals = np.full(n, float(f_vals))

    def _mean_se(x: np.ndarray) -> tuple[float, float]:
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return mean, se

    sampled_lhs, se_lhs = _mean_se(target_vals)
    sampled_rhs, se_rhs = _mean_se(f_vals)
    exact_lhs = expectation(target_op, v2)
    exact_rhs = enumerate_expectation(spec)
    residual = abs(exact_lhs - exact_rhs)
    tol = AVCP_RTOL * (1.0 + abs(exact_lhs))

    def _z(gap: float, se: float) -> float:
        return abs(gap) / se if se > 0 else (0.0 if gap == 0 else math.inf)

    return ExperimentReport(
        n_trials=n,
        seed=seed,
        plan=spec.plan.groups,
        sampled_lhs=sampled_lhs,
        stderr_lhs=se_lhs,
        sampled_rhs=sampled_rhs,
        stderr_rhs=se_rhs,
        exact_lhs=exact_lhs,
        exact_rhs=exact_rhs,
        residual=residual,
        tolerance=tol,
        holds=residual <= tol,
        z_lhs=_z(sampled_lhs - exact_lhs, se_lhs),
        z_rhs=_z(sampled_rhs - exact_rhs, se_rhs),
        z_gap=_z(sampled_lhs - sampled_rhs, math.hypot(se_lhs, se_rhs)),
        trial_target=target_vals if keep_trials else None,
        trial_f=f_vals if keep_trials else None,
        trial_values=values if keep_trials else None,
    )
