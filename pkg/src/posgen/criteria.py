"""The condition engine: margin-bearing reports for every characterization.

A symmetric semigroup T_t = e^{tL} on M(n) is positive iff any (hence all)
of these hold:

  semigroup_positive    T_t maps the PSD cone into itself for all t >= 0
  resolvent_positive    (lam - L)^{-1} is positive for large lam
  resolvent_sa          R(a^2) + a R(1) a >= R(a) a + a R(a), self-adjoint a
  resolvent_u           R(1) + u* R(1) u >= R(u*) u + u* R(u), unitary u
  semigroup_sa          same dissipation shape with T_t in place of R
  semigroup_u           ditto for unitaries
  resolvent_exp         e^{s (lam-L)^{-1}} is positive for s >= 0, large lam
  generator_sa          L(a^2) + a L(1) a >= L(a) a + a L(a)  (bounded case)
  generator_u           L(1) + u* L(1) u >= L(u*) u + u* L(u)

Each condition is evaluated over probe sets and grids, aggregated as minimum
margins, and the cross-condition agreement is itself the test oracle: a report
where one condition is comfortably satisfied and another comfortably violated
means the toolkit is broken, not the mathematics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig, subseed
from .errors import ConsistencyError, HypothesisViolation
from .instances import hermitian_from, unitary_from
from .matrixcore import classify_element, frozen, mat_exp, spectral_norm
from .semigroup import (
    QuadratureSpec,
    _as_handle,
    _quad_nodes,
    decay_horizon,
    evolve,
    lambda_grid,
    resolvent,
)
from .superop import (
    CERTIFIED_POSITIVE,
    NO_VIOLATION_FOUND,
    VIOLATED,
    ConeVerdict,
    ContractionBudget,
    PositivityBudget,
    Superoperator,
    apply,
    contraction_check,
    is_symmetric_map,
    is_unital,
    positivity_check,
    vec,
)

CONDITION_IDS = (
    "semigroup_positive",
    "resolvent_positive",
    "resolvent_sa",
    "resolvent_u",
    "semigroup_sa",
    "semigroup_u",
    "resolvent_exp",
    "generator_sa",
    "generator_u",
)

SATISFIED = "satisfied"
VIOLATED_VERDICT = "violated"
INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# probe sets
# ---------------------------------------------------------------------------


def _structured_selfadjoint(n: int) -> list:
    probes = [np.eye(n, dtype=complex)]
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        probes.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1.0, 1.0j):
                v = np.zeros(n, dtype=complex)
                v[i] = 1.0
                v[j] = phase
                v /= np.sqrt(2.0)
                probes.append(np.outer(v, v.conj()))
    return probes


def _structured_unitaries(n: int) -> list:
    omega = np.exp(2j * np.pi / n)
    clock = np.diag(omega ** np.arange(n))
    shift = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    return [np.eye(n, dtype=complex), clock, shift]


@dataclass(frozen=True)
class ProbeSet:
    """Deterministic quantifier instances: the 'for all a / for all u' probes.

    Structured members (the unit, rank-one projectors, clock and shift) are
    always present; the rest are seeded Gaussian Hermitians and Haar
    unitaries.  Every member is validated for its declared class at 1e-9.
    """

    selfadjoint: tuple
    unitaries: tuple
    seed: int

    def __post_init__(self):
        for a in self.selfadjoint:
            if not classify_element(a, tol=1e-9).hermitian:
                raise ValueError("self-adjoint probe fails its class check")
        for u in self.unitaries:
            if not classify_element(u, tol=1e-9).unitary:
                raise ValueError("unitary probe fails its class check")

    @classmethod
    def build(
        cls, n: int, n_selfadjoint: int = 50, n_unitary: int = 50, seed: int = 0
    ) -> "ProbeSet":
        sa_rng = np.random.default_rng(np.random.SeedSequence((int(seed), 31)))
        u_rng = np.random.default_rng(np.random.SeedSequence((int(seed), 32)))
        sa = _structured_selfadjoint(n)
        sa += [hermitian_from(sa_rng, n) for _ in range(n_selfadjoint)]
        us = _structured_unitaries(n)
        us += [unitary_from(u_rng, n) for _ in range(n_unitary)]
        return cls(
            selfadjoint=tuple(frozen(a) for a in sa),
            unitaries=tuple(frozen(u) for u in us),
            seed=int(seed),
        )


# ---------------------------------------------------------------------------
# dissipation kernels
# ---------------------------------------------------------------------------


def _vec_rows(batch: np.ndarray) -> np.ndarray:
    m = batch.shape[0]
    return batch.transpose(0, 2, 1).reshape(m, -1)


def _unvec_rows(rows: np.ndarray, n: int) -> np.ndarray:
    return rows.reshape(-1, n, n).swapaxes(1, 2)


def _apply_batch(rep: np.ndarray, batch: np.ndarray) -> np.ndarray:
    return _unvec_rows(_vec_rows(batch) @ rep.T, batch.shape[-1])


def _unit_image(rep: np.ndarray, n: int) -> np.ndarray:
    return _unvec_rows((rep @ vec(np.eye(n, dtype=complex)))[None, :], n)[0]


def sa_dissipation_batch(rep: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Phi(a^2) + a Phi(1) a - Phi(a) a - a Phi(a) for a stack of Hermitian a."""
    n = probes.shape[-1]
    phi1 = _unit_image(rep, n)
    phi_a = _apply_batch(rep, probes)
    phi_a2 = _apply_batch(rep, probes @ probes)
    return phi_a2 + probes @ phi1 @ probes - phi_a @ probes - probes @ phi_a


def u_dissipation_batch(rep: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Phi(1) + u* Phi(1) u - Phi(u*) u - u* Phi(u) for a stack of unitary u."""
    n = probes.shape[-1]
    phi1 = _unit_image(rep, n)
    uh = probes.conj().swapaxes(1, 2)
    phi_u = _apply_batch(rep, probes)
    phi_uh = _apply_batch(rep, uh)
    return phi1[None, :, :] + uh @ phi1 @ probes - phi_uh @ probes - uh @ phi_u


def dissipation_margins(d_batch: np.ndarray) -> np.ndarray:
    """Skew-penalized least eigenvalues: the condition holds iff these are >= 0."""
    herm = (d_batch + d_batch.conj().swapaxes(1, 2)) / 2
    skew = np.abs(d_batch - d_batch.conj().swapaxes(1, 2)).max(axis=(1, 2)) / 2
    return np.linalg.eigvalsh(herm)[:, 0] - skew


def dissipation_resolvent(h, lam: float, a) -> np.ndarray:
    """R(a^2) + a R(1) a - R(a) a - a R(a) with R = (lam - L)^{-1}."""
    rep = resolvent(_as_handle(h), lam).rep
    return frozen(sa_dissipation_batch(rep, np.asarray(a, dtype=complex)[None])[0])


def dissipation_resolvent_unitary(h, lam: float, u) -> np.ndarray:
    rep = resolvent(_as_handle(h), lam).rep
    return frozen(u_dissipation_batch(rep, np.asarray(u, dtype=complex)[None])[0])


def dissipation_semigroup(h, t: float, a) -> np.ndarray:
    """T_t(a^2) + a T_t(1) a - T_t(a) a - a T_t(a)."""
    rep = evolve(_as_handle(h), t).rep
    return frozen(sa_dissipation_batch(rep, np.asarray(a, dtype=complex)[None])[0])


def dissipation_semigroup_unitary(h, t: float, u) -> np.ndarray:
    rep = evolve(_as_handle(h), t).rep
    return frozen(u_dissipation_batch(rep, np.asarray(u, dtype=complex)[None])[0])


def generator_dissipation(gen, a) -> np.ndarray:
    """L(a^2) + a L(1) a - L(a) a - a L(a): the bounded-generator inequality."""
    rep = _as_handle(gen).generator.rep
    return frozen(sa_dissipation_batch(rep, np.asarray(a, dtype=complex)[None])[0])


def generator_dissipation_unitary(gen, u) -> np.ndarray:
    rep = _as_handle(gen).generator.rep
    return frozen(u_dissipation_batch(rep, np.asarray(u, dtype=complex)[None])[0])


def laplace_dissipation(
    h, lam: float, a, quad: QuadratureSpec = QuadratureSpec()
) -> np.ndarray:
    """Quadrature of e^{-lam t} [T_t(a^2) + a T_t(1) a - T_t(a) a - a T_t(a)].

    By linearity of the Laplace transform this equals the resolvent-level
    dissipation operator; the toolkit computes both routes independently so
    the identity stays checkable.
    """
    h = _as_handle(h)
    a = np.asarray(a, dtype=complex)
    t_star = decay_horizon(h, lam, quad)
    nodes, weights = _quad_nodes(t_star, quad)
    reps = h.evolve_rep(nodes)
    n = h.n
    eye = np.eye(n, dtype=complex)
    # batched over quadrature nodes: each rep acts on the fixed probes
    imgs = _unvec_rows(
        np.stack([vec(a), vec(a @ a), vec(eye)]) @ reps.transpose(0, 2, 1), n
    ).reshape(len(nodes), 3, n, n)
    phi_a, phi_a2, phi1 = imgs[:, 0], imgs[:, 1], imgs[:, 2]
    d_t = phi_a2 + a @ phi1 @ a - phi_a @ a - a @ phi_a
    coeff = weights * np.exp(-lam * nodes)
    return frozen(np.einsum("t,tij->ij", coeff, d_t))


# ---------------------------------------------------------------------------
# condition evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeRef:
    """Pointer to the probe/grid point that achieved a condition's margin."""

    kind: str | None  # "selfadjoint" | "unitary" | None for map-level checks
    index: int | None
    grid_value: float | None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "grid_value": None if self.grid_value is None else float(self.grid_value),
        }


@dataclass(frozen=True)
class ConditionResult:
    condition_id: str
    grid: tuple
    min_margin: float
    worst_probe: ProbeRef | None
    verdict: str

    def to_json(self) -> dict:
        return {
            "id": self.condition_id,
            "grid": [float(g) for g in self.grid],
            "min_margin": float(self.min_margin),
            "verdict": self.verdict,
            "worst_probe": None if self.worst_probe is None else self.worst_probe.to_json(),
        }


def _verdict(min_margin: float, tol: float, evaluated: bool) -> str:
    if not evaluated:
        return INCONCLUSIVE
    return SATISFIED if min_margin >= -tol else VIOLATED_VERDICT


def _cone_scan(maps, grid, budget, tol):
    """positivity_check over a family of maps; returns (margin, worst grid point)."""
    best = np.inf
    worst = None
    for g, s in zip(grid, maps):
        verdict = positivity_check(s, budget=budget, tol=tol)
        if verdict.margin < best:
            best = float(verdict.margin)
            worst = float(g)
    return best, worst


def _probe_scan(rep_for, grid, probes, kernel):
    """Dissipation margins over probes x grid; returns (margin, worst ref)."""
    best = np.inf
    worst = None
    stack = np.stack(probes)
    for g in grid:
        margins = dissipation_margins(kernel(rep_for(g), stack))
        k = int(np.argmin(margins))
        if margins[k] < best:
            best = float(margins[k])
            worst = (k, float(g))
    return best, worst


def check_condition(h, condition_id: str, probes: ProbeSet, config: RunConfig) -> ConditionResult:
    """Evaluate one condition over its grid, aggregating margins as minima."""
    if condition_id not in CONDITION_IDS:
        raise ValueError(f"unknown condition id {condition_id!r}")
    h = _as_handle(h)
    tol = config.tol("predicate")
    lams = lambda_grid(h, config.lambda_multipliers)
    budget = PositivityBudget(
        seed=subseed(config.seed, 17, CONDITION_IDS.index(condition_id))
    )

    if condition_id == "semigroup_positive":
        grid = config.t_grid
        margin, g = _cone_scan((evolve(h, t) for t in grid), grid, budget, tol)
        worst = ProbeRef(None, None, g)
    elif condition_id == "resolvent_positive":
        grid = lams
        margin, g = _cone_scan((resolvent(h, l) for l in grid), grid, budget, tol)
        worst = ProbeRef(None, None, g)
    elif condition_id == "resolvent_exp":
        grid = tuple((s, l) for s in config.s_grid for l in lams)
        maps = (
            Superoperator(h.n, mat_exp(s * resolvent(h, l).rep)) for s, l in grid
        )
        best, worst_sl = np.inf, None
        for (s, l), m in zip(grid, maps):
            verdict = positivity_check(m, budget=budget, tol=tol)
            if verdict.margin < best:
                best, worst_sl = float(verdict.margin), (s, l)
        margin = best
        worst = ProbeRef(None, None, None if worst_sl is None else worst_sl[1])
        grid = tuple(float(l) for l in lams)
    elif condition_id in ("resolvent_sa", "resolvent_u"):
        grid = lams
        kernel = sa_dissipation_batch if condition_id.endswith("sa") else u_dissipation_batch
        pool = probes.selfadjoint if condition_id.endswith("sa") else probes.unitaries
        margin, hit = _probe_scan(lambda l: resolvent(h, l).rep, grid, pool, kernel)
        kind = "selfadjoint" if condition_id.endswith("sa") else "unitary"
        worst = None if hit is None else ProbeRef(kind, hit[0], hit[1])
    elif condition_id in ("semigroup_sa", "semigroup_u"):
        grid = config.t_grid
        kernel = sa_dissipation_batch if condition_id.endswith("sa") else u_dissipation_batch
        pool = probes.selfadjoint if condition_id.endswith("sa") else probes.unitaries
        margin, hit = _probe_scan(lambda t: evolve(h, t).rep, grid, pool, kernel)
        kind = "selfadjoint" if condition_id.endswith("sa") else "unitary"
        worst = None if hit is None else ProbeRef(kind, hit[0], hit[1])
    else:  # generator_sa / generator_u
        grid = ()
        kernel = sa_dissipation_batch if condition_id.endswith("sa") else u_dissipation_batch
        pool = probes.selfadjoint if condition_id.endswith("sa") else probes.unitaries
        stack = np.stack(pool)
        margins = dissipation_margins(kernel(h.generator.rep, stack))
        k = int(np.argmin(margins))
        margin = float(margins[k])
        kind = "selfadjoint" if condition_id.endswith("sa") else "unitary"
        worst = ProbeRef(kind, k, None)

    evaluated = np.isfinite(margin)
    return ConditionResult(
        condition_id=condition_id,
        grid=tuple(float(g) if not isinstance(g, tuple) else float(g[1]) for g in grid),
        min_margin=float(margin) if evaluated else float("nan"),
        worst_probe=worst,
        verdict=_verdict(margin, tol, evaluated),
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Report:
    """All equivalent conditions with margins, plus the agreement flag."""

    conditions: tuple
    consistency_flag: bool
    tolerances: dict

    def by_id(self, condition_id: str) -> ConditionResult:
        for c in self.conditions:
            if c.condition_id == condition_id:
                return c
        raise KeyError(condition_id)

    def to_json(self) -> dict:
        return {
            "conditions": [c.to_json() for c in self.conditions],
            "consistency": bool(self.consistency_flag),
            "tolerances": {k: float(v) for k, v in sorted(self.tolerances.items())},
        }


def theorem1_report(h, config: RunConfig = RunConfig()) -> Theorem1Report:
    """Evaluate every condition; hypothesis: the semigroup is symmetric."""
    h = _as_handle(h)
    for t in config.t_grid:
        s_t = evolve(h, t)
        # no contraction hypothesis here, so entries of T_t can be huge;
        # judge the symmetry deviation relative to the map's own scale
        scale = max(1.0, float(np.abs(s_t.rep).max()))
        sym = is_symmetric_map(s_t, tol=config.tol("predicate") * scale)
        if not sym.verdict:
            raise HypothesisViolation(
                f"semigroup is not symmetric at t={t:g}: deviation {sym.margin:.3e}"
            )
    probes = ProbeSet.build(
        h.n, config.n_selfadjoint, config.n_unitary, subseed(config.seed, 11)
    )
    conditions = tuple(
        check_condition(h, cid, probes, config) for cid in CONDITION_IDS
    )
    margins = [c.min_margin for c in conditions if np.isfinite(c.min_margin)]
    ctol = config.tol("consistency")
    consistency_flag = not (
        margins and max(margins) > ctol and min(margins) < -ctol
    )
    return Theorem1Report(
        conditions=conditions,
        consistency_flag=consistency_flag,
        tolerances=dict(config.tolerances),
    )


@dataclass(frozen=True)
class Theorem2Report:
    """Both sides of: L(1) = 0 and L symmetric  <=>  T_t positive and unital.

    Hypothesis: T_t is a contraction semigroup (checked, not assumed).
    """

    unit_margin: float
    symmetry_margin: float
    contraction_status: str
    contraction_bound: float
    positive: ConeVerdict
    unital_margin: float
    direction_consistency: bool

    def to_json(self) -> dict:
        return {
            "unit_margin": float(self.unit_margin),
            "symmetry_margin": float(self.symmetry_margin),
            "contraction": {
                "status": self.contraction_status,
                "norm_lower_bound": float(self.contraction_bound),
            },
            "positive": {
                "status": self.positive.status,
                "margin": float(self.positive.margin),
            },
            "unital_margin": float(self.unital_margin),
            "direction_consistency": bool(self.direction_consistency),
        }


def _aggregate_cone(verdicts) -> ConeVerdict:
    verdicts = list(verdicts)
    margin = min(v.margin for v in verdicts)
    samples = sum(v.samples_used for v in verdicts)
    witness = None
    if any(v.status == VIOLATED for v in verdicts):
        status = VIOLATED
        for v in verdicts:
            if v.status == VIOLATED and v.margin == margin:
                witness = v.witness
    elif all(v.status == CERTIFIED_POSITIVE for v in verdicts):
        status = CERTIFIED_POSITIVE
    else:
        status = NO_VIOLATION_FOUND
    return ConeVerdict(status=status, margin=margin, samples_used=samples, witness=witness)


def theorem2_check(h, config: RunConfig = RunConfig()) -> Theorem2Report:
    """Generator-side margins versus semigroup-side positivity and unitality."""
    h = _as_handle(h)
    tol = config.tol("predicate")
    cbudget = ContractionBudget(seed=subseed(config.seed, 23))
    bound = 0.0
    statuses = []
    for t in config.t_grid:
        verdict = contraction_check(evolve(h, t), budget=cbudget, tol=tol)
        bound = max(bound, verdict.norm_lower_bound)
        if verdict.status == VIOLATED:
            raise HypothesisViolation(
                f"semigroup is not contractive: sampled norm {verdict.norm_lower_bound:.6g} "
                f"at t={t:g}"
            )
        statuses.append(verdict.status)
    contraction_status = (
        statuses[0] if all(s == statuses[0] for s in statuses) else NO_VIOLATION_FOUND
    )

    unit_margin = float(spectral_norm(apply(h.generator, np.eye(h.n))))
    symmetry_margin = float(is_symmetric_map(h.generator).margin)

    pbudget = PositivityBudget(seed=subseed(config.seed, 29))
    cone = _aggregate_cone(
        positivity_check(evolve(h, t), budget=pbudget, tol=tol) for t in config.t_grid
    )
    unital_margin = max(float(is_unital(evolve(h, t)).margin) for t in config.t_grid)

    left_holds = unit_margin <= tol and symmetry_margin <= tol
    right_holds = cone.status != VIOLATED and unital_margin <= tol
    return Theorem2Report(
        unit_margin=unit_margin,
        symmetry_margin=symmetry_margin,
        contraction_status=contraction_status,
        contraction_bound=float(bound),
        positive=cone,
        unital_margin=unital_margin,
        direction_consistency=left_holds == right_holds,
    )


def corollary1_check(h, config: RunConfig = RunConfig()) -> ConeVerdict:
    """Unital contraction semigroups are positive; verified, then replayed.

    Preconditions (unitality, contractivity) failing raise HypothesisViolation.
    A genuine positivity violation after the preconditions pass -- or an
    evolved spectrum escaping [0 - tol, 2 + tol] on normalized PSD probes --
    contradicts the characterization and raises ConsistencyError.
    """
    h = _as_handle(h)
    tol = config.tol("predicate")
    cbudget = ContractionBudget(seed=subseed(config.seed, 37))
    for t in config.t_grid:
        unital = is_unital(evolve(h, t), tol=tol)
        if not unital.verdict:
            raise HypothesisViolation(
                f"semigroup is not unital: deviation {unital.margin:.3e} at t={t:g}"
            )
        verdict = contraction_check(evolve(h, t), budget=cbudget, tol=tol)
        if verdict.status == VIOLATED:
            raise HypothesisViolation(
                f"semigroup is not contractive: sampled norm "
                f"{verdict.norm_lower_bound:.6g} at t={t:g}"
            )

    pbudget = PositivityBudget(seed=subseed(config.seed, 41))
    verdicts = []
    for t in config.t_grid:
        cone = positivity_check(evolve(h, t), budget=pbudget, tol=tol)
        if cone.status == VIOLATED:
            raise ConsistencyError(
                f"unital contraction semigroup shows a positivity violation of "
                f"{cone.margin:.3e} at t={t:g}"
            )
        verdicts.append(cone)

    # replay the spectral argument: normalized PSD probes stay in [0, 2]
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, 43)))
    for _ in range(config.n_states):
        g = (rng.standard_normal((h.n, h.n)) + 1j * rng.standard_normal((h.n, h.n)))
        a = g @ g.conj().T
        a /= spectral_norm(a)
        for t in config.t_grid:
            out = apply(evolve(h, t), a)
            w = np.linalg.eigvalsh((out + out.conj().T) / 2)
            if w.min() < -tol or w.max() > 2.0 + tol:
                raise ConsistencyError(
                    f"evolved spectrum [{w.min():.3e}, {w.max():.3e}] escapes "
                    f"[0, 2] at t={t:g}"
                )
    return _aggregate_cone(verdicts)
