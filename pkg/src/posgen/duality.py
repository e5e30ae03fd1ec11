"""State-picture evolution via the trace pairing.

The observable-side semigroup T_t acts on matrices; its predual acts on
states (density matrices) through Tr(rho^dag T_t(a)) = Tr((T_t^*(rho))^dag a).
In the Hilbert-Schmidt representation the predual is just the conjugate
transpose of the vectorized propagator, so nothing here is constructed
independently of the observable picture -- the two sides cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .matrixcore import CMatrix, as_matrix, hermitian_part, frozen, spectral_norm
from .semigroup import _as_handle, evolve
from .superop import (
    NO_VIOLATION_FOUND,
    VIOLATED,
    Superoperator,
    apply,
    devec,
    hs_adjoint,
    vec,
)

STATE_TOL = 1e-9
_TRACE_TOL = 1e-10


def as_density(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD at `tol`, unit trace."""
    a = as_matrix(rho)
    herm_dev = np.abs(a - a.conj().T).max()
    if herm_dev > tol:
        raise ValueError(f"state is not hermitian (deviation {herm_dev:.3e})")
    min_eig = float(np.linalg.eigvalsh(hermitian_part(a)).min())
    if min_eig < -tol:
        raise ValueError(f"state is not positive (min eigenvalue {min_eig:.3e})")
    tr_dev = abs(np.trace(a) - 1.0)
    if tr_dev > _TRACE_TOL:
        raise ValueError(f"state trace differs from 1 by {tr_dev:.3e}")
    return frozen(a)


@dataclass(frozen=True)
class DensityMatrix:
    """A validated state: Hermitian, positive semidefinite, trace one."""

    rho: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", as_density(self.rho))

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def to_json(self) -> dict:
        return CMatrix(self.rho).to_json()

    @classmethod
    def from_json(cls, payload: dict) -> "DensityMatrix":
        try:
            return cls(CMatrix.from_json(payload).a)
        except ValueError as exc:
            raise SchemaError(f"not a density matrix: {exc}") from exc


def purity(rho) -> float:
    a = as_matrix(rho)
    return float(np.trace(a @ a.conj().T).real)


def predual_generator(s: Superoperator) -> Superoperator:
    """Generator of the state-side semigroup: the Hilbert-Schmidt adjoint."""
    return hs_adjoint(s)


def predual_evolve(gen, t: float, rho) -> np.ndarray:
    """Evolve a state: T_t^*(rho), the adjoint of the observable evolution."""
    h = _as_handle(gen)
    a = as_matrix(rho)
    if a.shape[0] != h.n:
        raise ValueError(f"state dimension {a.shape[0]} != generator dimension {h.n}")
    prop = evolve(h, t).rep
    return devec(prop.conj().T @ vec(a), h.n)


def pairing(rho, a) -> complex:
    """The duality pairing <rho, a> = Tr(rho^dag a)."""
    return complex(np.trace(as_matrix(rho).conj().T @ as_matrix(a)))


@dataclass(frozen=True)
class TracePreservationReport:
    """Two-sided test of: predual preserves traces  <=>  L(1) = 0.

    trace_margin   worst |Tr T_t^*(rho) - Tr rho| over states x t-grid
    unit_margin    ||L(1)|| (spectral norm) -- the dual formulation
    state_min_eig  worst min-eigenvalue of an evolved state (skew-penalized)
    state_status   cone verdict for the evolved states
    consistent     both margins pass or both fail at the tolerance
    """

    trace_margin: float
    unit_margin: float
    state_min_eig: float
    state_status: str
    consistent: bool
    samples_used: int
    tol: float

    def to_json(self) -> dict:
        return {
            "trace_margin": float(self.trace_margin),
            "unit_margin": float(self.unit_margin),
            "state_min_eig": float(self.state_min_eig),
            "state_status": self.state_status,
            "consistent": bool(self.consistent),
            "samples_used": int(self.samples_used),
            "tol": float(self.tol),
        }


def trace_preservation_check(
    gen,
    states,
    t_grid=(0.5, 1.0, 2.0),
    tol: float = 1e-6,
    state_tol: float = STATE_TOL,
) -> TracePreservationReport:
    """Check trace preservation of the predual against the unit-kill margin.

    `states` is an explicit list of density matrices (probes); the check is
    deterministic given the probes.  The two sides of the equivalence are
    evaluated independently and compared, never collapsed into one another.
    """
    h = _as_handle(gen)
    if not len(states):
        raise ValueError("need at least one probe state")
    probes = [as_density(s) for s in states]
    stack = np.stack([vec(p) for p in probes])
    traces_in = np.array([np.trace(p) for p in probes])

    trace_margin = 0.0
    state_min = np.inf
    for t in t_grid:
        prop = evolve(h, t).rep
        out = stack @ prop.conj()  # row-vecs through the predual propagator
        evolved = out.reshape(len(probes), h.n, h.n).swapaxes(1, 2)
        traces = np.einsum("mii->m", evolved)
        trace_margin = max(trace_margin, float(np.abs(traces - traces_in).max()))
        herm = (evolved + evolved.conj().swapaxes(1, 2)) / 2
        skew = np.abs(evolved - evolved.conj().swapaxes(1, 2)).max(axis=(1, 2)) / 2
        mins = np.linalg.eigvalsh(herm)[:, 0] - skew
        state_min = min(state_min, float(mins.min()))

    unit_margin = float(spectral_norm(apply(h.generator, np.eye(h.n))))
    state_status = NO_VIOLATION_FOUND if state_min >= -state_tol else VIOLATED
    consistent = (trace_margin <= tol) == (unit_margin <= tol)
    return TracePreservationReport(
        trace_margin=trace_margin,
        unit_margin=unit_margin,
        state_min_eig=state_min,
        state_status=state_status,
        consistent=consistent,
        samples_used=len(probes) * len(t_grid),
        tol=tol,
    )


def trajectory_records(gen, rho, ts) -> list[dict]:
    """Per-time snapshots {t, rho, trace, min_eig, purity} of a state orbit."""
    h = _as_handle(gen)
    state = as_density(rho)
    records = []
    for t in ts:
        out = predual_evolve(h, float(t), state)
        records.append(
            {
                "t": float(t),
                "rho": CMatrix(out).to_json(),
                "trace": float(np.trace(out).real),
                "min_eig": float(np.linalg.eigvalsh(hermitian_part(out)).min()),
                "purity": purity(out),
            }
        )
    return records
