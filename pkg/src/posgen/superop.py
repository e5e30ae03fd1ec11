"""Linear maps on M(n, C) as n^2 x n^2 matrices over column-stacked vectors.

Conventions fixed project-wide:

* ``vec`` stacks columns: entry (i, j) of a matrix lands at index ``i + n*j``.
* ``vec(A X B) = (B^T kron A) vec(X)``.
* A map is *symmetric* when it commutes with the adjoint, ``S(x^*) = S(x)^*``.
* Positivity verdicts are three-valued and never bluff: ``certified_positive``
  is backed by a complete-positivity certificate, ``no_violation_found`` is an
  absence-of-counterexample claim, ``violated`` carries a reproducible witness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SchemaError
from .matrixcore import DEFAULT_TOL, as_matrix, frozen, hermitian_part, max_entry

CERTIFIED_POSITIVE = "certified_positive"
NO_VIOLATION_FOUND = "no_violation_found"
VIOLATED = "violated"

CERTIFIED_CONTRACTION = "certified_contraction"


def vec(x) -> np.ndarray:
    """Column-stack a matrix into a vector: ``vec(x)[i + n*j] = x[i, j]``."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def devec(v, n: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=complex).reshape((n, n), order="F")


@dataclass(frozen=True)
class Superoperator:
    """A linear map on M(n, C), stored as its matrix on column-stacked vectors.

    JSON form: ``{"n": int, "rep": <matrix payload>, "vec": "column-stacking"}``;
    the ``vec`` field is mandatory and validated so serialized maps can never be
    silently reinterpreted under a different stacking convention.
    """

    n: int
    rep: np.ndarray

    def __post_init__(self):
        rep = as_matrix(self.rep)
        if self.n < 1 or rep.shape != (self.n * self.n, self.n * self.n):
            raise DimensionMismatch(
                f"superoperator on M({self.n}) needs a "
                f"{self.n**2} x {self.n**2} matrix, got {rep.shape}"
            )
        object.__setattr__(self, "rep", frozen(rep))

    def to_json(self) -> dict:
        from .matrixcore import CMatrix

        return {
            "n": self.n,
            "rep": CMatrix(self.rep).to_json(),
            "vec": "column-stacking",
        }

    @classmethod
    def from_json(cls, obj) -> "Superoperator":
        from .matrixcore import CMatrix

        if not isinstance(obj, dict):
            raise SchemaError("superoperator payload must be an object")
        extra = set(obj) - {"n", "rep", "vec"}
        if extra:
            raise SchemaError(f"unknown superoperator field(s): {sorted(extra)}")
        for field in ("n", "rep", "vec"):
            if field not in obj:
                raise SchemaError(f"superoperator payload missing field '{field}'")
        if obj["vec"] != "column-stacking":
            raise SchemaError(
                "field 'vec' must be the literal string 'column-stacking'"
            )
        n = obj["n"]
        if not isinstance(n, int) or n < 1:
            raise SchemaError("field 'n' must be a positive integer")
        rep = CMatrix.from_json(obj["rep"]).a
        if rep.shape != (n * n, n * n):
            raise SchemaError(f"field 'rep' must be {n*n} x {n*n}, got {rep.shape}")
        return cls(n=n, rep=rep)


# ---------------------------------------------------------------------------
# construction and algebra
# ---------------------------------------------------------------------------

def identity_superop(n: int) -> Superoperator:
    return Superoperator(n, np.eye(n * n, dtype=complex))


def sandwich(a, b) -> Superoperator:
    """The map ``x -> a x b`` with rep ``b^T kron a``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch("sandwich factors must act on the same algebra")
    return Superoperator(a.shape[0], np.kron(b.T, a))


def conjugation(u) -> Superoperator:
    """Conjugation ``x -> u^* x u`` (observable picture)."""
    u = as_matrix(u)
    return sandwich(u.conj().T, u)


def transpose_map(n: int) -> Superoperator:
    """The transpose ``x -> x^T``; a positive map that is not completely positive."""
    rep = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            rep[i + n * j, j + n * i] = 1.0
    return Superoperator(n, rep)


def from_function(n: int, f) -> Superoperator:
    """Build the rep of a map from a callable, one matrix unit at a time."""
    rep = np.zeros((n * n, n * n), dtype=complex)
    for j in range(n):
        for i in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            rep[:, i + n * j] = vec(as_matrix(f(e)))
    return Superoperator(n, rep)


def apply(s: Superoperator, x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape[0] != s.n:
        raise DimensionMismatch(
            f"map acts on M({s.n}), element lives in M({x.shape[0]})"
        )
    return devec(s.rep @ vec(x), s.n)


def compose(s1: Superoperator, s2: Superoperator) -> Superoperator:
    """Function composition ``s1 after s2``."""
    if s1.n != s2.n:
        raise DimensionMismatch("cannot compose maps on different algebras")
    return Superoperator(s1.n, s1.rep @ s2.rep)


def scale(s: Superoperator, c: complex) -> Superoperator:
    return Superoperator(s.n, c * s.rep)


def add(s1: Superoperator, s2: Superoperator) -> Superoperator:
    if s1.n != s2.n:
        raise DimensionMismatch("cannot add maps on different algebras")
    return Superoperator(s1.n, s1.rep + s2.rep)


def subtract(s1: Superoperator, s2: Superoperator) -> Superoperator:
    if s1.n != s2.n:
        raise DimensionMismatch("cannot subtract maps on different algebras")
    return Superoperator(s1.n, s1.rep - s2.rep)


def hs_adjoint(s: Superoperator) -> Superoperator:
    """Adjoint for the Hilbert-Schmidt pairing ``<a, b> = tr(a^* b)``."""
    return Superoperator(s.n, s.rep.conj().T)


# ---------------------------------------------------------------------------
# structural predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapCheck:
    verdict: bool
    margin: float


def _images_tensor(s: Superoperator) -> np.ndarray:
    """T[i, j] = S(E_ij) as an (n, n, n, n) tensor, straight from rep columns."""
    n = s.n
    return s.rep.reshape(n, n, n, n).transpose(3, 2, 1, 0)


def is_symmetric_map(s: Superoperator, tol: float = DEFAULT_TOL) -> MapCheck:
    """Does ``S(x^*) = S(x)^*`` hold on all matrix units?"""
    t = _images_tensor(s)
    # S(E_ji) versus S(E_ij)^*
    dev = t.transpose(1, 0, 2, 3) - t.conj().transpose(0, 1, 3, 2)
    margin = float(np.abs(dev).max())
    return MapCheck(verdict=margin <= tol, margin=margin)


def is_unital(s: Superoperator, tol: float = DEFAULT_TOL) -> MapCheck:
    margin = max_entry(apply(s, np.eye(s.n)) - np.eye(s.n))
    return MapCheck(verdict=margin <= tol, margin=margin)


def choi_matrix(s: Superoperator) -> np.ndarray:
    """Unnormalized Choi matrix ``sum_ij E_ij kron S(E_ij)``."""
    n = s.n
    return np.ascontiguousarray(
        s.rep.reshape(n, n, n, n).transpose(3, 1, 2, 0)
    ).reshape(n * n, n * n)


@dataclass(frozen=True)
class CPCheck:
    verdict: bool
    min_choi_eig: float


def cp_check(s: Superoperator, tol: float = DEFAULT_TOL) -> CPCheck:
    """Complete positivity via the Choi matrix.

    ``verdict`` holds iff the Choi matrix is hermitian at ``tol`` and its least
    eigenvalue clears ``-tol``.  A true verdict certifies positivity of the map.
    """
    c = choi_matrix(s)
    herm_dev = max_entry(c - c.conj().T)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(c))[0])
    return CPCheck(verdict=(herm_dev <= tol and min_eig >= -tol), min_choi_eig=min_eig)


# ---------------------------------------------------------------------------
# sampled positivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositivityBudget:
    """Sampling/descent effort for positivity_check; seed makes runs replayable."""

    n_random: int = 64
    n_descent: int = 8
    seed: int = 0
    descent_iters: int = 100
    descent_step: float = 0.25
    descent_decay: float = 0.9


@dataclass(frozen=True)
class ConeVerdict:
    """Outcome of a positivity search over rank-one inputs.

    margin is the most negative value of ``f(v) = min_eig(S(v v^*))`` observed
    (with a penalty for non-hermitian images); witness is present iff violated
    and re-evaluating f at the witness reproduces the margin.
    """

    status: str
    margin: float
    samples_used: int
    witness: np.ndarray | None = None


def _structured_unit_vectors(n: int) -> np.ndarray:
    vs = [np.eye(n, dtype=complex)[i] for i in range(n)]
    vs.append(np.ones(n, dtype=complex) / np.sqrt(n))
    if n > 1:
        phases = np.exp(2j * np.pi * np.arange(n) / n)
        vs.append(phases / np.sqrt(n))
    return np.array(vs)


def _rank_one_images(rep: np.ndarray, v: np.ndarray) -> np.ndarray:
    """S(v_i v_i^*) for a batch of vectors, as a (b, n, n) stack."""
    n = int(np.sqrt(rep.shape[0]))
    p = v[:, :, None] * v.conj()[:, None, :]
    vecs = p.transpose(0, 2, 1).reshape(v.shape[0], n * n)
    return (vecs @ rep.T).reshape(v.shape[0], n, n).swapaxes(1, 2)


def _f_batch(rep: np.ndarray, v: np.ndarray):
    """f(v) = min_eig(herm(S(vv*))) - max|skew(S(vv*))| for a batch of vectors.

    The skew penalty makes f faithful for maps that do not preserve
    hermiticity: a PSD image requires both a nonnegative hermitian part and a
    vanishing skew part.
    """
    m = _rank_one_images(rep, v)
    skew = np.abs(m - m.conj().transpose(0, 2, 1)).max(axis=(1, 2))
    h = (m + m.conj().transpose(0, 2, 1)) / 2
    w, u = np.linalg.eigh(h)
    return w[:, 0] - skew, u[:, :, 0]

def _f_single(s: Superoperator, v: np.ndarray) -> float:
    m = apply(s, np.outer(v, v.conj()))
    skew = max_entry(m - m.conj().T)
    return float(np.linalg.eigvalsh(hermitian_part(m))[0]) - skew


def positivity_check(
    s: Superoperator,
    budget: PositivityBudget = PositivityBudget(),
    tol: float = DEFAULT_TOL,
) -> ConeVerdict:
    """Search for a rank-one input whose image leaves the PSD cone.

    Seeded unit vectors (plus the standard basis and two structured vectors)
    are scored by f; the worst starters seed a fixed-schedule projected
    gradient descent on the unit sphere.  A CP certificate short-circuits the
    descent phase: the certificate already implies positivity, so only the
    cheap sampling pass runs to report an honest margin.
    """
    n = s.n
    rng = np.random.default_rng(np.random.SeedSequence((budget.seed, 0x705)))
    starters = _structured_unit_vectors(n)
    if budget.n_random > 0:
        g = rng.standard_normal((budget.n_random, n)) + 1j * rng.standard_normal(
            (budget.n_random, n)
        )
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        starters = np.concatenate([starters, g])
    fvals, _ = _f_batch(s.rep, starters)
    evals = len(starters)
    best_idx = int(np.argmin(fvals))
    best_val = float(fvals[best_idx])
    best_vec = starters[best_idx]

    certificate = cp_check(s, tol)
    if not certificate.verdict and budget.n_descent > 0 and budget.descent_iters > 0:
        order = np.argsort(fvals)
        v = starters[order[: budget.n_descent]].copy()
        step = budget.descent_step
        for _ in range(budget.descent_iters):
            f, wmin = _f_batch(s.rep, v)
            evals += len(v)
            k = int(np.argmin(f))
            if f[k] < best_val:
                best_val = float(f[k])
                best_vec = v[k].copy()
            # Danskin direction: grad of v* herm(S^*(w w^*)) v on the sphere
            ww = wmin[:, :, None] * wmin.conj()[:, None, :]
            gvec = ww.transpose(0, 2, 1).reshape(len(v), n * n) @ s.rep.conj()
            gm = gvec.reshape(len(v), n, n).swapaxes(1, 2)
            gm = (gm + gm.conj().transpose(0, 2, 1)) / 2
            grad = 2.0 * np.einsum("bij,bj->bi", gm, v)
            inner = np.einsum("bi,bi->b", v.conj(), grad)
            grad -= inner[:, None] * v
            v = v - step * grad
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            step *= budget.descent_decay
        f, _ = _f_batch(s.rep, v)
        evals += len(v)
        k = int(np.argmin(f))
        if f[k] < best_val:
            best_val = float(f[k])
            best_vec = v[k].copy()

    margin = _f_single(s, best_vec)
    margin = min(margin, best_val)
    if certificate.verdict:
        return ConeVerdict(
            status=CERTIFIED_POSITIVE, margin=margin, samples_used=evals
        )
    if margin < -tol:
        return ConeVerdict(
            status=VIOLATED,
            margin=_f_single(s, best_vec),
            samples_used=evals,
            witness=frozen(best_vec),
        )
    return ConeVerdict(status=NO_VIOLATION_FOUND, margin=margin, samples_used=evals)


# ---------------------------------------------------------------------------
# contraction bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionBudget:
    n_random: int = 64
    ascent_iters: int = 30
    seed: int = 0


@dataclass(frozen=True)
class ContractionVerdict:
    """Sampled lower bound on the operator norm of a map (spectral-to-spectral).

    certified_contraction is only issued for symmetric unital CP maps -- whose
    norm is exactly one by the Russo-Dye fact -- and even then the sampled
    bound must not exceed 1 + tol; the fact is verified, never assumed.
    """

    status: str
    norm_lower_bound: float


def _ratio_batch(rep: np.ndarray, xs: np.ndarray) -> np.ndarray:
    n = xs.shape[-1]
    vecs = xs.transpose(0, 2, 1).reshape(len(xs), n * n)
    out = (vecs @ rep.T).reshape(len(xs), n, n).swapaxes(1, 2)
    s_out = np.linalg.svd(out, compute_uv=False)[:, 0]
    s_in = np.linalg.svd(xs, compute_uv=False)[:, 0]
    ok = s_in > 1e-12 * max(1.0, float(s_in.max(initial=0.0)))
    return np.where(ok, s_out / np.where(ok, s_in, 1.0), 0.0)


def contraction_check(
    s: Superoperator,
    budget: ContractionBudget = ContractionBudget(),
    tol: float = DEFAULT_TOL,
) -> ContractionVerdict:
    """Lower-bound ``sup ||S(x)|| / ||x||`` by sampling plus local ascent."""
    n = s.n
    rng = np.random.default_rng(np.random.SeedSequence((budget.seed, 0xC0)))
    cands = [np.eye(n, dtype=complex)[None]]
    if budget.n_random > 0:
        cands.append(
            rng.standard_normal((budget.n_random, n, n))
            + 1j * rng.standard_normal((budget.n_random, n, n))
        )
    # top right-singular vectors of the rep seed the search near the maximizer
    # of the Hilbert-Schmidt-induced norm, a guaranteed lower-bound direction
    _, _, vh = np.linalg.svd(s.rep)
    tops = vh[: min(3, len(vh))].conj().reshape(-1, n, n).swapaxes(1, 2)
    cands.append(tops)
    cands.append((tops + tops.conj().transpose(0, 2, 1)) / 2)
    xs = np.concatenate(cands)
    ratios = _ratio_batch(s.rep, xs)
    bound = float(np.max(ratios))

    symmetric = is_symmetric_map(s, tol).verdict
    unital = is_unital(s, tol).verdict
    if symmetric and unital and cp_check(s, tol).verdict and bound <= 1.0 + tol:
        return ContractionVerdict(CERTIFIED_CONTRACTION, bound)

    if budget.ascent_iters > 0:
        order = np.argsort(ratios)[::-1]
        v = xs[order[:4]].copy()
        v /= np.linalg.norm(v, axis=(1, 2), keepdims=True)
        for _ in range(budget.ascent_iters):
            vecs = v.transpose(0, 2, 1).reshape(len(v), n * n)
            out = (vecs @ s.rep.T).reshape(len(v), n, n).swapaxes(1, 2)
            u, _, wh = np.linalg.svd(out)
            uw = u[:, :, :1] @ wh[:, :1, :]  # u_1 w_1^*
            gvec = uw.transpose(0, 2, 1).reshape(len(v), n * n) @ s.rep.conj()
            v = gvec.reshape(len(v), n, n).swapaxes(1, 2)
            norms = np.linalg.norm(v, axis=(1, 2), keepdims=True)
            norms[norms == 0] = 1.0
            v /= norms
            bound = max(bound, float(np.max(_ratio_batch(s.rep, v))))

    if bound > 1.0 + tol:
        return ContractionVerdict(VIOLATED, bound)
    return ContractionVerdict(NO_VIOLATION_FOUND, bound)
