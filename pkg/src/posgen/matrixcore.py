"""Dense complex matrix arithmetic and spectral predicates.

Conventions used everywhere downstream: entrywise max-norm for equality
checks, spectral norm for operator-size estimates, and a default predicate
tolerance of 1e-9.  All predicates return margins (signed reals), never bare
booleans, so callers can report *how close* a check came to failing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, SchemaError

DEFAULT_TOL = 1e-9

# Relative threshold deciding when a matrix counts as normal (and the
# exponential may go through a unitary Schur diagonalization).
_NORMALITY_RTOL = 1e-12


def as_matrix(x) -> np.ndarray:
    """Coerce ``x`` to a square complex ndarray, validating shape and finiteness."""
    a = x.a if isinstance(x, CMatrix) else np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def max_entry(a) -> float:
    """Entrywise max-norm ``max_ij |a_ij|``."""
    return float(np.abs(a).max())


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy; constructed values are immutable downstream."""
    out = np.array(a, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CMatrix:
    """Square complex matrix with finite entries.

    JSON form: ``{"n": int, "re": [[...]], "im": [[...]]}`` with row-major
    real and imaginary parts.
    """

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", frozen(as_matrix(self.a)))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "re": [[float(v) for v in row] for row in self.a.real],
            "im": [[float(v) for v in row] for row in self.a.imag],
        }

    @classmethod
    def from_json(cls, obj) -> "CMatrix":
        if not isinstance(obj, dict):
            raise SchemaError("matrix payload must be an object")
        extra = set(obj) - {"n", "re", "im"}
        if extra:
            raise SchemaError(f"unknown matrix field(s): {sorted(extra)}")
        for field in ("n", "re", "im"):
            if field not in obj:
                raise SchemaError(f"matrix payload missing field '{field}'")
        n = obj["n"]
        if not isinstance(n, int) or n < 1:
            raise SchemaError("field 'n' must be a positive integer")
        try:
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj["im"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"fields 're'/'im' must be numeric arrays: {exc}") from None
        if re.shape != (n, n):
            raise SchemaError(f"field 're' must have shape ({n}, {n}), got {re.shape}")
        if im.shape != (n, n):
            raise SchemaError(f"field 'im' must have shape ({n}, {n}), got {im.shape}")
        if not (np.isfinite(re).all() and np.isfinite(im).all()):
            raise SchemaError("matrix entries must be finite")
        return cls(re + 1j * im)


@dataclass(frozen=True)
class ElementFlags:
    """Result of classify_element: algebraic class membership with margins."""

    hermitian: bool
    psd: bool
    unitary: bool
    min_eig: float | None  # least eigenvalue; only meaningful when hermitian


def classify_element(x, tol: float = DEFAULT_TOL) -> ElementFlags:
    """Classify ``x`` as hermitian / positive semidefinite / unitary at ``tol``.

    Hermiticity and unitarity are entrywise max-norm checks; psd additionally
    requires the least eigenvalue to clear ``-tol``.
    """
    a = as_matrix(x)
    n = a.shape[0]
    hermitian = max_entry(a - a.conj().T) <= tol
    if hermitian:
        min_eig = float(np.linalg.eigvalsh(hermitian_part(a))[0])
        psd = min_eig >= -tol
    else:
        min_eig = None
        psd = False
    unitary = max_entry(a.conj().T @ a - np.eye(n)) <= tol
    return ElementFlags(hermitian=hermitian, psd=psd, unitary=unitary, min_eig=min_eig)


def mat_exp(m) -> np.ndarray:
    """Matrix exponential ``e^M``.

    Normal inputs go through a complex Schur (unitary) diagonalization, which
    is exact for the families that dominate this toolkit (hermitian, diagonal,
    anti-hermitian generators).  Everything else falls back to scaling-and-
    squaring with a Pade approximant.
    """
    a = as_matrix(m)
    scale = max_entry(a)
    comm = a @ a.conj().T - a.conj().T @ a
    if max_entry(comm) <= _NORMALITY_RTOL * (1.0 + scale) ** 2:
        t, q = scipy.linalg.schur(a, output="complex")
        return (q * np.exp(np.diag(t))) @ q.conj().T
    return scipy.linalg.expm(a)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of a matrix, plus the least eigenvalue when hermitian."""

    eigenvalues: tuple
    min_hermitian_eigenvalue: float | None


def spectrum(m, tol: float = DEFAULT_TOL) -> SpectralData:
    """Eigenvalues of ``m``; hermitian inputs get a real ascending spectrum."""
    a = as_matrix(m)
    if max_entry(a - a.conj().T) <= tol:
        w = np.linalg.eigvalsh(hermitian_part(a))
        return SpectralData(
            eigenvalues=tuple(complex(v) for v in w),
            min_hermitian_eigenvalue=float(w[0]),
        )
    w = np.linalg.eigvals(a)
    order = np.lexsort((w.imag, w.real))
    return SpectralData(
        eigenvalues=tuple(complex(v) for v in w[order]),
        min_hermitian_eigenvalue=None,
    )


def spectral_norm(m) -> float:
    """Largest singular value of ``m``."""
    return float(np.linalg.norm(as_matrix(m), 2))
