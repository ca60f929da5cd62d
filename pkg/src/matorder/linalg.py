"""Dense complex linear algebra primitives.

This module holds the leveled-element container used everywhere else,
together with Hermitian eigenvalue and PSD tests, compressions, direct sums,
the Schatten realignment and flip conjugation, partial transposes and traces,
and Schatten p-norms.

A level-``n`` element over a ``d``-dimensional base space is stored as a
complex array of shape ``(n, n, d)``: ``coeffs[i, j]`` is the base vector
``x_ij``. For matrix-type bases (``d = m**2``) the base vector is the row-major
flattening of an ``m x m`` matrix.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .config import settings
from .errors import (
    BaseSpaceMismatchError,
    DimensionMismatchError,
    InvalidPError,
    NonFiniteError,
    NonHermitianError,
    WrongBaseModelError,
)

CONJUGATION = "conjugation"
MATRIX_ADJOINT = "matrix_adjoint"
INVOLUTIONS = (CONJUGATION, MATRIX_ADJOINT)

HERMITICITY_RTOL = 1e-10
SQRT_CLAMP = -1e-12


def _square_side(d: int) -> int:
    m = math.isqrt(d)
    if m * m != d:
        raise WrongBaseModelError(f"base dimension {d} is not a perfect square")
    return m


def involve_vectors(v: np.ndarray, involution: str) -> np.ndarray:
    """Apply the base involution to the last axis of ``v``.

    :param v: array whose last axis holds base coordinates.
    :param involution: ``"conjugation"`` or ``"matrix_adjoint"``.
    """
    v = np.asarray(v, dtype=complex)
    if involution == CONJUGATION:
        return v.conj()
    if involution == MATRIX_ADJOINT:
        m = _square_side(v.shape[-1])
        mats = v.reshape(v.shape[:-1] + (m, m))
        return np.swapaxes(mats, -1, -2).conj().reshape(v.shape)
    raise ValueError(f"unknown involution {involution!r}")


@dataclasses.dataclass(frozen=True, eq=False)
class LeveledElement:
    """An element of the level-``n`` matrix space over a base space.

    :param coeffs: complex array of shape ``(n, n, d)``.
    :param involution: the base involution model used by :func:`adjoint`.
    """

    coeffs: np.ndarray
    involution: str = CONJUGATION

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[0] < 1 or c.shape[2] < 1:
            raise DimensionMismatchError(f"coefficients must have shape (n, n, d), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise NonFiniteError("leveled element has non-finite coefficients")
        if self.involution not in INVOLUTIONS:
            raise ValueError(f"unknown involution {self.involution!r}")
        if self.involution == MATRIX_ADJOINT:
            _square_side(c.shape[2])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def level(self) -> int:
        return self.coeffs.shape[0]

    @property
    def base_dim(self) -> int:
        return self.coeffs.shape[2]

    @classmethod
    def zeros(cls, n: int, d: int, involution: str = CONJUGATION) -> "LeveledElement":
        return cls(np.zeros((n, n, d), dtype=complex), involution)

    @classmethod
    def from_coordinate_matrices(cls, mats, involution: str = CONJUGATION) -> "LeveledElement":
        """Build from the ``d`` coordinate matrices ``X_k = ([x_ij]_k)_ij``."""
        mats = np.asarray(mats, dtype=complex)
        return cls(np.transpose(mats, (1, 2, 0)), involution)

    @classmethod
    def elementary(cls, a, v, involution: str = CONJUGATION) -> "LeveledElement":
        """The elementary tensor ``a ⊗ v`` with scalar matrix ``a`` and base vector ``v``."""
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        v = np.asarray(v, dtype=complex).ravel()
        return cls(a[:, :, None] * v[None, None, :], involution)

    def coordinate_matrices(self) -> np.ndarray:
        """Return the array of coordinate matrices, shape ``(d, n, n)``."""
        return np.transpose(self.coeffs, (2, 0, 1))

    def block(self, rows: slice, cols: slice) -> "LeveledElement":
        return LeveledElement(self.coeffs[rows, cols], self.involution)

    def with_coeffs(self, coeffs) -> "LeveledElement":
        return LeveledElement(coeffs, self.involution)

    def _check_compatible(self, other):
        if not isinstance(other, LeveledElement):
            return NotImplemented
        if other.coeffs.shape != self.coeffs.shape:
            raise DimensionMismatchError(f"shapes differ: {self.coeffs.shape} vs {other.coeffs.shape}")
        if other.involution != self.involution:
            raise BaseSpaceMismatchError("elements use different involution models")
        return None

    def __add__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_coeffs(self.coeffs / scalar)

    def allclose(self, other: "LeveledElement", atol: float = 1e-12) -> bool:
        return self.coeffs.shape == other.coeffs.shape and bool(
            np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= atol
        )

    def __repr__(self):
        return f"LeveledElement(level={self.level}, base_dim={self.base_dim}, involution={self.involution!r})"


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFiniteError("matrix has non-finite entries")
    return M


def hermiticity_defect(M) -> float:
    """Return ``‖M − M*‖_∞`` (max row-sum norm)."""
    M = _as_matrix(M)
    return float(np.linalg.norm(M - M.conj().T, np.inf)) if M.size else 0.0


def is_hermitian_matrix(M, rtol: float = HERMITICITY_RTOL, atol: float = 0.0) -> bool:
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        return False
    scale = float(np.linalg.norm(M, np.inf)) if M.size else 0.0
    return hermiticity_defect(M) <= rtol * scale + atol


def _hermitian_eigvals(M) -> np.ndarray:
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {M.shape}")
    if not is_hermitian_matrix(M):
        raise NonHermitianError(f"matrix fails the hermiticity check (defect {hermiticity_defect(M):.3e})")
    return np.linalg.eigvalsh((M + M.conj().T) / 2)


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Raises :class:`NonHermitianError` when ``‖M − M*‖_∞ > 1e−10 ‖M‖_∞`` and
    :class:`NonFiniteError` on NaN/Inf entries.
    """
    return float(_hermitian_eigvals(M)[0])


def trace_norm_hermitian(M) -> float:
    return float(np.sum(np.abs(_hermitian_eigvals(M))))


def psd_tolerance(M, tol=None) -> float:
    """Resolve a PSD tolerance: explicit ``tol`` is absolute, ``None`` is relative."""
    if tol is not None:
        return float(tol)
    return settings.psd_tol * trace_norm_hermitian(M)


def is_psd(M, tol=None) -> bool:
    """Return ``min_eigenvalue(M) >= -tol``.

    With ``tol=None`` the global relative tolerance (default ``1e-9`` times the
    trace norm of ``M``) is used.
    """
    eigs = _hermitian_eigvals(M)
    if tol is None:
        tol = settings.psd_tol * float(np.sum(np.abs(eigs)))
    return bool(eigs[0] >= -tol)


def psd_verdict(M, tol=None):
    """Return ``(is_psd, min_eig, eigvec)`` without raising on non-Hermitian input.

    A matrix whose hermiticity defect exceeds the tolerance is reported as not
    PSD with ``min_eig = -inf`` and no eigenvector.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        return False, -math.inf, None
    H = (M + M.conj().T) / 2
    w, V = np.linalg.eigh(H)
    tol_abs = settings.psd_tol * float(np.sum(np.abs(w))) if tol is None else float(tol)
    if hermiticity_defect(M) > HERMITICITY_RTOL * float(np.linalg.norm(M, np.inf)) + tol_abs:
        return False, -math.inf, None
    return bool(w[0] >= -tol_abs), float(w[0]), V[:, 0]


def psd_sqrt(M) -> np.ndarray:
    """Square root of a PSD matrix via eigendecomposition.

    Eigenvalues down to ``-1e-12`` (relative to the spectral radius) are
    clamped to zero; anything more negative raises ``ValueError``.
    """
    w, V = np.linalg.eigh((_as_matrix(M) + _as_matrix(M).conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < SQRT_CLAMP * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def abs_hermitian(M) -> np.ndarray:
    """Return ``|M| = (M^2)^{1/2}`` for Hermitian ``M``."""
    w, V = np.linalg.eigh((_as_matrix(M) + _as_matrix(M).conj().T) / 2)
    return (V * np.abs(w)) @ V.conj().T


def adjoint(x: LeveledElement) -> LeveledElement:
    """Entry ``(i, j)`` of the result is the involution of entry ``(j, i)``."""
    swapped = np.swapaxes(x.coeffs, 0, 1)
    return x.with_coeffs(involve_vectors(swapped, x.involution))


def compress(a, x: LeveledElement, b) -> LeveledElement:
    """Return ``a · x · b*``, i.e. ``result_kl = Σ_ij a_ki x_ij conj(b_lj)``."""
    a = _as_matrix(np.atleast_2d(a))
    b = _as_matrix(np.atleast_2d(b))
    n = x.level
    if a.shape[1] != n or b.shape[1] != n or a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"compression shapes {a.shape}, {b.shape} do not fit level {n}"
        )
    return x.with_coeffs(np.einsum("ki,ijd,lj->kld", a, x.coeffs, b.conj()))


def direct_sum(x: LeveledElement, y: LeveledElement) -> LeveledElement:
    """Block-diagonal placement ``x ⊕ y``."""
    if x.base_dim != y.base_dim or x.involution != y.involution:
        raise BaseSpaceMismatchError("direct sum of elements over different base spaces")
    m, n, d = x.level, y.level, x.base_dim
    out = np.zeros((m + n, m + n, d), dtype=complex)
    out[:m, :m] = x.coeffs
    out[m:, m:] = y.coeffs
    return x.with_coeffs(out)


def assemble_blocks(x11: LeveledElement, x12: LeveledElement, x21: LeveledElement, x22: LeveledElement) -> LeveledElement:
    """Assemble the level-``2n`` element ``[[x11, x12], [x21, x22]]``."""
    top = np.concatenate([x11.coeffs, x12.coeffs], axis=1)
    bottom = np.concatenate([x21.coeffs, x22.coeffs], axis=1)
    return x11.with_coeffs(np.concatenate([top, bottom], axis=0))


def split_blocks(x: LeveledElement):
    """Inverse of :func:`assemble_blocks` for an even level."""
    if x.level % 2:
        raise DimensionMismatchError("level must be even to split into 2x2 blocks")
    h = x.level // 2
    return (
        x.block(slice(0, h), slice(0, h)),
        x.block(slice(0, h), slice(h, None)),
        x.block(slice(h, None), slice(0, h)),
        x.block(slice(h, None), slice(h, None)),
    )


def realign_schatten(x: LeveledElement) -> np.ndarray:
    """Return the ``nm × nm`` matrix with entry ``[x_ij]_kℓ`` at row ``(i,k)``, column ``(j,ℓ)``."""
    if x.involution != MATRIX_ADJOINT:
        raise WrongBaseModelError("realignment needs a matrix-type (Schatten) base")
    n, m = x.level, _square_side(x.base_dim)
    return x.coeffs.reshape(n, n, m, m).transpose(0, 2, 1, 3).reshape(n * m, n * m)


def unrealign_schatten(R, n: int) -> LeveledElement:
    """Inverse of :func:`realign_schatten` for a given level ``n``."""
    R = _as_matrix(R)
    if R.shape[0] != R.shape[1] or R.shape[0] % n:
        raise DimensionMismatchError(f"cannot split a {R.shape} matrix at level {n}")
    m = R.shape[0] // n
    coeffs = R.reshape(n, m, n, m).transpose(0, 2, 1, 3).reshape(n, n, m * m)
    return LeveledElement(coeffs, MATRIX_ADJOINT)


def swap_matrix(n: int, m: int) -> np.ndarray:
    """Permutation ``U`` with ``U |i⟩|k⟩ = |k⟩|i⟩`` from ``C^n ⊗ C^m`` to ``C^m ⊗ C^n``."""
    U = np.zeros((n * m, n * m))
    for i in range(n):
        for k in range(m):
            U[k * n + i, i * m + k] = 1.0
    return U


def flip_conjugate_matrix(M, n: int, m: int) -> np.ndarray:
    """Conjugate an ``(i,k)``-ordered ``nm × nm`` matrix into ``(k,i)`` ordering."""
    U = swap_matrix(n, m)
    return U @ _as_matrix(M) @ U.T


def flip_conjugate(x: LeveledElement) -> np.ndarray:
    """Realignment conjugated by the tensor flip; PSD iff the realignment is."""
    n, m = x.level, _square_side(x.base_dim)
    return flip_conjugate_matrix(realign_schatten(x), n, m)


def partial_transpose(M, n: int, m: int, system: int = 1) -> np.ndarray:
    """Partial transpose of an ``(i,k)``-ordered matrix on ``C^n ⊗ C^m``.

    ``system=1`` transposes the second (``m``) factor, ``system=0`` the first.
    """
    T = _as_matrix(M).reshape(n, m, n, m)
    T = T.transpose(0, 3, 2, 1) if system == 1 else T.transpose(2, 1, 0, 3)
    return T.reshape(n * m, n * m)


def partial_trace(M, n: int, m: int, system: int = 1) -> np.ndarray:
    """Trace out the second (``system=1``) or first (``system=0``) tensor factor."""
    T = _as_matrix(M).reshape(n, m, n, m)
    return np.einsum("ikjk->ij", T) if system == 1 else np.einsum("kikj->ij", T)


def _check_p(p) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidPError(f"exponent must lie in [1, inf], got {p}")
    return p


def singular_values(M) -> np.ndarray:
    return np.linalg.svd(_as_matrix(M), compute_uv=False)


def vector_p_norm(s: np.ndarray, p: float) -> float:
    """ℓ_p norm of a nonnegative vector, computed in a scale-safe way."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return 0.0
    top = float(np.max(s))
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def schatten_norm(M, p) -> float:
    """Schatten p-norm: ℓ_p norm of the singular values (operator norm at ``p=inf``)."""
    p = _check_p(p)
    return vector_p_norm(singular_values(M), p)


def conjugate_exponent(p) -> float:
    p = _check_p(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def norming_matrix(K, r) -> np.ndarray:
    """Return ``a`` in the unit ball of ``S_r`` maximizing ``Re tr(a K)``.

    The maximum equals the dual Schatten norm ``‖K‖_{r'}``.
    """
    K = _as_matrix(K)
    U, s, Vh = np.linalg.svd(K)
    rp = conjugate_exponent(r)
    if s.size == 0 or s[0] == 0:
        k = min(K.shape)
        a = np.zeros((K.shape[1], K.shape[0]), dtype=complex)
        a[:k, :k] = np.eye(k) / vector_p_norm(np.ones(k), r)
        return a
    if math.isinf(rp):
        w = (s >= s[0] * (1 - 1e-12)).astype(float)
        w /= vector_p_norm(w, r)
    elif rp == 1:
        w = np.ones_like(s)
    else:
        w = (s / s[0]) ** (rp - 1)
        w /= vector_p_norm(w, r)
    return (Vh.conj().T * w) @ U.conj().T


# --- random sampling helpers -------------------------------------------------


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(random_complex(rng, (n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_psd(rng: np.random.Generator, n: int, rank=None) -> np.ndarray:
    rank = n if rank is None else rank
    W = random_complex(rng, (n, rank))
    return W @ W.conj().T


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    G = random_complex(rng, (n, n))
    return (G + G.conj().T) / 2


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = random_complex(rng, n)
    return v / np.linalg.norm(v)
