"""Level norms and level cones for MIN, MAX, Schatten and matrix-system structures.

A :class:`MatricialStructure` pairs a :class:`~matorder.spaces.BaseSpace`
with a kind:

* ``"min"``: positivity and norms tested through scalar evaluations
  ``⟨ξ|x|η⟩`` (equivalently through dual functionals);
* ``"max"``: the cone generated by ``PSD ⊗ X⁺`` tensors, with norms
  bracketed between sampled contractions and factorizations;
* ``"schatten"``: a Schatten base with the natural (realigned PSD) cone and the
  ``S_∞^n[S_p]`` norm ``sup ‖(a⊗I) R (b⊗I)‖_p`` over ``‖a‖_{2p}, ‖b‖_{2p} ≤ 1``;
* ``"matsys"``: the matrix system ``S_∞^m``; norms are operator norms of the
  realigned matrix.

Norms are returned as :class:`NormEstimate` brackets; cones as
:class:`ConeVerdict` objects carrying certificates.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy import optimize

from . import spaces as sp
from .config import settings
from .errors import KindMismatchError, NonHermitianInputError
from .linalg import (
    LeveledElement,
    adjoint,
    compress,
    direct_sum,
    norming_matrix,
    partial_trace,
    partial_transpose,
    psd_verdict,
    random_complex,
    random_psd,
    random_unitary,
    realign_schatten,
    schatten_norm,
    unrealign_schatten,
)

MIN = "min"
MAX = "max"
SCHATTEN = "schatten"
MATRIX_SYSTEM = "matsys"
KINDS = (MIN, MAX, SCHATTEN, MATRIX_SYSTEM)

UNDECIDED = None

PPT_EXACT_DIM = 6


@dataclasses.dataclass(frozen=True)
class NormEstimate:
    """A certified bracket ``lower ≤ α_n(x) ≤ upper``; ``exact`` when they coincide by construction."""

    lower: float
    upper: float
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        object.__setattr__(self, "exact", bool(self.exact))

    @property
    def value(self) -> float:
        """Best point estimate: the exact value, or the lower bound otherwise."""
        return self.lower

    def scaled(self, c: float) -> "NormEstimate":
        return NormEstimate(self.lower * c, self.upper * c, self.exact)

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact}


@dataclasses.dataclass
class ConeVerdict:
    """Cone membership verdict.

    ``member`` is ``True``, ``False`` or ``None`` (UNDECIDED). ``certificate``
    is a dict: a decomposition for members, a separating positive
    functional/map with the violating vector for non-members.
    """

    member: bool | None
    certificate: dict
    tol: float

    @property
    def decided(self) -> bool:
        return self.member is not None

    @property
    def label(self) -> str:
        if self.member is None:
            return "UNDECIDED"
        return "member" if self.member else "non-member"

    def to_json(self) -> dict:
        return {"verdict": self.label, "tol": self.tol, "certificate": _jsonable(self.certificate)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclasses.dataclass(frozen=True, eq=False)
class MatricialStructure:
    """A base space together with a matricial structure kind.

    :param scale: multiplies every level norm (used to test homogeneity).
    :param norm_override: optional callable ``x -> NormEstimate`` replacing the
        built-in level norm (used for nested positivisation).
    """

    base: sp.BaseSpace
    kind: str
    restarts: int = dataclasses.field(default_factory=lambda: settings.restarts)
    iterations: int = dataclasses.field(default_factory=lambda: settings.iterations)
    seed: int = dataclasses.field(default_factory=lambda: settings.seed)
    scale: float = 1.0
    norm_override: Callable | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatchError(f"unknown kind {self.kind!r}")
        if self.kind in (SCHATTEN, MATRIX_SYSTEM) and self.base.model != sp.SCHATTEN:
            raise KindMismatchError(f"kind {self.kind} needs a Schatten base")
        if self.kind == MATRIX_SYSTEM and not math.isinf(self.base.p):
            raise KindMismatchError("the matrix-system kind needs the operator norm (p = inf)")

    def replace(self, **changes) -> "MatricialStructure":
        return dataclasses.replace(self, **changes)

    def dual(self) -> "MatricialStructure":
        """The dual structure: MIN ↔ MAX over the dual base, Schatten p ↔ q."""
        base = sp.dual_space(self.base)
        kind = {MIN: MAX, MAX: MIN, SCHATTEN: SCHATTEN, MATRIX_SYSTEM: SCHATTEN}[self.kind]
        if kind == SCHATTEN and math.isinf(base.p):
            kind = MATRIX_SYSTEM
        return dataclasses.replace(self, base=base, kind=kind, scale=1.0 / self.scale, norm_override=None)

    def __repr__(self):
        return f"MatricialStructure(kind={self.kind!r}, base={sp.to_json(self.base)})"


def matrix_system(m: int, **kw) -> MatricialStructure:
    return MatricialStructure(sp.schatten(math.inf, m), MATRIX_SYSTEM, **kw)


def _require(S: MatricialStructure, *kinds):
    if S.kind not in kinds:
        raise KindMismatchError(f"operation needs kind in {kinds}, got {S.kind!r}")


def _check_element(S: MatricialStructure, x: LeveledElement):
    if x.base_dim != S.base.dim or x.involution != S.base.involution:
        raise KindMismatchError("element does not live over the structure's base space")


# --- helpers: scalar evaluations and levelwise maps -----------------------------------


def evaluate(x: LeveledElement, xi, eta) -> np.ndarray:
    """``⟨ξ|x|η⟩ = Σ_ij conj(ξ_i) x_ij η_j``."""
    return np.einsum("i,ijd,j->d", np.conj(xi), x.coeffs, eta)


def functional_matrix(x: LeveledElement, f) -> np.ndarray:
    """The scalar matrix ``(⟨f, x_ij⟩)_ij``."""
    return np.einsum("ijd,d->ij", x.coeffs, np.asarray(f))


def apply_map(T: np.ndarray, x: LeveledElement) -> np.ndarray:
    """Levelwise action ``(I⊗T)(x)`` of a map ``T: X → M_k`` given as an array ``(k, k, d)``.

    The result is the ``nk × nk`` scalar matrix with rows ``(i, a)`` and columns ``(j, b)``.
    """
    n, k = x.level, T.shape[0]
    return np.einsum("ijc,abc->iajb", x.coeffs, T).reshape(n * k, n * k)


def identity_map(m: int) -> np.ndarray:
    T = np.zeros((m, m, m * m))
    for a in range(m):
        for b in range(m):
            T[a, b, a * m + b] = 1.0
    return T


def transpose_map(m: int) -> np.ndarray:
    T = np.zeros((m, m, m * m))
    for a in range(m):
        for b in range(m):
            T[a, b, b * m + a] = 1.0
    return T


def _conjugate_map(T: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Return the map ``v ↦ V T(v) V*``."""
    return np.einsum("ka,abc,lb->klc", V, T, V.conj())


def _resolve_tol(tol, mats) -> float:
    if tol is not None:
        return float(tol)
    scale = 0.0
    for M in mats:
        H = (M + M.conj().T) / 2
        scale = max(scale, float(np.sum(np.abs(np.linalg.eigvalsh(H)))))
    return settings.psd_tol * scale


def _hermitian_defect(x: LeveledElement) -> float:
    return float(np.max(np.abs(adjoint(x).coeffs - x.coeffs), initial=0.0))


# --- MIN norm ---------------------------------------------------------------------------


def _min_norm_search(S: MatricialStructure, x: LeveledElement, rng=None):
    """Alternating ascent for ``sup_{f ∈ ball(X♭)} ‖Σ_k f_k X_k‖_op``.

    Each sweep sets ``f`` to the norming functional of ``⟨ξ|x|η⟩`` and then
    ``(ξ, η)`` to the top singular pair of ``Σ_k f_k X_k``; the value is
    nondecreasing. Returns ``(value, f, xi, eta)``.
    """
    X = S.base
    n = x.level
    rng = np.random.default_rng(S.seed) if rng is None else rng
    starts = []
    flat = x.coeffs.reshape(n * n, -1)
    norms = np.array([sp.base_norm(X, v) for v in flat])
    for idx in np.argsort(-norms)[: min(4, n * n)]:
        if norms[idx] > 0:
            starts.append(sp.norming_functional(X, flat[idx]))
    for _ in range(max(S.restarts - len(starts), 1)):
        f = random_complex(rng, X.dim)
        starts.append(f / sp.dual_norm(X, f))
    best = (0.0, starts[0], np.eye(n)[0].astype(complex), np.eye(n)[0].astype(complex))
    for f in starts:
        val = -1.0
        for _ in range(S.iterations):
            B = functional_matrix(x, f)
            U, s, Vh = np.linalg.svd(B)
            xi, eta = U[:, 0], Vh[0].conj()
            v = evaluate(x, xi, eta)
            new = sp.base_norm(X, v)
            if new <= val * (1 + 1e-15) + 1e-300:
                val = max(val, new)
                break
            val = new
            f = sp.norming_functional(X, v)
        if val > best[0]:
            best = (val, f, xi, eta)
    return best


def min_level_norm_bracket(S: MatricialStructure, x: LeveledElement) -> NormEstimate:
    """MIN level norm ``sup_{ξ,η unit} ‖⟨ξ|x|η⟩‖`` as a bracket.

    Exact at level 1, for weighted ℓ_∞ lattices (``max_k w_k ‖X_k‖``) and for
    ℓ_1 lattices on coordinatewise-PSD inputs (``λ_max(Σ w_k X_k)``).
    Otherwise the lower bound comes from the alternating ascent and the upper
    bound from the triangle inequality.
    """
    _require(S, MIN)
    _check_element(S, x)
    X = S.base
    if x.level == 1:
        v = sp.base_norm(X, x.coeffs[0, 0])
        return NormEstimate(v, v, True)
    mats = x.coordinate_matrices()
    if X.model == sp.LATTICE:
        w = X.weight_array
        if math.isinf(X.p):
            v = max(w[k] * np.linalg.norm(mats[k], 2) for k in range(X.dim))
            return NormEstimate(float(v), float(v), True)
        if X.p == 1 and all(psd_verdict(M, 1e-13)[0] for M in mats):
            v = float(np.linalg.eigvalsh(np.tensordot(w, mats, axes=1))[-1])
            return NormEstimate(v, v, True)
    lower = _min_norm_search(S, x)[0]
    unit = np.eye(X.dim)
    coord_bound = sum(np.linalg.norm(mats[k], 2) * sp.base_norm(X, unit[k]) for k in range(X.dim))
    N = np.array([[sp.base_norm(X, x.coeffs[i, j]) for j in range(x.level)] for i in range(x.level)])
    entry_bound = float(np.linalg.norm(N, 2))
    upper = max(min(coord_bound, entry_bound), lower)
    return NormEstimate(lower, upper, math.isclose(lower, upper, rel_tol=1e-12))


def min_level_norm(S: MatricialStructure, x: LeveledElement) -> float:
    """MIN level norm: exact where a closed form exists, otherwise the optimizer's lower bound."""
    return min_level_norm_bracket(S, x).value


# --- MIN cone ---------------------------------------------------------------------------


def _non_hermitian_verdict(x, tol):
    return ConeVerdict(False, {"type": "non_hermitian", "defect": _hermitian_defect(x)}, tol)


def _min_schatten_search(S: MatricialStructure, x: LeveledElement, rng):
    """Minimize ``λ_min(⟨ξ|x|ξ⟩)`` over unit ``ξ`` on a mesh, then refine locally."""
    n, m = x.level, S.base.m

    def lam(vec):
        xi = vec[:n] + 1j * vec[n:]
        nrm = np.linalg.norm(xi)
        if nrm == 0:
            return 0.0
        xi = xi / nrm
        A = evaluate(x, xi, xi).reshape(m, m)
        return float(np.linalg.eigvalsh((A + A.conj().T) / 2)[0])

    candidates = [np.eye(n)[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for ph in (1, -1, 1j, -1j):
                v = np.zeros(n, dtype=complex)
                v[i], v[j] = 1, ph
                candidates.append(v / math.sqrt(2))
    for _ in range(max(S.restarts, 8)):
        candidates.append(random_complex(rng, n))
    scored = sorted(((lam(np.concatenate([c.real, c.imag])), c) for c in candidates), key=lambda t: t[0])
    best_val, best_xi = scored[0][0], scored[0][1]
    for val0, c in scored[: min(6, len(scored))]:
        res = optimize.minimize(lam, np.concatenate([c.real, c.imag]), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        if res.fun < best_val:
            best_val, best_xi = float(res.fun), res.x[:n] + 1j * res.x[n:]
    best_xi = best_xi / np.linalg.norm(best_xi)
    A = evaluate(x, best_xi, best_xi).reshape(m, m)
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return float(w[0]), best_xi, V[:, 0]


def min_cone_member(S: MatricialStructure, x: LeveledElement, tol=None) -> ConeVerdict:
    """MIN cone membership.

    Exact for finitely generated dual cones: ``x`` is a member iff every
    ``(⟨f_k, x_ij⟩)_ij`` is PSD. For Schatten bases a PSD or PPT realignment
    certifies membership, a mesh-plus-refinement search for ``⟨ξ|x|ξ⟩ ≱ 0``
    certifies non-membership, and otherwise the verdict is UNDECIDED.
    """
    _require(S, MIN)
    _check_element(S, x)
    X = S.base
    if X.model == sp.SCHATTEN:
        n, m = x.level, X.m
        R = realign_schatten(x)
        tol_abs = _resolve_tol(tol, [R])
        if _hermitian_defect(x) > max(tol_abs, 1e-12 * (1 + np.max(np.abs(R)))):
            return _non_hermitian_verdict(x, tol_abs)
        ok, lam, _ = psd_verdict(R, tol_abs)
        if ok:
            return ConeVerdict(True, {"type": "psd_realignment", "min_eig": lam}, tol_abs)
        okT, lamT, _ = psd_verdict(partial_transpose(R, n, m), tol_abs)
        if okT:
            return ConeVerdict(True, {"type": "psd_partial_transpose", "min_eig": lamT}, tol_abs)
        rng = np.random.default_rng(S.seed)
        val, xi, zeta = _min_schatten_search(S, x, rng)
        if val < -tol_abs:
            return ConeVerdict(False, {"type": "evaluation", "xi": xi, "zeta": zeta, "value": val}, tol_abs)
        return ConeVerdict(UNDECIDED, {"type": "search_exhausted", "min_found": val}, tol_abs)
    F = X.dual_generators
    mats = [functional_matrix(x, f) for f in F]
    tol_abs = _resolve_tol(tol, mats)
    if _hermitian_defect(x) > max(tol_abs, 1e-12 * (1 + np.max(np.abs(x.coeffs), initial=0))):
        return _non_hermitian_verdict(x, tol_abs)
    worst = math.inf
    for k, M in enumerate(mats):
        ok, lam, vec = psd_verdict(M, tol_abs)
        worst = min(worst, lam)
        if not ok:
            return ConeVerdict(False, {"type": "dual_generator", "functional": F[k], "index": k,
                                       "xi": vec, "value": lam}, tol_abs)
    return ConeVerdict(True, {"type": "dual_generators_psd", "min_eig": worst}, tol_abs)


# --- MAX cone ---------------------------------------------------------------------------


def _generator_rank(X: sp.BaseSpace) -> int:
    return int(np.linalg.matrix_rank(X.cone_generators))


def max_decomposition(X: sp.BaseSpace, x: LeveledElement):
    """Solve ``x = Σ_k A_k ⊗ g_k`` for independent generators; returns ``(A, residual)``."""
    G = X.cone_generators
    n = x.level
    flat = x.coeffs.reshape(n * n, X.dim)
    C = flat @ np.linalg.pinv(G)
    residual = float(np.max(np.abs(C @ G - flat), initial=0.0))
    A = C.T.reshape(G.shape[0], n, n)
    return A, residual


def _random_positive_maps(X: sp.BaseSpace, n: int, rng, attempts: int):
    """Yield positive maps ``T: X → M_k`` (arrays ``(k, k, d)``) for falsification."""
    if X.model == sp.SCHATTEN:
        m = X.m
        base_maps = [identity_map(m), transpose_map(m)]
        red = np.zeros((m, m, m * m))
        for a in range(m):
            red[a, a, [c * m + c for c in range(m)]] += 1.0
        red -= identity_map(m)
        base_maps.append(red)
        for T in base_maps:
            yield T
        for t in range(max(attempts - len(base_maps), 0)):
            T = base_maps[t % len(base_maps)]
            k = n if t % 2 else m
            V = random_complex(rng, (k, m))
            yield _conjugate_map(T, V)
        return
    F = X.dual_generators
    for f in F:
        yield f.reshape(1, 1, -1)
    for _ in range(max(attempts - len(F), 0)):
        B = [random_psd(rng, n, 1) for _ in F]
        yield np.einsum("kab,kc->abc", np.array(B), F)


def max_cone_member(S: MatricialStructure, x: LeveledElement, tol=None, attempts: int = 100) -> ConeVerdict:
    """MAX cone membership.

    Phase 1 (exact for linearly independent cone generators): solve
    ``x = Σ A_k ⊗ g_k`` and test every ``A_k`` for PSD. For Schatten bases a
    non-PSD realignment is refuted by the identity map, and for ``nm ≤ 6`` the
    PPT test decides exactly (separable ⟺ PPT in these dimensions). Phase 2
    searches random positive maps ``T`` for a non-PSD ``(I⊗T)(x)``; failing
    that the verdict is UNDECIDED.
    """
    _require(S, MAX)
    _check_element(S, x)
    X = S.base
    defect = _hermitian_defect(x)
    if defect > 1e-9 * (1 + np.max(np.abs(x.coeffs), initial=0)):
        raise NonHermitianInputError(f"MAX cone test needs a hermitian input (defect {defect:.3e})")
    n = x.level
    if X.model == sp.SCHATTEN:
        m = X.m
        R = realign_schatten(x)
        tol_abs = _resolve_tol(tol, [R])
        ok, lam, vec = psd_verdict(R, tol_abs)
        if not ok:
            return ConeVerdict(False, {"type": "positive_map", "map": "identity", "T": identity_map(m),
                                       "vector": vec, "value": lam, "attempts": 1}, tol_abs)
        RT = partial_transpose(R, n, m)
        okT, lamT, vecT = psd_verdict(RT, tol_abs)
        if not okT:
            return ConeVerdict(False, {"type": "positive_map", "map": "transpose", "T": transpose_map(m),
                                       "vector": vecT, "value": lamT, "attempts": 2}, tol_abs)
        if n * m <= PPT_EXACT_DIM:
            return ConeVerdict(True, {"type": "ppt_small_dimension", "min_eig": min(lam, lamT)}, tol_abs)
    elif _generator_rank(X) == X.cone_generators.shape[0]:
        A, residual = max_decomposition(X, x)
        scale = 1 + float(np.max(np.abs(x.coeffs), initial=0))
        tol_abs = _resolve_tol(tol, list(A))
        if residual > 1e-9 * scale:
            G = X.cone_generators.real
            _, _, Vh = np.linalg.svd(G)
            h = Vh[np.linalg.matrix_rank(G):][0]
            M = functional_matrix(x, h)
            ok, lam, vec = psd_verdict(M, tol_abs)
            if ok:
                h, M = -h, -M
                ok, lam, vec = psd_verdict(M, tol_abs)
            return ConeVerdict(False, {"type": "outside_span", "functional": h, "vector": vec,
                                       "value": lam, "residual": residual}, tol_abs)
        dual_basis = np.linalg.pinv(X.cone_generators).T
        worst = math.inf
        for k, Ak in enumerate(A):
            ok, lam, vec = psd_verdict(Ak, tol_abs)
            worst = min(worst, lam)
            if not ok:
                return ConeVerdict(False, {"type": "dual_basis_functional", "functional": dual_basis[k],
                                           "index": k, "xi": vec, "value": lam}, tol_abs)
        return ConeVerdict(True, {"type": "decomposition", "coefficients": A,
                                  "generators": X.cone_generators, "min_eig": worst}, tol_abs)
    else:
        tol_abs = _resolve_tol(tol, [functional_matrix(x, f) for f in X.dual_generators])
    rng = np.random.default_rng(S.seed)
    for t, T in enumerate(_random_positive_maps(X, n, rng, attempts)):
        ok, lam, vec = psd_verdict(apply_map(T, x), tol_abs)
        if not ok:
            return ConeVerdict(False, {"type": "positive_map", "T": T, "vector": vec, "value": lam,
                                       "attempts": t + 1}, tol_abs)
    return ConeVerdict(UNDECIDED, {"type": "falsification_exhausted", "attempts": attempts}, tol_abs)


# --- MAX norm ---------------------------------------------------------------------------


def _contraction_ascent_l1(x: LeveledElement, w, rng, iterations):
    """Maximize ``‖Σ_k X_k ⊗ U_k / w_k‖`` over contractions ``U_k ∈ M_n``."""
    mats = x.coordinate_matrices()
    n, d = x.level, len(mats)
    U = [random_unitary(rng, n) for _ in range(d)]
    val = -1.0
    for _ in range(iterations):
        M = sum(np.kron(mats[k], U[k]) / w[k] for k in range(d))
        Uu, s, Vh = np.linalg.svd(M)
        new = s[0]
        if new <= val * (1 + 1e-14):
            break
        val = new
        u = Uu[:, 0].reshape(n, n)
        v = Vh[0].conj().reshape(n, n)
        for k in range(d):
            Q = np.einsum("ia,ij,jb->ba", u.conj(), mats[k], v)
            P, _, Wh = np.linalg.svd(Q)
            U[k] = (P @ Wh).conj().T
    return max(val, 0.0)


def _contraction_ascent_linf(x: LeveledElement, w, rng, iterations):
    """Maximize ``‖Σ_c X_c ⊗ w_c a_c b_c*‖`` over contractions ``A = [a_c]``, ``B = [b_c]``."""
    mats = x.coordinate_matrices()
    n, d = x.level, len(mats)
    k = n
    A = np.linalg.qr(random_complex(rng, (max(k, d), max(k, d))))[0][:k, :d]
    B = np.linalg.qr(random_complex(rng, (max(k, d), max(k, d))))[0][:k, :d]
    val = -1.0
    for _ in range(iterations):
        M = sum(np.kron(mats[c], w[c] * np.outer(A[:, c], B[:, c].conj())) for c in range(d))
        Uu, s, Vh = np.linalg.svd(M)
        if s[0] <= val * (1 + 1e-14):
            break
        val = s[0]
        u = Uu[:, 0].reshape(n, k)
        v = Vh[0].conj().reshape(n, k)
        # linear term: Σ_c w_c Σ_ij X_c[i,j] (u_i^* a_c)(b_c^* v_j)
        coef_a = np.array([w[c] * np.einsum("ij,j->i", mats[c], v @ B[:, c].conj()) for c in range(d)])
        Qa = np.stack([u.T @ coef_a[c].conj() for c in range(d)], axis=1).conj()
        P, _, Wh = np.linalg.svd(Qa, full_matrices=False)
        A = P @ Wh
        coef_b = np.array([w[c] * np.einsum("i,ij->j", (u @ A[:, c].conj()).conj(), mats[c]) for c in range(d)])
        Qb = np.stack([v.T @ coef_b[c] for c in range(d)], axis=1).conj()
        Qb = Qb.conj()
        P, _, Wh = np.linalg.svd(Qb, full_matrices=False)
        B = P @ Wh
    return max(val, 0.0)


def _contraction_lower_bound(S: MatricialStructure, x: LeveledElement) -> float:
    X = S.base
    rng = np.random.default_rng(S.seed)
    best = _min_norm_search(S, x, rng)[0]
    unit = np.eye(X.dim)
    for k in range(X.dim):
        f = unit[k] / sp.dual_norm(X, unit[k])
        best = max(best, float(np.linalg.norm(functional_matrix(x, f), 2)))
    if X.model in (sp.LATTICE, sp.CUSTOM):
        w = X.weight_array
        tries = max(2, S.restarts // 4)
        if X.p == 1:
            for _ in range(tries):
                best = max(best, _contraction_ascent_l1(x, w, rng, S.iterations))
        elif math.isinf(X.p):
            for _ in range(tries):
                best = max(best, _contraction_ascent_linf(x, w, rng, S.iterations))
        elif X.p == 2:
            d = X.dim
            sw = np.sqrt(w)
            for t in range(tries):
                Q = random_unitary(rng, d) if t else np.eye(d)
                for col in (False, True):
                    # row/column Hilbert-space embeddings composed with a unitary
                    T = np.zeros((d, d, d), dtype=complex)
                    for c in range(d):
                        vec = Q[:, c] * sw[c]
                        if col:
                            T[:, 0, c] = vec
                        else:
                            T[0, :, c] = vec
                    best = max(best, float(np.linalg.norm(apply_map(T, x), 2)))
    elif X.model == sp.SCHATTEN:
        m = X.m
        for base_map in (identity_map(m), transpose_map(m)):
            best = max(best, float(np.linalg.norm(apply_map(base_map, x), 2)))
    return best


def _factorization_value(A_list, Y) -> float:
    """``sqrt(‖Σ_r ‖y_r‖ |A_r*|‖ · ‖Σ_r ‖y_r‖ |A_r|‖)`` for ``x = Σ_r A_r ⊗ y_r``."""
    n = A_list[0].shape[0]
    L = np.zeros((n, n), dtype=complex)
    Rm = np.zeros((n, n), dtype=complex)
    for A, ny in zip(A_list, Y):
        if ny == 0:
            continue
        U, s, Vh = np.linalg.svd(A)
        L += ny * (U * s) @ U.conj().T
        Rm += ny * (Vh.conj().T * s) @ Vh
    return math.sqrt(max(np.linalg.eigvalsh(L)[-1], 0) * max(np.linalg.eigvalsh(Rm)[-1], 0))


def max_factorization(S: MatricialStructure, x: LeveledElement):
    """Best found decomposition ``x = Σ_r A_r ⊗ y_r`` for the factorization bound.

    Tries the SVD basis of the ``n² × d`` coefficient unfolding and the
    coordinate basis, then refines over invertible changes of the SVD basis.
    Returns ``(value, A_list, Y)``; every candidate is checked to reproduce ``x``.
    """
    X = S.base
    n = x.level
    flat = x.coeffs.reshape(n * n, X.dim)
    if not np.any(flat):
        return 0.0, [np.zeros((n, n))], np.zeros((1, X.dim))
    U, s, Vh = np.linalg.svd(flat, full_matrices=False)
    r = int(np.sum(s > s[0] * 1e-13))
    scale = float(np.max(np.abs(flat)))

    def decompose(Ybasis):
        coeffs = flat @ np.linalg.pinv(Ybasis)
        if np.max(np.abs(coeffs @ Ybasis - flat)) > 1e-10 * scale:
            return math.inf, None, None
        A_list = [coeffs[:, t].reshape(n, n) for t in range(Ybasis.shape[0])]
        norms = [sp.base_norm(X, y) for y in Ybasis]
        return _factorization_value(A_list, norms), A_list, Ybasis

    best = min((decompose(B) for B in (Vh[:r], np.eye(X.dim, dtype=complex))), key=lambda t: t[0])
    Y0 = Vh[:r]
    if r > 1 and S.iterations > 0:
        def obj(params):
            P = (params[: r * r] + 1j * params[r * r:]).reshape(r, r)
            try:
                return decompose(P @ Y0)[0]
            except np.linalg.LinAlgError:
                return math.inf

        start = np.concatenate([np.eye(r).ravel(), np.zeros(r * r)])
        res = optimize.minimize(obj, start, method="Nelder-Mead",
                                options={"maxiter": min(40 * r * r, 4 * S.iterations), "xatol": 1e-10, "fatol": 1e-13})
        if np.isfinite(res.fun) and res.fun < best[0]:
            P = (res.x[: r * r] + 1j * res.x[r * r:]).reshape(r, r)
            cand = decompose(P @ Y0)
            if cand[0] < best[0]:
                best = cand
    return best


def _factorization_upper_bound(S: MatricialStructure, x: LeveledElement) -> float:
    return max_factorization(S, x)[0]


def max_level_norm(S: MatricialStructure, x: LeveledElement) -> NormEstimate:
    """MAX level norm bracket: sampled contractions below, factorizations above."""
    _require(S, MAX)
    _check_element(S, x)
    if x.level == 1:
        v = sp.base_norm(S.base, x.coeffs[0, 0])
        return NormEstimate(v, v, True)
    lower = _contraction_lower_bound(S, x)
    upper = _factorization_upper_bound(S, x)
    upper = max(upper, lower)
    return NormEstimate(lower, upper, math.isclose(lower, upper, rel_tol=1e-12))


# --- Schatten norm and cone ---------------------------------------------------------------


def _batched_norming(K: np.ndarray, r: float) -> np.ndarray:
    """Stacked :func:`~matorder.linalg.norming_matrix` for ``2 ≤ r < ∞``."""
    U, s, Vh = np.linalg.svd(K)
    rp = r / (r - 1)
    top = np.maximum(s[:, :1], 1e-300)
    w = (s / top) ** (rp - 1)
    w /= np.sum(w ** r, axis=1, keepdims=True) ** (1 / r)
    return np.einsum("bji,bj,bkj->bik", Vh.conj(), w, U.conj())


def _batched_pnorm(s: np.ndarray, p: float) -> np.ndarray:
    top = np.maximum(s[:, :1], 1e-300)
    return top[:, 0] * np.sum((s / top) ** p, axis=1) ** (1 / p)


def _kron_identity(a: np.ndarray, m: int) -> np.ndarray:
    B, n, _ = a.shape
    return np.einsum("bij,kl->bikjl", a, np.eye(m)).reshape(B, n * m, n * m)


def _partial_trace_batched(M: np.ndarray, n: int, m: int) -> np.ndarray:
    return np.einsum("bikjk->bij", M.reshape(-1, n, m, n, m))


def _schatten_ascent(R, n, m, p, rng, restarts, iterations):
    """Two-sided conditional-gradient ascent of ``‖(a⊗I)R(b⊗I)‖_p`` over ``S_{2p}`` unit balls.

    All restarts run as one stacked batch. Each step replaces ``a`` (then
    ``b``) by the norming matrix of the gradient, so the value never decreases.
    Returns ``(value, (a, b))``.
    """
    r = 2 * p
    a0 = random_complex(rng, (restarts + 1, n, n))
    b0 = random_complex(rng, (restarts + 1, n, n))
    a0[0] = b0[0] = np.eye(n)
    a = a0 / _batched_pnorm(np.linalg.svd(a0, compute_uv=False), r)[:, None, None]
    b = b0 / _batched_pnorm(np.linalg.svd(b0, compute_uv=False), r)[:, None, None]
    best = np.zeros(len(a))
    best_a, best_b = a.copy(), b.copy()
    for _ in range(iterations):
        Y = _kron_identity(a, m) @ R @ _kron_identity(b, m)
        U, s, Vh = np.linalg.svd(Y)
        val = _batched_pnorm(s, p)
        improved = val > best
        best_a[improved], best_b[improved] = a[improved], b[improved]
        stalled = np.all(val <= best * (1 + 1e-13))
        best = np.maximum(best, val)
        if stalled:
            break
        wts = np.ones_like(s) if p == 1 else (s / np.maximum(s[:, :1], 1e-300)) ** (p - 1)
        Gh = np.einsum("bji,bj,bkj->bik", Vh.conj(), wts, U.conj())
        a = _batched_norming(_partial_trace_batched(R @ _kron_identity(b, m) @ Gh, n, m), r)
        b = _batched_norming(_partial_trace_batched(Gh @ _kron_identity(a, m) @ R, n, m), r)
    k = int(np.argmax(best))
    return float(best[k]), (best_a[k], best_b[k])


def schatten_level_norm(S: MatricialStructure, x: LeveledElement, p=None) -> NormEstimate:
    """Level norm for the Schatten and matrix-system kinds.

    ``p = inf``: operator norm of the realignment (exact). Finite ``p``: the
    ascent value is a lower bound; ``min(‖R‖_p, m^{1/p} ‖R‖_∞)`` is an upper
    bound. At ``p = 1`` a PSD realignment has the exact value ``λ_max(Tr_m R)``.
    """
    _require(S, SCHATTEN, MATRIX_SYSTEM)
    _check_element(S, x)
    p = S.base.p if p is None else float(p)
    R = realign_schatten(x)
    n, m = x.level, S.base.m
    if math.isinf(p):
        v = schatten_norm(R, math.inf)
        return NormEstimate(v, v, True)
    if n == 1:
        v = schatten_norm(R, p)
        return NormEstimate(v, v, True)
    psd = psd_verdict(R, 1e-13 * max(1.0, float(np.abs(R).max())))[0]
    if psd and p == 1:
        v = float(np.linalg.eigvalsh(partial_trace(R, n, m))[-1])
        return NormEstimate(v, v, True)
    if psd and p == 2:
        v = _psd_schatten2_norm(R, n, m)
        return NormEstimate(v, v, True)
    rng = np.random.default_rng(S.seed)
    if psd:
        lower = _one_sided_ascent(R, n, m, p, rng, S.restarts, S.iterations)[0]
    else:
        lower, _ = _schatten_ascent(R, n, m, p, rng, S.restarts, S.iterations)
    upper = max(min(schatten_norm(R, p), m ** (1 / p) * schatten_norm(R, math.inf)), lower)
    return NormEstimate(lower, upper, math.isclose(lower, upper, rel_tol=1e-12))


def _psd_schatten2_norm(Y, n, m) -> float:
    """Exact ``p = 2`` level norm of a PSD realignment ``Y``.

    ``‖(a⊗I)Y(a*⊗I)‖_2² = ⟨P, Φ(P)⟩`` with ``P = a*a`` and the positive map
    ``Φ(P) = Tr_m(Y(P⊗I)Y)``; its top eigenvector may be taken PSD, so the
    norm is ``sqrt(λ_max(Φ))``.
    """
    I = np.eye(m)
    basis = np.eye(n * n).reshape(n * n, n, n)
    Phi = np.array([partial_trace(Y @ np.kron(E, I) @ Y, n, m).ravel() for E in basis]).T
    # Φ acts on vec(P); conjugate-symmetrize against round-off
    Phi = (Phi + Phi.conj().T) / 2
    return float(math.sqrt(max(np.linalg.eigvalsh(Phi)[-1], 0.0)))


def schatten_weight(S: MatricialStructure, x: LeveledElement):
    """Return ``(value, a)`` maximizing the one-sided ``‖(a⊗I)R(a*⊗I)‖_p`` for hermitian ``x``."""
    rng = np.random.default_rng(S.seed)
    return _one_sided_ascent(realign_schatten(x), x.level, S.base.m, S.base.p, rng, S.restarts, S.iterations)


def _one_sided_ascent(R, n, m, p, rng, restarts, iterations):
    r = 2 * p
    I = np.eye(m)
    best, best_a = -1.0, None
    starts = [np.eye(n) / n ** (1 / r)]
    for _ in range(restarts):
        a = random_complex(rng, (n, n))
        starts.append(a / schatten_norm(a, r))
    for a in starts:
        val = -1.0
        for _ in range(4 * iterations):
            A = np.kron(a, I)
            Z = A @ R @ A.conj().T
            wz, V = np.linalg.eigh((Z + Z.conj().T) / 2)
            sz = np.abs(wz)
            new = schatten_norm(Z, p)
            if new <= val * (1 + 1e-15) or sz.max() == 0:
                val = max(val, new)
                break
            val = new
            g = np.sign(wz) * (np.ones_like(sz) if p == 1 else (sz / sz.max()) ** (p - 1))
            G = (V * g) @ V.conj().T
            a = norming_matrix(partial_trace(R @ A.conj().T @ G, n, m), r)
        if val > best:
            best, best_a = val, a
    return best, best_a


def schatten_cone_member(S: MatricialStructure, x: LeveledElement, tol=None) -> ConeVerdict:
    """Natural cone: member iff the realignment is PSD within ``tol`` (exact)."""
    _require(S, SCHATTEN, MATRIX_SYSTEM)
    _check_element(S, x)
    R = realign_schatten(x)
    tol_abs = _resolve_tol(tol, [R])
    ok, lam, vec = psd_verdict(R, tol_abs)
    if ok:
        return ConeVerdict(True, {"type": "psd_realignment", "min_eig": lam}, tol_abs)
    if vec is None:
        return _non_hermitian_verdict(x, tol_abs)
    return ConeVerdict(False, {"type": "eigenvector", "vector": vec, "min_eig": lam}, tol_abs)


# --- dispatch -------------------------------------------------------------------------------


def level_norm(S: MatricialStructure, x: LeveledElement) -> NormEstimate:
    """Level norm bracket for any kind (including the ``scale`` factor and overrides)."""
    if S.norm_override is not None:
        return S.norm_override(x).scaled(S.scale)
    if S.kind == MIN:
        est = min_level_norm_bracket(S, x)
    elif S.kind == MAX:
        est = max_level_norm(S, x)
    else:
        est = schatten_level_norm(S, x)
    return est.scaled(S.scale)


def cone_member(S: MatricialStructure, x: LeveledElement, tol=None) -> ConeVerdict:
    """Cone membership for any kind. Non-hermitian inputs are non-members."""
    if S.kind == MIN:
        return min_cone_member(S, x, tol)
    if S.kind == MAX:
        defect = _hermitian_defect(x)
        if defect > 1e-9 * (1 + np.max(np.abs(x.coeffs), initial=0)):
            return _non_hermitian_verdict(x, 0.0 if tol is None else tol)
        return max_cone_member(S, x, tol)
    return schatten_cone_member(S, x, tol)


# --- sampling -------------------------------------------------------------------------------


def random_element(S: MatricialStructure, n: int, rng, hermitian: bool = False) -> LeveledElement:
    x = S.base.element(random_complex(rng, (n, n, S.base.dim)))
    if S.base.model == sp.CUSTOM:
        x = x.with_coeffs(x.coeffs.real)
    if hermitian:
        x = (x + adjoint(x)) * 0.5
    return x


def random_cone_member(S: MatricialStructure, n: int, rng, rank=None) -> LeveledElement:
    """A random member of the level-``n`` cone (built to be in the MAX cone where applicable)."""
    X = S.base
    if X.model == sp.SCHATTEN:
        m = X.m
        if S.kind == MAX:
            terms = int(rng.integers(1, 4))
            R = sum(np.kron(random_psd(rng, n, 1), random_psd(rng, m, 1)) for _ in range(terms))
        else:
            R = random_psd(rng, n * m, rank if rank is not None else int(rng.integers(1, n * m + 1)))
        return unrealign_schatten(R, n)
    G = X.cone_generators
    coeffs = np.zeros((n, n, X.dim), dtype=complex)
    for g in G:
        if rng.random() < 0.75:
            rk = rank if rank is not None else int(rng.integers(1, n + 1))
            coeffs += random_psd(rng, n, rk)[:, :, None] * g.real[None, None, :]
    return X.element(coeffs)


# --- property runners -------------------------------------------------------------------------


def _report(name, trials, violations, extra=None):
    out = {"check": name, "trials": trials, "violations": len(violations),
           "examples": _jsonable(violations[:3]), "pass": not violations}
    if extra:
        out.update(extra)
    return out


def ruan_check(S: MatricialStructure, budget: int = 200, seed: int = 0, max_level: int = 3,
               rtol: float = 1e-9) -> dict:
    """Check Ruan's axioms on random inputs.

    Axiom (1): ``lower(a·x·b*) ≤ ‖a‖‖b‖ upper(x)``. Axiom (2):
    ``lower(x⊕y) ≤ max(upper(x), upper(y))`` and ``max(lower(x), lower(y)) ≤ upper(x⊕y)``;
    for exact norms these are equalities.
    """
    rng = np.random.default_rng(seed)
    v1, v2 = [], []
    for t in range(budget):
        n = int(rng.integers(1, max_level + 1))
        m = int(rng.integers(1, max_level + 1))
        x = random_element(S, n, rng)
        if t % 5 == 0:
            a = b = np.eye(n)[: min(m, n)] if m <= n else np.vstack([np.eye(n), np.zeros((m - n, n))])
        else:
            a, b = random_complex(rng, (m, n)), random_complex(rng, (m, n))
        lhs = level_norm(S, compress(a, x, b))
        rhs = np.linalg.norm(a, 2) * np.linalg.norm(b, 2) * level_norm(S, x).upper
        if lhs.lower > rhs * (1 + rtol) + 1e-12:
            v1.append({"trial": t, "lhs": lhs.lower, "rhs": rhs})
        n2 = int(rng.integers(1, max_level + 1))
        y = random_element(S, n2, rng)
        nx, ny, nxy = level_norm(S, x), level_norm(S, y), level_norm(S, direct_sum(x, y))
        hi = max(nx.upper, ny.upper)
        lo = max(nx.lower, ny.lower)
        if nxy.lower > hi * (1 + rtol) + 1e-12 or lo > nxy.upper * (1 + rtol) + 1e-12:
            v2.append({"trial": t, "sum": nxy.to_json(), "parts": [nx.to_json(), ny.to_json()]})
    return {
        "kind": S.kind,
        "axiom1": _report("compression", budget, v1),
        "axiom2": _report("direct_sum", budget, v2),
        "pass": not v1 and not v2,
        "seed": seed,
    }


def cone_axiom_check(S: MatricialStructure, budget: int = 200, seed: int = 0, max_level: int = 3) -> dict:
    """Random cone members stay members under compressions, direct sums, sums and scaling;
    and no ``x ≠ 0`` with ``±x`` both members is found when the base is pointed."""
    rng = np.random.default_rng(seed)
    bad = {"compression": [], "direct_sum": [], "sum_scaling": [], "pointedness": []}
    undecided = 0

    def check(tag, z, t):
        nonlocal undecided
        v = cone_member(S, z)
        if v.member is None:
            undecided += 1
        elif not v.member:
            bad[tag].append({"trial": t, "certificate": v.to_json()})

    for t in range(budget):
        n = int(rng.integers(1, max_level + 1))
        m = int(rng.integers(1, max_level + 1))
        x = random_cone_member(S, n, rng)
        a = random_complex(rng, (m, n)) if t % 10 else np.zeros((m, n))
        check("compression", compress(a, x, a), t)
        y = random_cone_member(S, int(rng.integers(1, max_level + 1)), rng)
        check("direct_sum", direct_sum(x, y), t)
        z = random_cone_member(S, n, rng)
        lam, mu = rng.exponential(), rng.exponential()
        check("sum_scaling", x * lam + z * mu, t)
        if S.base.pointed and np.max(np.abs(x.coeffs)) > 1e-9:
            v = cone_member(S, -x)
            if v.member:
                bad["pointedness"].append({"trial": t})
    reports = {k: _report(k, budget, v) for k, v in bad.items()}
    return {"kind": S.kind, **reports, "undecided": undecided,
            "pass": all(not v for v in bad.values()), "seed": seed}
