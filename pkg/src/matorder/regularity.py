"""Matricial normality and generation: probes, block witnesses and obstructions.

A :class:`BlockWitness` ``(x₁, x₂)`` certifies generation of ``x``: the
level-``2n`` block ``[[x₁, x], [x*, x₂]]`` is a cone member. Normality is
probed from the other side by sampling positive level-``2n`` blocks and
comparing the off-diagonal norm with the diagonal ones.

Generation witnesses certify the strong variant (``ε = 0``) of the generating
property: every returned witness has an explicitly verified positive block.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import warnings

import numpy as np

from . import spaces as sp
from . import structures as st
from .errors import (
    MatrixFamilyNotFoundError,
    ModelMismatchError,
    NotCompletelyPositiveError,
    NoWitnessFoundError,
)
from .structures import max_factorization
from .linalg import (
    LeveledElement,
    abs_hermitian,
    adjoint,
    assemble_blocks,
    psd_sqrt,
    psd_verdict,
    random_complex,
    random_hermitian,
    random_psd,
    realign_schatten,
    split_blocks,
    unrealign_schatten,
)


@dataclasses.dataclass
class BlockWitness:
    """Positive completion ``[[x₁, x], [x*, x₂]]`` of ``x`` with ``value = max(α(x₁), α(x₂))``."""

    x1: LeveledElement
    x2: LeveledElement
    value: float
    block: LeveledElement
    upper: float | None = None

    @property
    def symmetric(self) -> LeveledElement:
        """The symmetric witness ``(x₁ + x₂)/2`` dominating ``±x`` for hermitian ``x``."""
        return (self.x1 + self.x2) * 0.5

    def to_json(self) -> dict:
        from .io import element_to_json

        return {"value": self.value, "upper": self.upper,
                "x1": element_to_json(self.x1), "x2": element_to_json(self.x2)}


@dataclasses.dataclass
class RegularityReport:
    """Normality lower bound and generation upper bound at one level, with witnesses."""

    level: int
    normality_lower_bound: float
    normality_witness: dict
    generation_upper_bound: float
    generation_witness: dict
    seed: int
    budget: int
    variant: str = "strong (eps = 0)"

    def to_json(self) -> dict:
        return st._jsonable(dataclasses.asdict(self))


def _hermitian(x: LeveledElement, rtol=1e-9) -> bool:
    return st._hermitian_defect(x) <= rtol * (1 + float(np.max(np.abs(x.coeffs), initial=0)))


def make_block(x1, x, x2) -> LeveledElement:
    return assemble_blocks(x1, x, adjoint(x), x2)


def verify_witness(S: st.MatricialStructure, x: LeveledElement, w: BlockWitness, rtol=1e-12) -> dict:
    """Re-check cone membership of the block and both diagonals, and the stored value."""
    block = st.cone_member(S, w.block)
    d1 = st.cone_member(S, w.x1)
    d2 = st.cone_member(S, w.x2)
    value = max(st.level_norm(S, w.x1).value, st.level_norm(S, w.x2).value)
    same_block = w.block.allclose(make_block(w.x1, x, w.x2), atol=1e-12)
    ok_value = abs(value - w.value) <= rtol * max(1.0, abs(value)) + 1e-12
    return {"block": block.member, "x1": d1.member, "x2": d2.member, "value": ok_value,
            "consistent": same_block, "pass": bool(block.member and d1.member and d2.member
                                                  and ok_value and same_block)}


def _witness(S, x, x1, x2) -> BlockWitness:
    e1, e2 = st.level_norm(S, x1), st.level_norm(S, x2)
    return BlockWitness(x1, x2, max(e1.value, e2.value), make_block(x1, x, x2), max(e1.upper, e2.upper))


_SDP_OPTIONS = {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10, "max_iter": 400}


def _solve(problem):
    """Solve with CLARABEL; near-optimal "inaccurate" solutions are accepted because
    every SDP output is shifted to exact feasibility and re-verified afterwards."""
    import cvxpy as cp

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="Solution may be inaccurate")
        # emitted by cvxpy's own complex-to-real reduction for real scalar variables
        warnings.filterwarnings("ignore", message="Initializing a Constant with a nested list")
        problem.solve(solver=cp.CLARABEL, **_SDP_OPTIONS)


# --- generation: Schatten kinds -------------------------------------------------------------


def _dominate(R: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Shift ``Y`` by the smallest multiple of the identity making ``Y ≥ ±R`` numerically safe."""
    lam = min(np.linalg.eigvalsh(Y - R)[0], np.linalg.eigvalsh(Y + R)[0])
    shift = max(-lam, 0.0) + 1e-14 * max(1.0, float(np.abs(R).max()))
    return Y + shift * np.eye(len(Y))


def _sdp_trace_witness(R: np.ndarray, n: int, m: int) -> np.ndarray:
    """``min λ_max(Tr_m y)`` subject to ``y ≥ ±R``, solved as an SDP."""
    import cvxpy as cp

    N = n * m
    y = cp.Variable((N, N), hermitian=True)
    t = cp.Variable()
    Rc = (R + R.conj().T) / 2
    constraints = [y - Rc >> 0, y + Rc >> 0, t * np.eye(n) - cp.partial_trace(y, [n, m], axis=1) >> 0]
    problem = cp.Problem(cp.Minimize(t), constraints)
    _solve(problem)
    if y.value is None:
        raise NoWitnessFoundError(f"trace witness SDP failed: {problem.status}")
    Y = np.asarray(y.value)
    return _dominate(Rc, (Y + Y.conj().T) / 2)


def _weighted_sqrt_witness(S, x: LeveledElement, R: np.ndarray) -> np.ndarray:
    """``y = K^{-1/2} |K^{1/2} R K^{1/2}| K^{-1/2}`` with ``K`` from the optimal one-sided weight.

    For the optimal ``a`` of ``‖(a⊗I)R(a*⊗I)‖_p`` set ``Z = (a⊗I)R(a*⊗I)`` and
    ``K = (a*⊗I)|Z|^{p-1}(a⊗I)``. Then ``y ≥ ±R`` holds by construction and
    ``α(y)`` matches ``α(x)`` at the optimum.
    """
    m, p = S.base.m, S.base.p
    _, a = st.schatten_weight(S, x)
    A = np.kron(a, np.eye(m))
    Z = A @ R @ A.conj().T
    w, V = np.linalg.eigh((Z + Z.conj().T) / 2)
    s = np.abs(w)
    W = (V * (s / s.max()) ** (p - 1)) @ V.conj().T
    K = A.conj().T @ W @ A
    K = (K + K.conj().T) / 2
    kw, kV = np.linalg.eigh(K)
    kw = np.maximum(kw, kw.max() * 1e-12)
    Kh = (kV * np.sqrt(kw)) @ kV.conj().T
    Kih = (kV / np.sqrt(kw)) @ kV.conj().T
    Y = Kih @ abs_hermitian(Kh @ R @ Kh) @ Kih
    return _dominate(R, (Y + Y.conj().T) / 2)


def _schatten_hermitian_dominant(S, x: LeveledElement) -> LeveledElement:
    """A cone member ``y ≥ ±x`` for hermitian ``x`` over a Schatten kind."""
    R = realign_schatten(x)
    R = (R + R.conj().T) / 2
    n, m, p = x.level, S.base.m, S.base.p
    if math.isinf(p) or n == 1:
        Y = abs_hermitian(R)
    elif p == 1:
        Y = _sdp_trace_witness(R, n, m)
    else:
        candidates = [_weighted_sqrt_witness(S, x, R), abs_hermitian(R)]
        Y = min(candidates, key=lambda C: st.level_norm(S, unrealign_schatten(C, n)).value)
    return unrealign_schatten(Y, n)


def closed_form_sqrt_witness(S: st.MatricialStructure, x: LeveledElement) -> BlockWitness:
    """``x₁ = (AA*)^{1/2}``, ``x₂ = (A*A)^{1/2}`` on the realignment ``A`` of ``x``.

    Exact (value ``= ‖A‖_∞``) for the matrix-system kind; a valid but in
    general suboptimal witness for finite ``p``.
    """
    st._require(S, st.SCHATTEN, st.MATRIX_SYSTEM)
    A = realign_schatten(x)
    n = x.level
    x1 = unrealign_schatten(psd_sqrt(A @ A.conj().T), n)
    x2 = unrealign_schatten(psd_sqrt(A.conj().T @ A), n)
    return _witness(S, x, x1, x2)


# --- generation: lattice / custom kinds --------------------------------------------------


def _coordinate_dominant(S, x: LeveledElement) -> LeveledElement:
    """``Σ_k |A_k| ⊗ g_k`` for ``x = Σ_k A_k ⊗ g_k`` over independent cone generators."""
    X = S.base
    if st._generator_rank(X) != X.cone_generators.shape[0]:
        raise NoWitnessFoundError("dependent cone generators: no closed-form witness")
    A, residual = st.max_decomposition(X, x)
    if residual > 1e-9 * (1 + float(np.max(np.abs(x.coeffs), initial=0))):
        raise NoWitnessFoundError("element is outside the span of the cone generators")
    Y = np.einsum("kij,kd->ijd", np.array([abs_hermitian((a + a.conj().T) / 2) for a in A]),
                  X.cone_generators)
    return X.element(Y)


def _lattice_l1_sdp_dominant(S, x: LeveledElement) -> LeveledElement:
    """For MIN over weighted ℓ_1: ``min λ_max(Σ w_k Y_k)`` subject to ``Y_k ≥ ±X_k``."""
    import cvxpy as cp

    X = S.base
    n = x.level
    mats = [(M + M.conj().T) / 2 for M in x.coordinate_matrices()]
    Ys = [cp.Variable((n, n), hermitian=True) for _ in mats]
    t = cp.Variable()
    w = X.weight_array
    cons = []
    for Y, M in zip(Ys, mats):
        cons += [Y - M >> 0, Y + M >> 0]
    cons.append(t * np.eye(n) - sum(w[k] * Ys[k] for k in range(len(Ys))) >> 0)
    _solve(cp.Problem(cp.Minimize(t), cons))
    if any(Y.value is None for Y in Ys):
        raise NoWitnessFoundError("lattice witness SDP failed")
    coeffs = np.stack([_dominate(M, (np.asarray(Y.value) + np.asarray(Y.value).conj().T) / 2)
                       for Y, M in zip(Ys, mats)], axis=-1)
    return X.element(coeffs)


def _max_lattice_witness(S, x: LeveledElement):
    """MAX over a lattice: from the best factorization ``x = Σ_r A_r ⊗ y_r`` write
    ``x = a·diag(z)·b*`` and set ``u₁ = Σ_t a_t a_t* ⊗ |z_t|``, ``u₂ = Σ_t b_t b_t* ⊗ |z_t|``.

    The block ``[[u₁, x], [x*, u₂]]`` is a sum of ``PSD ⊗ e_k`` terms, and both
    diagonals have MAX norm at most the factorization value.
    """
    X = S.base
    n = x.level
    _, A_list, Y = max_factorization(S, x)
    u1 = np.zeros((n, n, X.dim), dtype=complex)
    u2 = np.zeros((n, n, X.dim), dtype=complex)
    for A, y in zip(A_list, Y):
        ny = sp.base_norm(X, y)
        if ny == 0:
            continue
        P, sig, Qh = np.linalg.svd(A)
        absz = np.abs(y) / ny
        u1 += np.einsum("ij,d->ijd", ny * (P * sig) @ P.conj().T, absz)
        u2 += np.einsum("ij,d->ijd", ny * (Qh.conj().T * sig) @ Qh, absz)
    return X.element(u1), X.element(u2)


def generation_witness(S: st.MatricialStructure, x: LeveledElement, eps: float = 0.0) -> BlockWitness:
    """A block witness for ``x``.

    * cone members: ``(x, x)``; zero: ``(0, 0)``;
    * matrix systems: the closed-form square-root witness (exact);
    * Schatten ``p < ∞``: a dominant ``y ≥ ±x`` from the weighted square-root
      construction, or from an SDP at ``p = 1``;
    * MIN over lattices: ``Σ|X_k| ⊗ e_k`` (optimal for ℓ_∞), refined by an SDP for ℓ_1;
    * MAX over lattices: the partition construction ``u_i = Σ a_t a_t* ⊗ |z_t|``.

    Non-hermitian inputs are handled through the hermitian dilation
    ``[[0, x], [x*, 0]]`` at level ``2n``.
    """
    st._check_element(S, x)
    n = x.level
    if not np.any(x.coeffs):
        z = S.base.zeros(n)
        return _witness(S, x, z, z)
    herm = _hermitian(x)
    if herm and st.cone_member(S, x).member:
        return _witness(S, x, x, x)
    if S.kind == st.MATRIX_SYSTEM:
        return closed_form_sqrt_witness(S, x)
    if S.kind == st.MAX and S.base.model == sp.LATTICE:
        x1, x2 = _max_lattice_witness(S, x)
        return _witness(S, x, x1, x2)
    if not herm:
        zero = S.base.zeros(n)
        dil = assemble_blocks(zero, x, adjoint(x), zero)
        y = _hermitian_dominant(S, dil)
        y11, _, _, y22 = split_blocks(y)
        return _witness(S, x, y11, y22)
    y = _hermitian_dominant(S, x)
    return _witness(S, x, y, y)


def _hermitian_dominant(S, x: LeveledElement) -> LeveledElement:
    if S.kind in (st.SCHATTEN, st.MATRIX_SYSTEM):
        return _schatten_hermitian_dominant(S, x)
    X = S.base
    if X.model == sp.SCHATTEN:
        # MIN/MAX over a Schatten base: |R| ⊗-decomposes into separable pieces only in
        # special cases; fall back on the identity-shifted realignment.
        R = realign_schatten(x)
        n, m = x.level, X.m
        c = float(np.linalg.norm(R, 2))
        return unrealign_schatten(c * np.eye(n * m), n)
    if S.kind == st.MIN and X.model == sp.LATTICE and X.p == 1:
        return _lattice_l1_sdp_dominant(S, x)
    return _coordinate_dominant(S, x)


# --- MAX / MIN niceness ----------------------------------------------------------------------


@dataclasses.dataclass
class MaxNiceDecomposition:
    """``v = Σ_k ξ_k η̄_k x_k`` with ``x_k ∈ X⁺``."""

    parts: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    residual: float
    norm_xi_sum: float
    norm_eta_sum: float


def max_nice_decompose(X: sp.BaseSpace, v, eps: float = 0.0) -> MaxNiceDecomposition:
    """Modulus-phase decomposition ``x_k = |v_k| e_k``, ``ξ_k = ω_k``, ``η_k = 1`` (exact)."""
    if X.model != sp.LATTICE:
        raise ModelMismatchError("max_nice_decompose needs a lattice base")
    v = np.asarray(v, dtype=complex)
    r = np.abs(v)
    omega = np.where(r > 0, v / np.where(r > 0, r, 1), 1.0)
    parts = np.diag(r).astype(complex)
    xi, eta = omega, np.ones_like(omega)
    recon = np.einsum("k,k,kd->d", xi, eta.conj(), parts)
    sum_xi = np.einsum("k,kd->d", np.abs(xi) ** 2, parts)
    sum_eta = np.einsum("k,kd->d", np.abs(eta) ** 2, parts)
    return MaxNiceDecomposition(parts, xi, eta, float(np.max(np.abs(recon - v), initial=0.0)),
                                sp.base_norm(X, sum_xi), sp.base_norm(X, sum_eta))


def _grid_refutes(x, x1, x2, grid=64) -> bool:
    """Is ``t²x₁ + s²x₂ ≥ 2ts Re(ωx)`` violated at some grid point (coordinatewise)?"""
    ts = np.geomspace(1e-3, 1e3, grid)
    thetas = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    # with s = 1 (homogeneity): t² x₁ + x₂ ≥ 2t Re(ω x)
    for t in ts:
        worst = 2 * t * np.abs(x) - t * t * x1 - x2
        if np.any(worst > 1e-12 * (1 + t * t)):
            rhs = np.max([2 * t * np.real(np.exp(1j * th) * x) for th in thetas], axis=0)
            if np.any(rhs - t * t * x1 - x2 > 1e-12 * (1 + t * t)):
                return True
    # exact stationary point t² = √(x₂/x₁) per coordinate
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(len(x)):
            if x1[k] > 0 and x2[k] > 0:
                t = (x2[k] / x1[k]) ** 0.25
                if t * t * x1[k] + x2[k] < 2 * t * abs(x[k]) - 1e-12 * (1 + t * t):
                    return True
            elif abs(x[k]) > 1e-15:
                return True
    return False


def min_nice_check(X: sp.BaseSpace, budget: int = 200, seed: int = 0) -> dict:
    """Sample triples with ``|x| ≤ √(x₁x₂)`` and check ``‖x‖ ≤ max(‖x₁‖, ‖x₂‖)``.

    Each triple is validated by the quadratic-family grid and by the exact
    coordinatewise criterion; a deliberately violating triple is included to
    confirm the grid rejects it.
    """
    if X.model != sp.LATTICE:
        raise ModelMismatchError("min_nice_check needs a lattice base")
    rng = np.random.default_rng(seed)
    violations, rejected_ok = [], True
    for t in range(budget):
        x1 = rng.exponential(size=X.dim)
        x2 = rng.exponential(size=X.dim)
        if t == 0:
            x = random_complex(rng, X.dim)
            x1 = x2 = np.abs(x)
        else:
            x = np.sqrt(x1 * x2) * rng.uniform(0, 1, X.dim) * np.exp(2j * np.pi * rng.random(X.dim))
        if _grid_refutes(x, x1, x2) or np.any(np.abs(x) > np.sqrt(x1 * x2) * (1 + 1e-12)):
            violations.append({"trial": t, "reason": "sample fails the criterion"})
            continue
        nx = sp.base_norm(X, x)
        bound = max(sp.base_norm(X, x1), sp.base_norm(X, x2))
        if nx > bound * (1 + 1e-12):
            violations.append({"trial": t, "norm": nx, "bound": bound})
    bad_x1 = np.ones(X.dim)
    bad_x2 = np.ones(X.dim)
    bad_x = np.zeros(X.dim, dtype=complex)
    bad_x[0] = 1.5
    rejected_ok = _grid_refutes(bad_x, bad_x1, bad_x2)
    return {"trials": budget, "violations": violations, "violating_triple_rejected": rejected_ok,
            "pass": not violations and rejected_ok, "seed": seed}


# --- normality probe -------------------------------------------------------------------------


def _positive_block_sample(S: st.MatricialStructure, n: int, rng, t: int) -> LeveledElement:
    """A random cone member at level ``2n`` (several shapes, chosen by trial index)."""
    X = S.base
    N = 2 * n
    if S.kind in (st.SCHATTEN, st.MATRIX_SYSTEM):
        m = X.m
        shape = t % 4
        if shape == 0:
            B = random_psd(rng, N * m, 1)
        elif shape == 1:
            H = random_hermitian(rng, N * m)
            B = psd_sqrt(H @ H)
        elif shape == 2:
            B = random_psd(rng, N * m, int(rng.integers(1, N * m + 1)))
        else:
            # [[y, y], [y, y]] : off-diagonal equals diagonals
            y = random_psd(rng, n * m, int(rng.integers(1, n * m + 1)))
            y = unrealign_schatten(y, n)
            return assemble_blocks(y, y, y, y)
        return unrealign_schatten(B, N)
    if t % 4 == 3:
        y = st.random_cone_member(S, n, rng)
        return assemble_blocks(y, y, y, y)
    rank = 1 if t % 2 == 0 else None
    return st.random_cone_member(S, N, rng, rank=rank)


def normality_probe(S: st.MatricialStructure, n: int, budget: int = 1000, seed: int = 0,
                    samples=None) -> dict:
    """Largest ``α(u) / sqrt(α(u₁) α(u₂))`` over sampled positive blocks ``[[u₁,u],[u*,u₂]]``.

    Rescaling ``(u₁, u₂) → (t u₁, u₂/t)`` keeps the block positive, so the
    ratio with the geometric mean is the best constant witnessed by the
    sample's orbit; the maximum is a lower bound on the normality constant.
    ``certified`` uses lower/upper bracket ends instead of point estimates.
    """
    rng = np.random.default_rng(seed)
    best, best_cert, witness = 0.0, 0.0, None
    blocks = samples if samples is not None else (_positive_block_sample(S, n, rng, t) for t in range(budget))
    count = 0
    for t, B in enumerate(blocks):
        count += 1
        u1, u, _, u2 = split_blocks(B)
        e, e1, e2 = st.level_norm(S, u), st.level_norm(S, u1), st.level_norm(S, u2)
        denom = math.sqrt(e1.value * e2.value)
        if denom <= 1e-14 * max(1.0, e.value):
            continue
        ratio = e.value / denom
        cert = e.lower / math.sqrt(e1.upper * e2.upper)
        best_cert = max(best_cert, cert)
        if ratio > best:
            best, witness = ratio, {"trial": t, "u": u, "u1": u1, "u2": u2,
                                    "alpha_u": e.value, "alpha_u1": e1.value, "alpha_u2": e2.value}
    return {"level": n, "bound": best, "certified_bound": best_cert, "witness": witness,
            "samples": count, "seed": seed}


def generation_probe(S: st.MatricialStructure, n: int, budget: int = 50, seed: int = 0) -> dict:
    """Worst ``witness.value / α(x)`` over random hermitian ``x`` (generation upper bound)."""
    rng = np.random.default_rng(seed)
    worst, worst_case = 0.0, None
    for t in range(budget):
        x = st.random_element(S, n, rng, hermitian=True)
        w = generation_witness(S, x)
        a = st.level_norm(S, x).value
        ratio = w.value / a if a > 0 else 0.0
        if ratio > worst:
            worst, worst_case = ratio, {"trial": t, "x": x, "witness_value": w.value, "alpha": a}
    return {"level": n, "bound": worst, "witness": worst_case, "samples": budget, "seed": seed}


def regularity_report(S: st.MatricialStructure, n: int, budget: int = 200, seed: int = 0) -> RegularityReport:
    norm = normality_probe(S, n, budget, seed)
    gen = generation_probe(S, n, max(1, budget // 10), seed)
    return RegularityReport(n, norm["bound"], norm["witness"], gen["bound"], gen["witness"], seed, budget)


# --- cbc / cb comparison ---------------------------------------------------------------------


def apply_linear(L: np.ndarray, x: LeveledElement, target: sp.BaseSpace) -> LeveledElement:
    """Levelwise application of a linear map given by its matrix ``L`` (``d_Y × d_X``)."""
    return target.element(np.einsum("ed,ijd->ije", L, x.coeffs))


def cbc_cb_compare(S_from: st.MatricialStructure, S_to: st.MatricialStructure, L, n_max: int = 2,
                   budget: int = 100, seed: int = 0, C1: float = 1.0, C2: float = 1.0) -> dict:
    """Estimate ``‖L‖_cbc`` and ``‖L‖_cb`` on shared samples and check ``cbc ≤ cb ≤ C₁C₂ cbc``."""
    rng = np.random.default_rng(seed)
    L = np.asarray(L)
    cbc = cb = 0.0
    for n in range(1, n_max + 1):
        members = []
        if S_from.kind in (st.SCHATTEN, st.MATRIX_SYSTEM) and n >= 2:
            m = S_from.base.m
            k = min(n, m)
            psi = np.zeros(n * m)
            for i in range(k):
                psi[i * m + i] = 1.0
            members.append(unrealign_schatten(np.outer(psi, psi), n))
        members += [st.random_cone_member(S_from, n, rng, rank=1 if t % 2 else None) for t in range(budget)]
        for x in members:
            y = apply_linear(L, x, S_to.base)
            v = st.cone_member(S_to, y)
            if v.member is False:
                raise NotCompletelyPositiveError(f"a level-{n} cone member maps outside the target cone",
                                                 witness={"level": n, "x": x, "image": y,
                                                          "certificate": v.certificate})
            a = st.level_norm(S_from, x).value
            if a > 0:
                r = st.level_norm(S_to, y).value / a
                cbc, cb = max(cbc, r), max(cb, r)
        for _ in range(budget):
            x = st.random_element(S_from, n, rng)
            a = st.level_norm(S_from, x).value
            if a > 0:
                cb = max(cb, st.level_norm(S_to, apply_linear(L, x, S_to.base)).value / a)
    ok = cbc <= cb * (1 + 1e-9) and cb <= C1 * C2 * cbc * (1 + 1e-6) + 1e-12
    return {"cbc": cbc, "cb": cb, "C1": C1, "C2": C2, "pass": ok, "seed": seed}


# --- AM obstruction --------------------------------------------------------------------------


def _signed_permutations(N: int):
    for perm in itertools.permutations(range(N)):
        for signs in itertools.product((1.0, -1.0), repeat=N):
            U = np.zeros((N, N))
            U[np.arange(N), perm] = signs
            yield U


def _is_symmetric_orthogonal(U, tol=1e-12) -> bool:
    return (np.allclose(U, U.T, atol=tol) and np.allclose(U @ U.T, np.eye(len(U)), atol=tol))


def symmetric_orthogonal_family(n: int, N: int, seed: int = 0):
    """``n`` symmetric orthogonal ``N×N`` matrices with ``tr(U_i U_j) = 0`` for ``i ≠ j``.

    Exhaustive search over signed permutations, preferring pairwise
    anticommuting families; random orthogonal conjugation of the best partial
    family is tried next. Returns ``(family, anticommuting)``.
    """
    cands = []
    if N <= 5:
        cands = [U for U in _signed_permutations(N) if _is_symmetric_orthogonal(U)]
    cands.sort(key=lambda U: abs(np.trace(U)))

    def search(prefix, start, relation):
        if len(prefix) == n:
            return prefix
        for idx in range(start, len(cands)):
            U = cands[idx]
            if all(relation(U, V) for V in prefix):
                got = search(prefix + [U], idx + 1, relation)
                if got is not None:
                    return got
        return None

    anti = lambda U, V: np.allclose(U @ V + V @ U, 0)
    orth = lambda U, V: abs(np.trace(U @ V.T)) < 1e-12
    fam = search([], 0, anti) if cands else None
    if fam is not None:
        return fam, True
    fam = search([], 0, orth) if cands else None
    if fam is not None:
        return fam, False
    raise MatrixFamilyNotFoundError(f"no family of {n} trace-orthogonal symmetric orthogonal {N}x{N} matrices found")


def _circle_average(A: np.ndarray, points: int = 64) -> float:
    """Exact average of ``⟨ξ|A|ξ⟩`` over the unit circle (trapezoid rule, exact for degree-2 trig polynomials)."""
    th = 2 * np.pi * np.arange(points) / points
    xi = np.stack([np.cos(th), np.sin(th)], axis=1)
    return float(np.mean(np.real(np.einsum("ti,ij,tj->t", xi, A, xi))))


def _sphere_average(A: np.ndarray, rng, samples: int = 100_000):
    """Monte-Carlo average of ``⟨ξ|A|ξ⟩`` over the real unit sphere with a Hoeffding margin."""
    xi = rng.standard_normal((samples, len(A)))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    vals = np.real(np.einsum("ti,ij,tj->t", xi, A, xi))
    spread = 2 * float(np.max(np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2))))
    margin = spread * math.sqrt(math.log(2 / 1e-6) / (2 * samples))
    return float(vals.mean()), margin


def am_obstruction(X: sp.BaseSpace, n: int = 2, N: int = 2, budget: int = 50, seed: int = 0) -> dict:
    """Lower bound ``√n / α_N(u)`` on the MIN generation constant of an ℓ_1-type lattice.

    ``u = Σ_i U_i ⊗ e_i/√n`` with symmetric orthogonal, trace-orthogonal
    ``U_i``. For any ``a ≥ ±u`` in the MIN cone, ``E⟨ξ|a|ξ⟩ ≥ Σ_i e_i/√n``
    coordinatewise, hence ``α(a) ≥ √n``. For anticommuting families,
    ``α_N(u) ≤ √2`` is certified; otherwise the MIN bracket's upper end is used.
    """
    if X.model != sp.LATTICE or X.p != 1 or X.dim < n:
        raise ModelMismatchError("am_obstruction needs an ℓ_1 lattice with at least n coordinates")
    rng = np.random.default_rng(seed)
    fam, anticommuting = symmetric_orthogonal_family(n, N, seed)
    w = X.weight_array
    coeffs = np.zeros((N, N, X.dim))
    for i, U in enumerate(fam):
        coeffs[:, :, i] = U / (math.sqrt(n) * w[i])
    u = X.element(coeffs)
    S = st.MatricialStructure(X, st.MIN, seed=seed)
    est = st.min_level_norm_bracket(S, u)
    upper = est.upper
    if anticommuting:
        # ‖Σ f_i U_i‖ ≤ ‖Re f‖₂ + ‖Im f‖₂ ≤ √2 ‖f‖₂ ≤ √(2n) for ‖f‖_∞ ≤ 1
        upper = min(upper, math.sqrt(2.0))
    target = np.zeros(X.dim)
    target[:n] = 1 / (math.sqrt(n) * w[:n])
    checks = []
    for t in range(budget):
        A = []
        for k in range(X.dim):
            Uk = coeffs[:, :, k]
            base = abs_hermitian(Uk) if t % 3 else np.abs(np.linalg.eigvalsh(Uk)).max() * np.eye(N)
            A.append(base + (random_psd(rng, N, int(rng.integers(1, N + 1))) * rng.exponential() if t else 0))
        dom = all(psd_verdict(Ak - coeffs[:, :, k], 1e-12)[0] and psd_verdict(Ak + coeffs[:, :, k], 1e-12)[0]
                  for k, Ak in enumerate(A))
        if N == 2:
            avg = np.array([_circle_average(Ak) for Ak in A])
            margin = 1e-12
        else:
            pairs = [_sphere_average(Ak, rng) for Ak in A]
            avg = np.array([p[0] for p in pairs])
            margin = max(p[1] for p in pairs)
        exact = np.array([np.trace(Ak).real / N for Ak in A])
        ok = dom and np.all(avg >= target - margin) and np.all(exact >= target - 1e-12)
        checks.append({"trial": t, "dominates": bool(dom), "average": avg, "ok": bool(ok)})
    norm_a_lower = sp.base_norm(X, target)
    bound = norm_a_lower / upper
    return {"n": n, "N": N, "family": fam, "anticommuting": anticommuting, "alpha_u_upper": upper,
            "alpha_u_lower": est.lower, "alpha_a_lower": norm_a_lower, "bound": bound,
            "expectation_checks_pass": all(c["ok"] for c in checks), "samples": budget,
            "pass": all(c["ok"] for c in checks) and bound >= math.sqrt(n) / 2 - 1e-12, "seed": seed}
