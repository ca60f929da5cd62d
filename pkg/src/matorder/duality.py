"""Matricial pairing, dual cones and the duality probes.

The pairing of ``x♭`` (level ``n``, over the dual base) with ``x`` (level
``m``) is the ``mn × mn`` matrix with entry ``⟨x♭_kℓ, x_ij⟩`` at row
``(i, k)`` and column ``(j, ℓ)``; the scalar pairing is the bilinear
``Σ_c f_c v_c`` (``tr(f vᵀ)`` for Schatten bases).

Dual cones are decided two ways:

* by routing through the structure identities ``MAX(X)♭ = MIN(X♭)`` and
  ``MIN(X)♭ = MAX(X♭)``, or realigned positivity for Schatten kinds;
* independently, by pairing with the extreme rays of the primal cone
  (``PSD ⊗ generator`` tensors) and with sampled primal members.
"""

from __future__ import annotations

import math

import numpy as np

from . import regularity as rg
from . import spaces as sp
from . import structures as st
from .errors import DimensionMismatchError, KindMismatchError
from .linalg import (
    LeveledElement,
    adjoint,
    flip_conjugate,
    psd_verdict,
    random_complex,
    random_psd,
    realign_schatten,
    split_blocks,
    unrealign_schatten,
)


ConeVerdict = st.ConeVerdict


def pairing(x_flat: LeveledElement, x: LeveledElement) -> np.ndarray:
    """``⟨⟨x♭, x⟩⟩``: entry ``⟨x♭_kℓ, x_ij⟩`` at row ``(i, k)``, column ``(j, ℓ)``."""
    if x_flat.base_dim != x.base_dim:
        raise DimensionMismatchError(f"base dimensions differ: {x_flat.base_dim} vs {x.base_dim}")
    n, m = x_flat.level, x.level
    return np.einsum("kld,ijd->ikjl", x_flat.coeffs, x.coeffs).reshape(m * n, m * n)


def _check_dual_element(S: st.MatricialStructure, x_flat: LeveledElement) -> sp.BaseSpace:
    D = sp.dual_space(S.base)
    if x_flat.base_dim != D.dim or x_flat.involution != D.involution:
        raise KindMismatchError("dual element does not live over the dual base space")
    return D


def dual_cone_member(S: st.MatricialStructure, x_flat: LeveledElement, tol=None) -> ConeVerdict:
    """Exact dual-cone membership.

    MIN/MAX kinds are decided by the exact tester of the dual structure
    (``MAX(X)♭ = MIN(X♭)``, ``MIN(X)♭ = MAX(X♭)``). Schatten kinds use
    ``x♭ ∈ cone ⟺ realign(x♭) ≥ 0``; a non-member comes with a primal member
    ``r`` (realignment ``conj(e) eᵀ`` for the offending eigenvector ``e``) whose
    pairing with ``x♭`` is not PSD.
    """
    _check_dual_element(S, x_flat)
    if S.kind in (st.MIN, st.MAX):
        verdict = st.cone_member(S.dual(), x_flat, tol)
        verdict.certificate = {**verdict.certificate, "route": f"dual structure {S.dual().kind}"}
        return verdict
    R = realign_schatten(x_flat)
    tol_abs = st._resolve_tol(tol, [R])
    ok, lam, vec = psd_verdict(R, tol_abs)
    if ok:
        return st.ConeVerdict(True, {"type": "psd_realignment", "min_eig": lam, "route": "realignment"}, tol_abs)
    if vec is None:
        return st._non_hermitian_verdict(x_flat, tol_abs)
    n = x_flat.level
    r = unrealign_schatten(np.outer(vec.conj(), vec), n)
    c = np.eye(n).ravel()
    value = float(np.real(c @ pairing(x_flat, r) @ c))
    return st.ConeVerdict(False, {"type": "primal_member", "primal": r, "vector": c, "value": value,
                                  "min_eig": lam, "route": "realignment"}, tol_abs)


def _primal_extreme_rays_exact(S: st.MatricialStructure) -> bool:
    """Are the primal level cones generated by ``PSD ⊗ g_k`` for the known generators?"""
    if S.kind == st.MAX:
        return S.base.model != sp.SCHATTEN
    return S.kind == st.MIN and S.base.model == sp.LATTICE


def dual_cone_member_by_pairing(S: st.MatricialStructure, x_flat: LeveledElement, tol=None,
                                samples: int = 500, seed: int = 0) -> ConeVerdict:
    """Dual-cone test through pairings with primal cone members at level ``n``.

    When the primal cone is generated by ``PSD ⊗ g_k`` (MAX over lattice or
    custom bases; MIN over lattices) the pairings with the level-1 generators
    decide exactly: ``⟨⟨P⊗g, x♭⟩⟩ = P ⊗ (⟨x♭_kℓ, g⟩)``. For Schatten kinds the
    flip-conjugated matrix decides exactly. Otherwise primal members are
    sampled and the verdict is non-member or UNDECIDED.
    """
    _check_dual_element(S, x_flat)
    n = x_flat.level
    X = S.base
    if S.kind in (st.SCHATTEN, st.MATRIX_SYSTEM):
        Fm = flip_conjugate(x_flat)
        tol_abs = st._resolve_tol(tol, [Fm])
        ok, lam, vec = psd_verdict(Fm, tol_abs)
        return st.ConeVerdict(bool(ok), {"type": "flip_conjugate", "min_eig": lam}, tol_abs)
    if _primal_extreme_rays_exact(S):
        mats = [pairing(x_flat, X.element(g.reshape(1, 1, -1))) for g in X.cone_generators]
        tol_abs = st._resolve_tol(tol, mats)
        worst = math.inf
        for k, M in enumerate(mats):
            ok, lam, vec = psd_verdict(M, tol_abs)
            worst = min(worst, lam)
            if not ok:
                return st.ConeVerdict(False, {"type": "generator_pairing", "generator": X.cone_generators[k],
                                              "vector": vec, "value": lam}, tol_abs)
        return st.ConeVerdict(True, {"type": "generator_pairings_psd", "min_eig": worst}, tol_abs)
    rng = np.random.default_rng(seed)
    tol_abs = 0.0 if tol is None else float(tol)
    for t in range(samples):
        x = st.random_cone_member(S, n, rng, rank=1 if t % 2 else None)
        P = pairing(x_flat, x)
        t_abs = st._resolve_tol(tol, [P])
        ok, lam, vec = psd_verdict(P, t_abs)
        if not ok:
            return st.ConeVerdict(False, {"type": "sampled_primal", "primal": x, "vector": vec, "value": lam}, t_abs)
        tol_abs = max(tol_abs, t_abs)
    return st.ConeVerdict(st.UNDECIDED, {"type": "sampling_exhausted", "samples": samples}, tol_abs)


def random_dual_element(S: st.MatricialStructure, n: int, rng, hermitian: bool = True) -> LeveledElement:
    D = sp.dual_space(S.base)
    x = D.element(random_complex(rng, (n, n, D.dim)))
    if D.model == sp.CUSTOM:
        x = x.with_coeffs(x.coeffs.real)
    if hermitian:
        x = (x + adjoint(x)) * 0.5
    return x


# --- products lemma -------------------------------------------------------------------------


def assembled_pairing(u1, u, u2, v1, v, v2) -> np.ndarray:
    """``[[⟨⟨v₁,u₁⟩⟩, ⟨⟨v,u⟩⟩], [⟨⟨v,u⟩⟩*, ⟨⟨v₂,u₂⟩⟩]]`` for primal blocks ``u`` and dual blocks ``v``."""
    P = pairing(v, u)
    return np.block([[pairing(v1, u1), P], [P.conj().T, pairing(v2, u2)]])


def _schatten_block_pair(rng, n, m, m_dual_level):
    N = 2 * n
    B = random_psd(rng, N * m, int(rng.integers(1, N * m + 1)))
    Bd = random_psd(rng, 2 * m_dual_level * m, int(rng.integers(1, 2 * m_dual_level * m + 1)))
    B /= np.linalg.norm(B, 2)
    Bd /= np.linalg.norm(Bd, 2)
    return unrealign_schatten(B, N), unrealign_schatten(Bd, 2 * m_dual_level)


def products_check(budget: int = 300, seed: int = 0, tol: float = 1e-8) -> dict:
    """Assembled pairing blocks of block-positive primal/dual pairs are PSD.

    Samples alternate between Schatten bases (natural cones, PSD squares) and
    lattices (coordinatewise PSD blocks, MIN = MAX cones), with zero
    off-diagonal and elementary-tensor cases included.
    """
    rng = np.random.default_rng(seed)
    worst, failures = math.inf, []
    for t in range(budget):
        n = int(rng.integers(1, 3))
        k = int(rng.integers(1, 3))
        if t % 2 == 0:
            m = int(rng.integers(1, 3))
            B, Bd = _schatten_block_pair(rng, n, m, k)
        else:
            X = sp.lattice([1, 2, math.inf][t % 3], int(rng.integers(1, 4)))
            S = st.MatricialStructure(X, st.MIN)
            Sd = S.dual()
            B = st.random_cone_member(S, 2 * n, rng)
            Bd = st.random_cone_member(Sd, 2 * k, rng)
            B = B * (1 / max(1e-12, np.abs(B.coeffs).max()))
            Bd = Bd * (1 / max(1e-12, np.abs(Bd.coeffs).max()))
        if t % 50 == 13:
            # elementary tensors: PSD ⊗ generator on both sides
            X = sp.lattice(2, 2)
            B = X.element(np.einsum("ij,d->ijd", random_psd(rng, 2 * n, 1), [1.0, 0.0]))
            Bd = X.element(np.einsum("ij,d->ijd", random_psd(rng, 2 * k, 1), [1.0, 0.0]))
        u1, u, _, u2 = split_blocks(B)
        v1, v, _, v2 = split_blocks(Bd)
        if t % 50 == 7:
            u = u * 0.0
        M = assembled_pairing(u1, u, u2, v1, v, v2)
        lam = float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])
        worst = min(worst, lam)
        if lam < -tol:
            failures.append({"trial": t, "min_eig": lam})
    return {"trials": budget, "min_eig": worst, "failures": failures, "pass": not failures,
            "tol": tol, "seed": seed}


# --- generation / normality duality -----------------------------------------------------------


def _exactness(S: st.MatricialStructure) -> str:
    X = S.base
    if S.kind == st.MATRIX_SYSTEM:
        return "exact"
    if S.kind == st.MIN and X.model == sp.LATTICE and math.isinf(X.p):
        return "exact"
    return "bracketed"


def gen_normal_duality_probe(S: st.MatricialStructure, n: int = 2, budget: int = 100, seed: int = 0,
                             C: float = 1.0, tol: float = 1e-6) -> dict:
    """Normality and generation of the dual structure at constant ``C``.

    The normality probe on ``S♭`` must stay below ``C + tol``; generation
    witnesses on ``S♭`` must satisfy ``value ≤ C α(x) + tol`` where ``α(x)``
    is the upper end of the bracket. The report records which side is exact.
    """
    D = S.dual()
    norm = rg.normality_probe(D, n, budget, seed)
    rng = np.random.default_rng(seed)
    worst, cases = 0.0, []
    for t in range(max(1, budget // 10)):
        x = st.random_element(D, n, rng, hermitian=True)
        w = rg.generation_witness(D, x)
        a = st.level_norm(D, x)
        if a.upper > 0:
            ratio = w.value / a.upper
            worst = max(worst, ratio)
            if w.value > C * a.upper * (1 + tol) + tol:
                cases.append({"trial": t, "x": x, "witness": w.to_json(), "alpha": a.to_json()})
    ok_norm = norm["bound"] <= C + tol
    return {
        "dual_kind": D.kind, "dual_base": sp.to_json(D.base),
        "primal_side": _exactness(S), "dual_side": _exactness(D),
        "normality_bound": norm["bound"], "normality_pass": ok_norm,
        "generation_ratio": worst, "generation_failures": st._jsonable(cases),
        "pass": ok_norm and not cases, "seed": seed, "budget": budget,
    }
