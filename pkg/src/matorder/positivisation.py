"""The positivised semi-norm ``α⁺`` as a two-sided bracket.

``α⁺_n(x) = inf{ max(α_n(x₁), α_n(x₂)) : [[x₁, x], [x*, x₂]] positive }``.
The infimum is approached from above by verified completions (the generation
witness, balanced rescaling and, where the cone and norm are
SDP-representable, a direct semidefinite program) and from below by
completely positive evaluations: for a positive ``g`` the scalar blocks
``(⟨g, ·⟩)`` of a positive completion form a PSD matrix, so
``‖(⟨g, x_ij⟩)‖ ≤ ‖g‖♭ max(α(x₁), α(x₂))``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import regularity as rg
from . import spaces as sp
from . import structures as st
from .errors import InfeasibleError, NoWitnessFoundError
from .linalg import (
    LeveledElement,
    compress,
    direct_sum,
    random_complex,
    realign_schatten,
    split_blocks,
    unrealign_schatten,
)


@dataclasses.dataclass
class PositivisationResult:
    """``value_lower ≤ α⁺_n(x) ≤ value_upper`` with the completion achieving ``value_upper``."""

    value_upper: float
    value_lower: float
    completion: rg.BlockWitness | None
    undecided: bool = False

    def to_json(self) -> dict:
        return {"value_upper": self.value_upper, "value_lower": self.value_lower,
                "undecided": self.undecided,
                "completion": None if self.completion is None else self.completion.to_json()}


# --- upper bound: completions ----------------------------------------------------------------


def _balanced(S, x, w: rg.BlockWitness) -> rg.BlockWitness:
    """Rescale ``(x₁, x₂) → (t x₁, x₂/t)`` to equalize the diagonal norms."""
    a1, a2 = st.level_norm(S, w.x1).value, st.level_norm(S, w.x2).value
    if a1 <= 0 or a2 <= 0 or math.isclose(a1, a2, rel_tol=1e-12):
        return w
    t = math.sqrt(a2 / a1)
    return rg._witness(S, x, w.x1 * t, w.x2 * (1 / t))


def _sdp_completion(S: st.MatricialStructure, x: LeveledElement):
    """Optimal completion by SDP when cone and norm are SDP-representable; ``None`` otherwise."""
    if S.norm_override is not None:
        return None
    import cvxpy as cp

    X = S.base
    n = x.level
    if S.kind in (st.SCHATTEN, st.MATRIX_SYSTEM) and (math.isinf(X.p) or X.p == 1):
        m = X.m
        R = realign_schatten(x)
        Y1 = cp.Variable((n * m, n * m), hermitian=True)
        Y2 = cp.Variable((n * m, n * m), hermitian=True)
        t = cp.Variable()
        block = cp.bmat([[Y1, cp.Constant(R)], [cp.Constant(R.conj().T), Y2]])
        cons = [block >> 0]
        if math.isinf(X.p):
            cons += [t * np.eye(n * m) - Y1 >> 0, t * np.eye(n * m) - Y2 >> 0]
        else:
            cons += [t * np.eye(n) - cp.partial_trace(Y1, [n, m], axis=1) >> 0,
                     t * np.eye(n) - cp.partial_trace(Y2, [n, m], axis=1) >> 0]
        rg._solve(cp.Problem(cp.Minimize(t), cons))
        if Y1.value is None:
            return None
        Ys = [np.asarray(Y.value) for Y in (Y1, Y2)]
        B = np.block([[Ys[0], R], [R.conj().T, Ys[1]]])
        B = (B + B.conj().T) / 2
        shift = max(-np.linalg.eigvalsh(B)[0], 0.0) + 1e-13 * max(1.0, float(np.abs(R).max()))
        Ys = [(Y + Y.conj().T) / 2 + shift * np.eye(n * m) for Y in Ys]
        return rg._witness(S, x, unrealign_schatten(Ys[0], n), unrealign_schatten(Ys[1], n))
    if X.model == sp.LATTICE and S.kind == st.MIN and (math.isinf(X.p) or X.p == 1):
        w = X.weight_array
        mats = x.coordinate_matrices()
        Y1 = [cp.Variable((n, n), hermitian=True) for _ in mats]
        Y2 = [cp.Variable((n, n), hermitian=True) for _ in mats]
        t = cp.Variable()
        cons = [cp.bmat([[Y1[k], cp.Constant(M)], [cp.Constant(M.conj().T), Y2[k]]]) >> 0
                for k, M in enumerate(mats)]
        for Ys in (Y1, Y2):
            if math.isinf(X.p):
                cons += [t * np.eye(n) - w[k] * Ys[k] >> 0 for k in range(len(mats))]
            else:
                cons.append(t * np.eye(n) - sum(w[k] * Ys[k] for k in range(len(mats))) >> 0)
        rg._solve(cp.Problem(cp.Minimize(t), cons))
        if any(Y.value is None for Y in Y1 + Y2):
            return None
        out = []
        for Ys in (Y1, Y2):
            out.append([(np.asarray(Y.value) + np.asarray(Y.value).conj().T) / 2 for Y in Ys])
        for k, M in enumerate(mats):
            B = np.block([[out[0][k], M], [M.conj().T, out[1][k]]])
            shift = max(-np.linalg.eigvalsh((B + B.conj().T) / 2)[0], 0.0) + 1e-13 * max(1.0, float(np.abs(M).max()))
            out[0][k] = out[0][k] + shift * np.eye(n)
            out[1][k] = out[1][k] + shift * np.eye(n)
        x1 = X.element(np.stack(out[0], axis=-1))
        x2 = X.element(np.stack(out[1], axis=-1))
        return rg._witness(S, x, x1, x2)
    return None


def _verified(S, x, w) -> bool:
    return bool(w is not None and rg.verify_witness(S, x, w)["pass"])


# --- lower bound: positive evaluations ---------------------------------------------------------


def _positive_functionals(S: st.MatricialStructure, rng, count: int):
    X = S.base
    if X.model == sp.SCHATTEN:
        m = X.m
        yield np.eye(m).ravel() / sp.dual_norm(X, np.eye(m).ravel())
        for _ in range(count):
            v = random_complex(rng, m)
            g = np.outer(v, v.conj()).ravel()
            yield g / sp.dual_norm(X, g)
        return
    for f in X.dual_generators:
        yield f / sp.dual_norm(X, f)


def _lower_bound(S: st.MatricialStructure, x: LeveledElement, rng, count: int) -> float:
    best = 0.0
    for g in _positive_functionals(S, rng, count):
        best = max(best, float(np.linalg.norm(st.functional_matrix(x, g), 2)))
    if S.kind == st.MATRIX_SYSTEM and S.norm_override is None:
        # the identity map is completely positive and completely contractive
        best = max(best, float(np.linalg.norm(realign_schatten(x), 2)))
    if S.kind == st.SCHATTEN and S.norm_override is None:
        # Horn–Mathias: for any positive completion and feasible weights (a, b),
        # ‖(a⊗I)R(b⊗I)‖_p² ≤ ‖(a⊗I)R₁(a*⊗I)‖_p ‖(b*⊗I)R₂(b⊗I)‖_p ≤ α(x₁) α(x₂),
        # so every weighted value reached by the ascent bounds α⁺ from below
        best = max(best, st.schatten_level_norm(S, x).lower)
    return best * S.scale


def alpha_plus(S: st.MatricialStructure, x: LeveledElement, budget: int = 50, seed: int = 0) -> PositivisationResult:
    """Bracket ``α⁺_n(x)``; raises :class:`InfeasibleError` when no completion is found."""
    st._check_element(S, x)
    if not np.any(x.coeffs):
        z = S.base.zeros(x.level)
        return PositivisationResult(0.0, 0.0, rg._witness(S, x, z, z))
    rng = np.random.default_rng(seed)
    candidates = []
    try:
        candidates.append(_balanced(S, x, rg.generation_witness(S, x)))
    except NoWitnessFoundError as exc:
        if S.base.model == sp.CUSTOM:
            return PositivisationResult(math.inf, _lower_bound(S, x, rng, budget), None, undecided=True)
        raise InfeasibleError(f"no positive completion found: {exc}") from exc
    if rg._hermitian(x) and st.cone_member(S, x).member:
        candidates.append(rg._witness(S, x, x, x))
    sdp = _sdp_completion(S, x)
    if sdp is not None:
        candidates.append(_balanced(S, x, sdp))
    valid = [w for w in candidates if _verified(S, x, w)]
    if not valid:
        raise InfeasibleError("no candidate completion re-verified")
    best = min(valid, key=lambda w: w.value)
    lower = min(_lower_bound(S, x, rng, budget), best.value)
    return PositivisationResult(best.value, lower, best)


def alpha_plus_evaluator(S: st.MatricialStructure, budget: int = 50, seed: int = 0):
    """``x -> NormEstimate`` built from :func:`alpha_plus`, for use as a norm override."""

    def evaluate(x):
        r = alpha_plus(S, x, budget, seed)
        return st.NormEstimate(r.value_lower / S.scale, r.value_upper / S.scale, False)

    return evaluate


# --- property runners -------------------------------------------------------------------------


def alpha_plus_properties(S: st.MatricialStructure, budget: int = 20, seed: int = 0, level: int = 2,
                          tol: float = 5e-3) -> dict:
    """Ruan axioms, 1-regularity and idempotence of ``α⁺`` on random samples."""
    rng = np.random.default_rng(seed)
    ruan, regular, idem = [], [], []
    nested = S.replace(norm_override=alpha_plus_evaluator(S, seed=seed), scale=1.0)
    for t in range(budget):
        n = int(rng.integers(1, level + 1))
        x = st.random_element(S, n, rng)
        y = st.random_element(S, int(rng.integers(1, level + 1)), rng)
        m = int(rng.integers(1, level + 1))
        a, b = random_complex(rng, (m, n)), random_complex(rng, (m, n))
        px, py = alpha_plus(S, x, seed=seed), alpha_plus(S, y, seed=seed)
        pc = alpha_plus(S, compress(a, x, b), seed=seed)
        bound = np.linalg.norm(a, 2) * np.linalg.norm(b, 2) * px.value_upper
        if pc.value_upper > bound * (1 + tol) + tol:
            ruan.append({"trial": t, "axiom": 1, "lhs": pc.value_upper, "rhs": bound})
        ps = alpha_plus(S, direct_sum(x, y), seed=seed)
        target = max(px.value_upper, py.value_upper)
        if abs(ps.value_upper - target) > tol * max(1.0, target):
            ruan.append({"trial": t, "axiom": 2, "sum": ps.value_upper, "max": target})
        B = rg._positive_block_sample(S, n, rng, t)
        u1, u, _, u2 = split_blocks(B)
        pu = alpha_plus(S, u, seed=seed).value_upper
        pd = max(alpha_plus(S, u1, seed=seed).value_upper, alpha_plus(S, u2, seed=seed).value_upper)
        if pu > pd * (1 + tol) + tol:
            regular.append({"trial": t, "offdiag": pu, "diag": pd})
        again = alpha_plus(nested, x, seed=seed).value_upper
        if abs(again - px.value_upper) > 2 * tol * max(1.0, px.value_upper):
            idem.append({"trial": t, "first": px.value_upper, "second": again})
    return {
        "ruan": {"violations": st._jsonable(ruan), "pass": not ruan},
        "regularity": {"violations": st._jsonable(regular), "pass": not regular},
        "idempotence": {"violations": st._jsonable(idem), "pass": not idem},
        "pass": not (ruan or regular or idem), "trials": budget, "seed": seed, "tol": tol,
    }


def renorm_bounds_check(S: st.MatricialStructure, budget: int = 20, seed: int = 0, C_g: float = 1.0,
                        C_n: float = 1.0, level: int = 2, tol: float = 1e-6) -> dict:
    """Check ``α⁺ ≤ C_g α`` (upper values) and ``α⁺ ≥ α / C_n`` (lower values) on samples,
    plus ``α⁺ ≤ α`` on cone members."""
    rng = np.random.default_rng(seed)
    bad = []
    for t in range(budget):
        n = int(rng.integers(1, level + 1))
        x = st.random_element(S, n, rng)
        r = alpha_plus(S, x, seed=seed)
        a = st.level_norm(S, x)
        if r.value_upper > C_g * a.upper * (1 + tol) + tol:
            bad.append({"trial": t, "side": "upper", "alpha_plus": r.value_upper, "alpha": a.upper})
        if r.value_lower < a.lower / C_n * (1 - tol) - tol:
            bad.append({"trial": t, "side": "lower", "alpha_plus": r.value_lower, "alpha": a.lower})
        c = st.random_cone_member(S, n, rng)
        rc = alpha_plus(S, c, seed=seed)
        if rc.value_upper > st.level_norm(S, c).value * (1 + tol) + tol:
            bad.append({"trial": t, "side": "cone", "alpha_plus": rc.value_upper})
    return {"violations": st._jsonable(bad), "pass": not bad, "C_g": C_g, "C_n": C_n,
            "trials": budget, "seed": seed}
