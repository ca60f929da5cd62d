"""Registry of reproducible experiments, each returning a pass/fail record.

Every experiment is a function ``config -> record`` registered with an anchor
string naming the statement it reproduces. Records have the shape
``{"name", "seed", "bounds", "pass", "anchor", "elapsed"}`` and are
deterministic for a fixed seed (``elapsed`` aside).
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from typing import Callable

import numpy as np

from . import duality as du
from . import positivisation as ps
from . import regularity as rg
from . import spaces as sp
from . import structures as st
from .errors import UnknownExperimentError
from .linalg import (
    random_complex,
    random_psd,
    realign_schatten,
    schatten_norm,
    split_blocks,
    swap_matrix,
    unrealign_schatten,
)


@dataclasses.dataclass(frozen=True)
class Experiment:
    name: str
    anchor: str
    func: Callable


REGISTRY: dict[str, Experiment] = {}


def register(name: str, anchor: str):
    if not anchor:
        raise ValueError("experiments need an anchor string")

    def deco(func):
        REGISTRY[name] = Experiment(name, anchor, func)
        return func

    return deco


def _cfg(config, key, default):
    return (config or {}).get(key, default)


# --- Schatten regularity -----------------------------------------------------------------------


def schatten_structure(p, m=2, restarts=4, seed=0) -> st.MatricialStructure:
    kind = st.MATRIX_SYSTEM if math.isinf(p) else st.SCHATTEN
    return st.MatricialStructure(sp.schatten(p, m), kind, restarts=restarts, seed=seed)


@register("schatten_regularity", "Schatten classes are 1-matricial normal and 1-matricial generating")
def schatten_regularity(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 1000)
    gen_samples = _cfg(config, "generation_samples", 20)
    bounds, ok = {}, True
    for p in (1, 2, math.inf):
        S = schatten_structure(p, seed=seed)
        for n in (1, 2):
            probe = rg.normality_probe(S, n, samples, seed)
            rng = np.random.default_rng(seed + 17)
            worst, sqrt_worst, verified = 0.0, 0.0, True
            for _ in range(gen_samples):
                x = st.random_element(S, n, rng, hermitian=True)
                w = rg.generation_witness(S, x)
                a = st.level_norm(S, x).value
                worst = max(worst, w.value / a)
                sqrt_worst = max(sqrt_worst, rg.closed_form_sqrt_witness(S, x).value / a)
                verified &= rg.verify_witness(S, x, w)["pass"]
            key = f"p={sp._p_to_json(p)},n={n}"
            bounds[key] = {"normality": probe["bound"], "generation": worst,
                           "closed_form_sqrt_generation": sqrt_worst, "witnesses_verified": bool(verified),
                           "samples": probe["samples"]}
            ok &= (0.9 <= probe["bound"] <= 1 + 1e-3 and worst <= 1 + 1e-6 and verified
                   and probe["samples"] >= samples)
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


# --- flip separation ---------------------------------------------------------------------------


def flip_element(m: int = 2, p=2) -> tuple:
    """``F = Σ E_ij ⊗ E_ji`` at level ``m`` over ``S_p^m`` (its realignment is the swap)."""
    X = sp.schatten(p, m)
    return X, unrealign_schatten(swap_matrix(m, m), m)


@register("flip_separation", "the flip lies in the MIN cone but not in the natural or MAX cones")
def flip_separation(config=None):
    seed = _cfg(config, "seed", 0)
    X, F = flip_element(2, _cfg(config, "p", 2))
    vmin = st.cone_member(st.MatricialStructure(X, st.MIN, seed=seed), F)
    vnat = st.cone_member(st.MatricialStructure(X, st.SCHATTEN, seed=seed), F)
    vmax = st.max_cone_member(st.MatricialStructure(X, st.MAX, seed=seed), F, attempts=100)
    min_eig = vnat.certificate.get("min_eig")
    ok = (vmin.member is True and vnat.member is False and abs(min_eig + 1) <= 1e-9
          and vmax.member is False and vmax.certificate.get("attempts", 101) <= 100)
    return {"bounds": {"min": vmin.label, "min_certificate": vmin.certificate["type"],
                       "natural": vnat.label, "natural_min_eig": min_eig,
                       "max": vmax.label, "max_attempts": vmax.certificate.get("attempts")},
            "pass": bool(ok), "seed": seed}


# --- lattice cone coincidence ------------------------------------------------------------------


def _lattice_hermitian_sample(S, n, rng, t):
    """Random hermitian elements mixed with cone members and near-boundary perturbations."""
    if t % 3 == 0:
        return st.random_element(S, n, rng, hermitian=True)
    x = st.random_cone_member(S, n, rng)
    if t % 3 == 2:
        h = st.random_element(S, n, rng, hermitian=True)
        x = x + h * (1e-2 * rng.standard_normal())
    return x


@register("wittstock_lattice_coincidence", "minimal and maximal matricial cones over a Banach lattice coincide")
def wittstock_lattice_coincidence(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 500)
    rng = np.random.default_rng(seed)
    bounds, ok = {}, True
    for p in (1, math.inf):
        for d in (1, 2, 3):
            X = sp.lattice(p, d)
            Smin = st.MatricialStructure(X, st.MIN, seed=seed)
            Smax = st.MatricialStructure(X, st.MAX, seed=seed)
            disc, members, undecided = 0, 0, 0
            for t in range(samples):
                n = int(rng.integers(1, 4))
                x = _lattice_hermitian_sample(Smin, n, rng, t)
                a, b = st.min_cone_member(Smin, x), st.max_cone_member(Smax, x)
                disc += a.member != b.member
                undecided += a.member is None or b.member is None
                members += bool(a.member)
            bounds[f"p={sp._p_to_json(p)},d={d}"] = {"discrepancies": disc, "members": members,
                                                     "undecided": undecided, "samples": samples}
            ok &= disc == 0 and undecided == 0
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


# --- MIN lattice normality, MAX niceness --------------------------------------------------------


@register("min_lattice_normality", "any Banach lattice is MIN-nice, so MIN over a lattice is 1-matricial normal")
def min_lattice_normality(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 1000)
    bounds, ok = {}, True
    for p in (1, 2, math.inf):
        S = st.MatricialStructure(sp.lattice(p, 3), st.MIN, restarts=4, seed=seed)
        probe = rg.normality_probe(S, 2, samples, seed)
        bounds[f"p={sp._p_to_json(p)}"] = {"normality": probe["bound"], "samples": probe["samples"]}
        ok &= probe["bound"] <= 1 + 1e-6 and probe["samples"] >= samples
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


@register("max_nice_reconstruction", "lattices are MAX-nice: v = Σ ξ_k η̄_k x_k with both weighted sums |v|")
def max_nice_reconstruction(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 1000)
    rng = np.random.default_rng(seed)
    worst_res, worst_norm = 0.0, 0.0
    for t in range(samples):
        d = int(rng.integers(1, 5))
        p = [1, 2, 3, math.inf][t % 4]
        X = sp.lattice(p, d, weights=rng.uniform(0.5, 2, d) if t % 2 else None)
        v = random_complex(rng, d)
        dec = rg.max_nice_decompose(X, v)
        nv = sp.base_norm(X, v)
        worst_res = max(worst_res, dec.residual)
        worst_norm = max(worst_norm, abs(dec.norm_xi_sum - nv), abs(dec.norm_eta_sum - nv))
    ok = worst_res <= 1e-12 and worst_norm <= 1e-12
    return {"bounds": {"max_residual": worst_res, "max_norm_gap": worst_norm, "samples": samples},
            "pass": bool(ok), "seed": seed}


# --- positivisation ------------------------------------------------------------------------------


@register("alpha_plus_fixed_point", "for 1-normal 1-generating matricial norms, α⁺ = α")
def alpha_plus_fixed_point(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 200)
    idem_samples = _cfg(config, "idempotence_samples", 20)
    S = st.matrix_system(2, restarts=4, seed=seed)
    rng = np.random.default_rng(seed)
    gap, bracket_ok = 0.0, True
    for t in range(samples):
        n = int(rng.integers(1, 3))
        x = st.random_element(S, n, rng)
        r = ps.alpha_plus(S, x, seed=seed)
        a = st.level_norm(S, x).value
        gap = max(gap, abs(r.value_upper - a))
        bracket_ok &= r.value_lower <= a * (1 + 1e-12) + 1e-12 and a <= r.value_upper * (1 + 1e-12) + 1e-12
    nested = S.replace(norm_override=ps.alpha_plus_evaluator(S, seed=seed))
    idem = 0.0
    for t in range(idem_samples):
        x = st.random_element(S, int(rng.integers(1, 3)), rng)
        idem = max(idem, abs(ps.alpha_plus(nested, x, seed=seed).value_upper
                             - ps.alpha_plus(S, x, seed=seed).value_upper))
    ok = gap <= 1e-3 and bracket_ok and idem <= 5e-3
    return {"bounds": {"max_gap": gap, "bracket_ok": bool(bracket_ok), "idempotence_gap": idem,
                       "samples": samples},
            "pass": bool(ok), "seed": seed}


# --- duality -----------------------------------------------------------------------------------


def _duality_agreement(kind, config):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 200)
    rng = np.random.default_rng(seed)
    bounds, ok = {}, True
    for p in (1, 2, math.inf):
        for d in (2, 3):
            S = st.MatricialStructure(sp.lattice(p, d), kind, seed=seed)
            disc, members = 0, 0
            for t in range(samples):
                n = int(rng.integers(1, 4))
                xb = du.random_dual_element(S, n, rng)
                if t % 3:
                    xb = st.random_cone_member(S.dual(), n, rng)
                    if t % 3 == 2:
                        xb = xb + du.random_dual_element(S, n, rng) * (1e-2 * rng.standard_normal())
                a = du.dual_cone_member(S, xb)
                b = du.dual_cone_member_by_pairing(S, xb)
                disc += a.member != b.member or a.member is None
                members += bool(a.member)
            bounds[f"p={sp._p_to_json(p)},d={d}"] = {"discrepancies": disc, "members": members,
                                                     "samples": samples}
            ok &= disc == 0
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


@register("max_min_duality", "MAX(X)♭ = MIN(X♭)")
def max_min_duality(config=None):
    return _duality_agreement(st.MAX, config)


@register("min_max_duality", "MIN(X)♭ = MAX(X♭)")
def min_max_duality(config=None):
    return _duality_agreement(st.MIN, config)


@register("products_lemma", "positive primal and dual blocks give a positive assembled pairing")
def products_lemma(config=None):
    seed = _cfg(config, "seed", 0)
    r = du.products_check(_cfg(config, "samples", 300), seed, tol=1e-8)
    return {"bounds": {"min_eig": r["min_eig"], "trials": r["trials"]}, "pass": r["pass"], "seed": seed}


# --- Horn-Mathias ------------------------------------------------------------------------------


def horn_mathias_ratio(R1, R, R2, a, b, p, m):
    """``‖(a⊗I)R(b⊗I)‖_p² / (‖(a⊗I)R₁(a*⊗I)‖_p ‖(b*⊗I)R₂(b⊗I)‖_p)``."""
    I = np.eye(m)
    A, B = np.kron(a, I), np.kron(b, I)
    lhs = schatten_norm(A @ R @ B, p) ** 2
    rhs = schatten_norm(A @ R1 @ A.conj().T, p) * schatten_norm(B.conj().T @ R2 @ B, p)
    return lhs, rhs


@register("horn_mathias", "‖axb‖_p² ≤ ‖ax₁a*‖_p ‖b*x₂b‖_p for positive blocks [[x₁,x],[x*,x₂]]")
def horn_mathias(config=None):
    seed = _cfg(config, "seed", 0)
    samples = _cfg(config, "samples", 500)
    rng = np.random.default_rng(seed)
    bounds, ok = {}, True
    for p in (1, 2, math.inf):
        worst = 0.0
        for t in range(samples):
            n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            rank = 1 if t % 2 else int(rng.integers(1, 2 * n * m + 1))
            B = unrealign_schatten(random_psd(rng, 2 * n * m, rank), 2 * n)
            x1, x, _, x2 = split_blocks(B)
            a, b = random_complex(rng, (n, n)), random_complex(rng, (n, n))
            lhs, rhs = horn_mathias_ratio(realign_schatten(x1), realign_schatten(x), realign_schatten(x2),
                                          a, b, p, m)
            if rhs > 0:
                worst = max(worst, lhs / rhs)
            elif lhs > 1e-20:
                worst = math.inf
        bounds[f"p={sp._p_to_json(p)}"] = {"max_ratio": worst}
        ok &= worst <= 1 + 1e-9
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


# --- AM obstruction ----------------------------------------------------------------------------


@register("am_obstruction_growth", "MIN(X) generating forces an AM-space; E⟨ξ|a|ξ⟩ ≥ 1 obstruction")
def am_obstruction_growth(config=None):
    seed = _cfg(config, "seed", 0)
    bounds, prev, ok = {}, 0.0, True
    for n, N in ((1, 1), (2, 2), (3, 4)):
        r = rg.am_obstruction(sp.lattice(1, n), n, N, budget=_cfg(config, "samples", 20), seed=seed)
        bounds[f"n={n},N={N}"] = {"bound": r["bound"], "target": math.sqrt(n) / 2,
                                  "anticommuting": r["anticommuting"]}
        ok &= r["pass"] and r["bound"] >= math.sqrt(n) / 2 - 1e-6 and r["bound"] >= prev - 1e-12
        prev = r["bound"]
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


# --- structural axioms ---------------------------------------------------------------------------


def exact_norm_configurations(seed=0):
    """One structure per kind, on configurations with exact or bracketed norms."""
    return {
        st.MIN: st.MatricialStructure(sp.lattice(math.inf, 3), st.MIN, restarts=4, seed=seed),
        st.MAX: st.MatricialStructure(sp.lattice(1, 2), st.MAX, restarts=4, seed=seed),
        st.SCHATTEN: st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN, restarts=4, seed=seed),
        st.MATRIX_SYSTEM: st.matrix_system(2, restarts=4, seed=seed),
    }


@register("ruan_all_kinds", "matricial norms satisfy Ruan's axioms")
def ruan_all_kinds(config=None):
    seed = _cfg(config, "seed", 0)
    trials = _cfg(config, "samples", 500)
    bounds, ok = {}, True
    for kind, S in exact_norm_configurations(seed).items():
        r = st.ruan_check(S, trials, seed)
        bounds[kind] = {"axiom1_violations": r["axiom1"]["violations"],
                        "axiom2_violations": r["axiom2"]["violations"], "trials": trials}
        ok &= r["pass"]
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


@register("cone_axioms_all_kinds", "matricial cones are stable under compressions and direct sums")
def cone_axioms_all_kinds(config=None):
    seed = _cfg(config, "seed", 0)
    trials = _cfg(config, "samples", 500)
    bounds, ok = {}, True
    for kind, S in exact_norm_configurations(seed).items():
        r = st.cone_axiom_check(S, trials, seed)
        bounds[kind] = {k: r[k]["violations"] for k in ("compression", "direct_sum", "sum_scaling", "pointedness")}
        bounds[kind]["undecided"] = r["undecided"]
        ok &= r["pass"]
    return {"bounds": bounds, "pass": bool(ok), "seed": seed}


# --- runner ------------------------------------------------------------------------------------


def run_experiment(name: str, config: dict | None = None) -> dict:
    """Run a registered experiment and return its record."""
    if name not in REGISTRY:
        raise UnknownExperimentError(name)
    exp = REGISTRY[name]
    start = time.perf_counter()
    out = exp.func(config)
    record = {"name": name, "seed": out.get("seed", _cfg(config, "seed", 0)), "bounds": st._jsonable(out["bounds"]),
              "pass": bool(out["pass"]), "anchor": exp.anchor,
              "elapsed": round(time.perf_counter() - start, 3)}
    return record


def run_suite(config: dict | None = None, names=None, stream=None):
    """Run experiments in registry order; writes NDJSON to ``stream`` if given."""
    records = []
    for name in names or list(REGISTRY):
        rec = run_experiment(name, config)
        records.append(rec)
        if stream is not None:
            stream.write(json.dumps(rec) + "\n")
            stream.flush()
    return records
