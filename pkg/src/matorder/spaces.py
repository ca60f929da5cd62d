"""Finite-dimensional ordered complex Banach spaces used as matricial bases.

Three models are supported:

* ``lattice_lp``: ``C^d`` with a (weighted) ℓ_p norm of the coordinate moduli,
  the coordinatewise order and coordinatewise conjugation;
* ``schatten``: ``m x m`` matrices (stored as row-major vectors of length
  ``m**2``) with the Schatten p-norm, the PSD cone and the matrix adjoint;
* ``custom``: a polyhedral cone in ``R^d`` given by both generators and facet
  functionals, with an unweighted ℓ_p norm and coordinatewise conjugation.

Duality always uses the bilinear pairing ``⟨f, v⟩ = Σ_k f_k v_k``. For the
Schatten model this is the trace duality ``tr(f vᵀ)`` in matrix form.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import optimize

from .errors import WrongBaseModelError
from .linalg import (
    CONJUGATION,
    MATRIX_ADJOINT,
    LeveledElement,
    abs_hermitian,
    adjoint,
    conjugate_exponent,
    involve_vectors,
    norming_matrix,
    psd_sqrt,
    psd_verdict,
    random_hermitian,
    random_psd,
    schatten_norm,
    vector_p_norm,
)

LATTICE = "lattice_lp"
SCHATTEN = "schatten"
CUSTOM = "custom"
MODELS = (LATTICE, SCHATTEN, CUSTOM)

DEFAULT_TOL = 1e-9


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return math.inf
        raise ValueError(f"invalid exponent {p!r}")
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def _p_to_json(p: float):
    if math.isinf(p):
        return "inf"
    return int(p) if float(p).is_integer() else float(p)


def _vectors_from_json(rows, dim):
    arr = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"generator vectors must have length {dim}")
    return arr


def _vectors_to_json(arr):
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


@dataclasses.dataclass(frozen=True, eq=False)
class BaseSpace:
    """Descriptor of a finite-dimensional ordered complex Banach space.

    Use the constructors :func:`lattice`, :func:`schatten` and :func:`custom`
    rather than building instances directly.
    """

    model: str
    p: float
    dim: int
    weights: tuple | None = None
    cone_generators: np.ndarray | None = None
    dual_generators: np.ndarray | None = None
    pointed: bool = True

    @property
    def involution(self) -> str:
        return MATRIX_ADJOINT if self.model == SCHATTEN else CONJUGATION

    @property
    def m(self) -> int:
        if self.model != SCHATTEN:
            raise WrongBaseModelError("only Schatten bases have a matrix side length")
        return math.isqrt(self.dim)

    @property
    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.weights, dtype=float)

    def element(self, coeffs) -> LeveledElement:
        """Wrap a coefficient array of shape ``(n, n, d)`` as an element over this space."""
        el = LeveledElement(coeffs, self.involution)
        if el.base_dim != self.dim:
            raise ValueError(f"coefficients have base dimension {el.base_dim}, expected {self.dim}")
        return el

    def zeros(self, n: int) -> LeveledElement:
        return LeveledElement.zeros(n, self.dim, self.involution)

    def elementary(self, a, v) -> LeveledElement:
        return LeveledElement.elementary(a, v, self.involution)

    def involve(self, v) -> np.ndarray:
        return involve_vectors(v, self.involution)

    def same_as(self, other: "BaseSpace") -> bool:
        return to_json(self) == to_json(other)

    def __repr__(self):
        return f"BaseSpace({to_json(self)})"


# --- constructors --------------------------------------------------------------


def lattice(p, dim: int, weights=None) -> BaseSpace:
    """Weighted ℓ_p lattice ``C^dim`` with norm ``(Σ w_k |v_k|^p)^{1/p}`` (``max w_k|v_k|`` at p=inf)."""
    p = _parse_p(p)
    if dim < 1:
        raise ValueError("dimension must be positive")
    if weights is not None:
        weights = tuple(float(w) for w in weights)
        if len(weights) != dim or min(weights) <= 0:
            raise ValueError("weights must be positive and match the dimension")
    eye = np.eye(dim, dtype=complex)
    return BaseSpace(LATTICE, p, dim, weights, eye, eye.copy(), True)


def schatten(p, m: int) -> BaseSpace:
    """Schatten class ``S_p^m`` with the PSD cone and matrix adjoint."""
    p = _parse_p(p)
    if m < 1:
        raise ValueError("matrix size must be positive")
    return BaseSpace(SCHATTEN, p, m * m, None, None, None, True)


def custom(p, cone_generators, dual_generators, pointed=None) -> BaseSpace:
    """Polyhedral cone in ``R^d`` with an unweighted ℓ_p norm.

    :param cone_generators: rows ``g_j`` whose nonnegative combinations give the cone.
    :param dual_generators: rows ``f_k`` with cone ``= {v : Re⟨f_k, v⟩ ≥ 0}``.
    :param pointed: declared pointedness; ``None`` infers it (pointed iff the
        facet functionals span ``R^d``).
    """
    p = _parse_p(p)
    G = np.atleast_2d(np.asarray(cone_generators, dtype=complex))
    F = np.atleast_2d(np.asarray(dual_generators, dtype=complex))
    if G.shape[1] != F.shape[1]:
        raise ValueError("generator dimensions disagree")
    if np.max(np.abs(G.imag), initial=0) > 0 or np.max(np.abs(F.imag), initial=0) > 0:
        raise ValueError("custom polyhedral generators must be real")
    if np.min(F.real @ G.real.T) < -1e-12:
        raise ValueError("some cone generator violates a facet functional")
    if pointed is None:
        pointed = bool(np.linalg.matrix_rank(F.real) == F.shape[1])
    return BaseSpace(CUSTOM, p, G.shape[1], None, G, F, bool(pointed))


# --- JSON ------------------------------------------------------------------------


def from_json(obj: dict) -> BaseSpace:
    """Parse a space descriptor (see :func:`to_json` for the format)."""
    if not isinstance(obj, dict) or "model" not in obj:
        raise ValueError("space descriptor must be an object with a 'model' key")
    model = obj["model"]
    allowed = {
        LATTICE: {"model", "p", "dim", "weights"},
        SCHATTEN: {"model", "p", "m"},
        CUSTOM: {"model", "p", "dim", "cone_generators", "dual_generators", "pointed"},
    }
    if model not in allowed:
        raise ValueError(f"unknown model {model!r}")
    extra = set(obj) - allowed[model]
    if extra:
        raise ValueError(f"unexpected keys for {model}: {sorted(extra)}")
    if model == LATTICE:
        return lattice(obj["p"], int(obj["dim"]), obj.get("weights"))
    if model == SCHATTEN:
        return schatten(obj["p"], int(obj["m"]))
    dim = int(obj["dim"])
    G = _vectors_from_json(obj["cone_generators"], dim)
    F = _vectors_from_json(obj["dual_generators"], dim)
    return custom(obj["p"], G, F, obj.get("pointed"))


def to_json(X: BaseSpace) -> dict:
    """Serialize to ``{"model", "p", "dim"|"m", ...}``; inverse of :func:`from_json`."""
    out = {"model": X.model, "p": _p_to_json(X.p)}
    if X.model == SCHATTEN:
        out["m"] = X.m
        return out
    out["dim"] = X.dim
    if X.model == LATTICE:
        if X.weights is not None:
            out["weights"] = list(X.weights)
        return out
    out["cone_generators"] = _vectors_to_json(X.cone_generators)
    out["dual_generators"] = _vectors_to_json(X.dual_generators)
    if X.pointed != bool(np.linalg.matrix_rank(X.dual_generators.real) == X.dim):
        out["pointed"] = X.pointed
    return out


# --- norms and duality -------------------------------------------------------------


def _as_vector(X: BaseSpace, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if v.shape[0] != X.dim:
        raise WrongBaseModelError(f"vector has length {v.shape[0]}, space has dimension {X.dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def base_norm(X: BaseSpace, v) -> float:
    """Norm of a base vector.

    Lattice and custom models take the (weighted) ℓ_p norm of the coordinate
    moduli; the Schatten model takes the Schatten p-norm of the reshaped matrix.
    """
    v = _as_vector(X, v)
    if X.model == SCHATTEN:
        return schatten_norm(v.reshape(X.m, X.m), X.p)
    w = X.weight_array
    if math.isinf(X.p):
        return float(np.max(w * np.abs(v)))
    return vector_p_norm(w ** (1.0 / X.p) * np.abs(v), X.p)


def dual_space(X: BaseSpace) -> BaseSpace:
    """The dual space under the bilinear pairing; ``dual_space(dual_space(X))`` equals ``X``."""
    q = conjugate_exponent(X.p)
    if X.model == SCHATTEN:
        return schatten(q, X.m)
    if X.model == LATTICE:
        if X.weights is None:
            return lattice(q, X.dim)
        w = X.weight_array
        if X.p == 1 or math.isinf(X.p):
            dual_w = 1.0 / w
        else:
            dual_w = w ** (-1.0 / (X.p - 1))
        return lattice(q, X.dim, dual_w)
    return BaseSpace(CUSTOM, q, X.dim, None, X.dual_generators.copy(), X.cone_generators.copy(), _custom_pointed(X.cone_generators))


def _custom_pointed(F) -> bool:
    return bool(np.linalg.matrix_rank(np.asarray(F).real) == np.asarray(F).shape[1])


def dual_norm(X: BaseSpace, f) -> float:
    """Norm of a functional ``f`` in the dual space."""
    return base_norm(dual_space(X), f)


def pair(f, v) -> complex:
    """Bilinear pairing ``Σ_k f_k v_k``."""
    return complex(np.sum(np.asarray(f) * np.asarray(v)))


def norming_functional(X: BaseSpace, v) -> np.ndarray:
    """Return ``f`` with dual norm 1 and ``Re ⟨f, v⟩ = base_norm(v)``."""
    v = _as_vector(X, v)
    if X.model == SCHATTEN:
        m = X.m
        A = v.reshape(m, m)
        F_T = norming_matrix(A, conjugate_exponent(X.p))
        return F_T.T.reshape(-1)
    w = X.weight_array
    r = np.abs(v)
    phase = np.where(r > 0, np.conj(v) / np.where(r > 0, r, 1.0), 1.0)
    if not np.any(r > 0):
        f = np.zeros(X.dim, dtype=complex)
        f[0] = 1.0
        return f / dual_norm(X, f)
    if math.isinf(X.p):
        k = int(np.argmax(w * r))
        f = np.zeros(X.dim, dtype=complex)
        f[k] = w[k] * phase[k]
        return f
    if X.p == 1:
        return w * phase
    nv = base_norm(X, v)
    return w * (r / nv) ** (X.p - 1) * phase


# --- order ---------------------------------------------------------------------------


def base_cone_member(X: BaseSpace, v, tol: float = DEFAULT_TOL) -> bool:
    """Membership in the base cone within ``tol``.

    Lattice: every coordinate has ``|Im| ≤ tol`` and ``Re ≥ −tol``. Schatten:
    the reshaped matrix is PSD within ``tol``. Custom: the vector is real within
    ``tol`` and ``Re⟨f_k, v⟩ ≥ −tol`` for all facet functionals.
    """
    v = _as_vector(X, v)
    if X.model == SCHATTEN:
        return psd_verdict(v.reshape(X.m, X.m), tol)[0]
    if X.model == LATTICE:
        return bool(np.all(np.abs(v.imag) <= tol) and np.all(v.real >= -tol))
    if np.any(np.abs(v.imag) > tol):
        return False
    return bool(np.all((X.dual_generators @ v).real >= -tol))


def is_hermitian_element(X: BaseSpace, x: LeveledElement, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``adjoint(x) = x`` entrywise within ``tol``."""
    if x.involution != X.involution or x.base_dim != X.dim:
        return False
    return bool(np.max(np.abs(adjoint(x).coeffs - x.coeffs), initial=0.0) <= tol)


def hermitian_part(x: LeveledElement) -> LeveledElement:
    return (x + adjoint(x)) * 0.5


def random_cone_vector(X: BaseSpace, rng: np.random.Generator) -> np.ndarray:
    """A random member of the base cone."""
    if X.model == SCHATTEN:
        rank = int(rng.integers(1, X.m + 1))
        return random_psd(rng, X.m, rank).reshape(-1)
    G = X.cone_generators
    c = rng.exponential(size=G.shape[0]) * (rng.random(G.shape[0]) < 0.7)
    if not np.any(c):
        c[rng.integers(G.shape[0])] = 1.0
    return (c @ G).real.astype(complex)


def random_hermitian_vector(X: BaseSpace, rng: np.random.Generator) -> np.ndarray:
    if X.model == SCHATTEN:
        return random_hermitian(rng, X.m).reshape(-1)
    return rng.standard_normal(X.dim).astype(complex)


def check_pointed(X: BaseSpace, trials: int = 200, seed: int = 0, tol: float = DEFAULT_TOL) -> bool:
    """Randomized falsification of pointedness; ``True`` if no ``x ≠ 0`` with ``±x`` in the cone was found."""
    rng = np.random.default_rng(seed)
    if X.model == CUSTOM and not _custom_pointed(X.dual_generators):
        return False
    for _ in range(trials):
        v = random_cone_vector(X, rng)
        scale = base_norm(X, v)
        if scale > 0 and base_cone_member(X, -v / scale, tol):
            return False
    return True


# --- scalar regularity ------------------------------------------------------------


@dataclasses.dataclass
class ScalarRegularityReport:
    """Level-1 normality/generation bounds with their witnesses.

    ``witnesses`` holds ``("normality", x, y)`` with ``±x ≤ y`` and
    ``("generation", x, y)`` with ``y ≥ ±x``.
    """

    normality_lower_bound: float
    generation_upper_bound: float
    witnesses: list
    seed: int
    budget: int

    def to_json(self) -> dict:
        return {
            "normality_lower_bound": self.normality_lower_bound,
            "generation_upper_bound": self.generation_upper_bound,
            "seed": self.seed,
            "budget": self.budget,
            "witnesses": [
                {"kind": k, "x": _vectors_to_json([x])[0], "y": _vectors_to_json([y])[0]}
                for k, x, y in self.witnesses
            ],
        }


def _order_interval_sample(X: BaseSpace, y: np.ndarray, rng) -> np.ndarray:
    """Return a random ``b`` with ``0 ≤ b ≤ y``."""
    if X.model == SCHATTEN:
        m = X.m
        C = random_psd(rng, m, int(rng.integers(1, m + 1)))
        C /= max(np.linalg.eigvalsh(C)[-1], 1e-300)
        C *= rng.random()
        Yh = psd_sqrt(y.reshape(m, m))
        return (Yh @ C @ Yh).reshape(-1)
    if X.model == LATTICE:
        return y.real * rng.random(X.dim) * (rng.random(X.dim) < 0.8)
    b = random_cone_vector(X, rng).real
    F = X.dual_generators.real
    fb, fy = F @ b, F @ y.real
    ratios = [fy[k] / fb[k] for k in range(len(fb)) if fb[k] > 1e-15]
    t = min(ratios) if ratios else 1.0
    return b * max(t, 0.0) * rng.random()


def _symmetric_majorant(X: BaseSpace, x: np.ndarray, rng, restarts: int = 4) -> np.ndarray:
    """A ``y ≥ ±x`` of small norm: closed form for lattices and Schatten, SLSQP otherwise."""
    if X.model == LATTICE:
        return np.abs(x).astype(complex)
    if X.model == SCHATTEN:
        return abs_hermitian(x.reshape(X.m, X.m)).reshape(-1)
    F = X.dual_generators.real
    xr = x.real
    cons = [
        {"type": "ineq", "fun": lambda y: F @ (y - xr), "jac": lambda y: F},
        {"type": "ineq", "fun": lambda y: F @ (y + xr), "jac": lambda y: F},
    ]
    G = X.cone_generators.real
    best = None
    for r in range(restarts):
        start = np.abs(xr).sum() * (G.sum(axis=0) + (rng.random(G.shape[1]) if r else 0))
        res = optimize.minimize(
            lambda y: vector_p_norm(np.abs(y), X.p) ** 2 if not math.isinf(X.p) else float(np.max(np.abs(y))),
            start,
            constraints=cons,
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        y = res.x
        viol = min(np.min(F @ (y - xr)), np.min(F @ (y + xr)))
        if viol < 0:
            # push back into the feasible set along an interior generator direction
            g = G.sum(axis=0)
            y = y + (-viol / max(np.min(F @ g), 1e-300)) * g
        if best is None or base_norm(X, y) < base_norm(X, best):
            best = y
    return best.astype(complex)


def scalar_regularity(X: BaseSpace, budget: int = 200, seed: int = 0) -> ScalarRegularityReport:
    """Level-1 normality lower bound and generation upper bound on hermitian inputs.

    The normality bound is ``max ‖x‖`` over found ``±x ≤ y`` with ``‖y‖ = 1``;
    the generation bound is the max over sampled hermitian unit ``x`` of the
    best found ``‖y‖`` with ``y ≥ ±x``.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    normality, generation = 0.0, 0.0
    best_n, best_g = None, None
    for _ in range(budget):
        y = random_cone_vector(X, rng)
        ny = base_norm(X, y)
        if ny == 0:
            continue
        y = y / ny
        candidates = [y, -y, y - 2 * _order_interval_sample(X, y, rng)]
        for x in candidates:
            if not (base_cone_member(X, y - x, 1e-9) and base_cone_member(X, y + x, 1e-9)):
                continue
            val = base_norm(X, x)
            if val > normality:
                normality, best_n = val, (x, y)
        x = random_hermitian_vector(X, rng)
        x = x / base_norm(X, x)
        ymaj = _symmetric_majorant(X, x, rng)
        val = base_norm(X, ymaj)
        if val > generation:
            generation, best_g = val, (x, ymaj)
    witnesses = []
    if best_n is not None:
        witnesses.append(("normality",) + best_n)
    if best_g is not None:
        witnesses.append(("generation",) + best_g)
    return ScalarRegularityReport(normality, generation, witnesses, seed, budget)
