import json
import math

import numpy as np
import pytest

from matorder import linalg as la
from matorder import regularity as rg
from matorder import spaces as sp
from matorder import structures as st
from matorder.errors import ModelMismatchError, NotCompletelyPositiveError


def schatten(p, m=2, restarts=8):
    return st.MatricialStructure(sp.schatten(p, m), st.SCHATTEN if not math.isinf(p) else st.MATRIX_SYSTEM,
                                 restarts=restarts)


class TestGenerationWitness:
    def test_matrix_system_is_exact(self):
        S = st.matrix_system(2)
        rng = np.random.default_rng(0)
        for _ in range(10):
            x = st.random_element(S, 2, rng, hermitian=True)
            w = rg.generation_witness(S, x)
            assert w.value == pytest.approx(np.linalg.norm(la.realign_schatten(x), 2), rel=1e-9)
            assert rg.verify_witness(S, x, w)["pass"]

    def test_cone_member(self):
        rng = np.random.default_rng(1)
        for S in (schatten(2), st.MatricialStructure(sp.lattice(2, 2), st.MIN)):
            x = st.random_cone_member(S, 2, rng)
            w = rg.generation_witness(S, x)
            assert w.value <= st.level_norm(S, x).upper * (1 + 1e-9)
            assert rg.verify_witness(S, x, w)["pass"]

    def test_zero(self):
        S = schatten(1)
        w = rg.generation_witness(S, S.base.zeros(2))
        assert w.value == 0.0
        assert not np.any(w.x1.coeffs) and not np.any(w.x2.coeffs)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_schatten_one_generating(self, p):
        S = schatten(p)
        rng = np.random.default_rng(p)
        for _ in range(4):
            x = st.random_element(S, 2, rng, hermitian=True)
            w = rg.generation_witness(S, x)
            assert w.value <= st.level_norm(S, x).upper * (1 + 1e-6)
            assert rg.verify_witness(S, x, w)["pass"]

    def test_non_hermitian_input(self):
        S = schatten(2)
        x = st.random_element(S, 2, np.random.default_rng(4))
        w = rg.generation_witness(S, x)
        assert rg.verify_witness(S, x, w)["pass"]

    @pytest.mark.parametrize("X,kind", [(sp.lattice(1, 2), st.MIN), (sp.lattice(2, 2), st.MIN),
                                        (sp.lattice(1, 2), st.MAX), (sp.lattice(math.inf, 2), st.MAX)])
    def test_lattice_witness_valid(self, X, kind):
        S = st.MatricialStructure(X, kind, restarts=4)
        rng = np.random.default_rng(5)
        for _ in range(3):
            x = st.random_element(S, 2, rng, hermitian=True)
            w = rg.generation_witness(S, x)
            assert rg.verify_witness(S, x, w)["pass"]

    def test_hermitian_decomposition(self):
        S = schatten(2)
        x = st.random_element(S, 2, np.random.default_rng(6), hermitian=True)
        y = rg.generation_witness(S, x).symmetric
        plus, minus = (y + x) * 0.5, (y - x) * 0.5
        assert (plus - minus).allclose(x, atol=1e-12)
        assert st.cone_member(S, plus).member and st.cone_member(S, minus).member

    def test_closed_form_witness(self):
        rng = np.random.default_rng(7)
        for p in (1, 2, math.inf):
            S = schatten(p)
            x = st.random_element(S, 2, rng, hermitian=True)
            w = rg.closed_form_sqrt_witness(S, x)
            assert rg.verify_witness(S, x, w)["pass"]
            if math.isinf(p):
                assert w.value == pytest.approx(st.level_norm(S, x).value, rel=1e-9)


class TestMaxNice:
    def test_signed_vector(self):
        X = sp.lattice(math.inf, 2)
        d = rg.max_nice_decompose(X, [1.0, -1.0])
        np.testing.assert_allclose(d.parts, np.eye(2))
        np.testing.assert_allclose(d.xi, [1, -1])
        np.testing.assert_allclose(d.eta, [1, 1])
        assert d.residual == 0 and d.norm_xi_sum == 1 and d.norm_eta_sum == 1

    def test_positive_vector(self):
        d = rg.max_nice_decompose(sp.lattice(2, 3), [1.0, 2.0, 0.5])
        np.testing.assert_allclose(d.xi, 1)
        np.testing.assert_allclose(d.eta, 1)
        np.testing.assert_allclose(d.parts, np.diag([1.0, 2.0, 0.5]))

    def test_phase(self):
        d = rg.max_nice_decompose(sp.lattice(1, 2), [1j, 0])
        assert d.xi[0] == pytest.approx(1j)
        assert d.residual == 0

    def test_needs_lattice(self):
        with pytest.raises(ModelMismatchError):
            rg.max_nice_decompose(sp.schatten(2, 2), np.zeros(4))

    def test_min_nice(self):
        for p in (1, 2, math.inf):
            r = rg.min_nice_check(sp.lattice(p, 3), budget=50, seed=0)
            assert r["pass"] and r["violating_triple_rejected"]


class TestNormalityProbe:
    def test_matrix_system(self):
        r = rg.normality_probe(st.matrix_system(2), 2, budget=200, seed=0)
        assert 1 - 1e-6 <= r["bound"] <= 1 + 1e-6

    def test_schatten_p2(self):
        r = rg.normality_probe(schatten(2, restarts=4), 2, budget=100, seed=0)
        assert r["bound"] <= 1 + 1e-3

    def test_min_linf(self):
        r = rg.normality_probe(st.MatricialStructure(sp.lattice(math.inf, 3), st.MIN), 2, budget=200, seed=0)
        assert r["bound"] <= 1 + 1e-6

    def test_explicit_samples(self):
        S = st.matrix_system(2)
        y = S.base.element(np.einsum("ij,d->ijd", np.eye(1), np.eye(2).ravel()))
        r = rg.normality_probe(S, 1, samples=[la.assemble_blocks(y, y, y, y)])
        assert r["bound"] == pytest.approx(1.0)
        assert r["samples"] == 1

    def test_deterministic(self):
        S = schatten(1, restarts=4)
        a = rg.normality_probe(S, 1, budget=30, seed=3)
        b = rg.normality_probe(S, 1, budget=30, seed=3)
        assert a["bound"] == b["bound"]

    def test_report_json(self):
        rep = rg.regularity_report(st.matrix_system(2), 1, budget=20, seed=0)
        data = json.loads(json.dumps(rep.to_json()))
        assert data["variant"] == "strong (eps = 0)"
        assert data["normality_lower_bound"] <= 1 + 1e-9


class TestCbcCb:
    def test_identity_map(self):
        S = st.matrix_system(2)
        r = rg.cbc_cb_compare(S, S, np.eye(4), n_max=2, budget=20, seed=0)
        assert r["pass"]
        assert r["cb"] == pytest.approx(1.0, abs=1e-9)

    def test_transpose_not_cp(self):
        S = st.matrix_system(2)
        T = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                T[j * 2 + i, i * 2 + j] = 1.0
        with pytest.raises(NotCompletelyPositiveError) as exc:
            rg.cbc_cb_compare(S, S, T, n_max=2, budget=5, seed=0)
        assert exc.value.witness["level"] == 2


class TestAmObstruction:
    def test_family_properties(self):
        fam, anticommuting = rg.symmetric_orthogonal_family(2, 2, seed=0)
        assert anticommuting
        for U in fam:
            np.testing.assert_allclose(U, U.T)
            np.testing.assert_allclose(U @ U.T, np.eye(2))
        assert abs(np.trace(fam[0] @ fam[1])) < 1e-12

    def test_n2(self):
        r = rg.am_obstruction(sp.lattice(1, 2), 2, 2, budget=20, seed=0)
        assert r["pass"] and r["bound"] >= math.sqrt(2) / 2 - 1e-6

    def test_n1(self):
        r = rg.am_obstruction(sp.lattice(1, 1), 1, 1, budget=10, seed=0)
        assert r["bound"] >= 0.5

    def test_needs_l1(self):
        with pytest.raises(ModelMismatchError):
            rg.am_obstruction(sp.lattice(2, 2), 2, 2)

    def test_dominating_a_satisfies_expectation(self):
        # a = Σ|U_i| ⊗ e_i/√n dominates ±u; its circle average meets the target coordinatewise
        fam, _ = rg.symmetric_orthogonal_family(2, 2, seed=0)
        for U in fam:
            A = la.abs_hermitian(U) / math.sqrt(2)
            assert rg._circle_average(A) >= 1 / math.sqrt(2) - 1e-12
