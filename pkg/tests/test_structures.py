import json
import math

import numpy as np
import pytest

from matorder import linalg as la
from matorder import spaces as sp
from matorder import structures as st
from matorder.errors import KindMismatchError, NonHermitianInputError

E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
E22 = np.array([[0.0, 0.0], [0.0, 1.0]])


def flip(p=2):
    X = sp.schatten(p, 2)
    return X, la.unrealign_schatten(la.swap_matrix(2, 2), 2)


def lattice_element(X, mats):
    return X.element(np.stack(mats, axis=-1))


class TestStructure:
    def test_kind_validation(self):
        with pytest.raises(KindMismatchError):
            st.MatricialStructure(sp.lattice(2, 2), st.SCHATTEN)
        with pytest.raises(KindMismatchError):
            st.MatricialStructure(sp.schatten(2, 2), st.MATRIX_SYSTEM)
        with pytest.raises(KindMismatchError):
            st.MatricialStructure(sp.lattice(2, 2), "middle")

    def test_dual_kinds(self):
        S = st.MatricialStructure(sp.lattice(1, 3), st.MIN)
        assert (S.dual().kind, S.dual().base.p) == (st.MAX, math.inf)
        assert st.MatricialStructure(sp.schatten(1, 2), st.SCHATTEN).dual().kind == st.MATRIX_SYSTEM
        assert st.matrix_system(2).dual().kind == st.SCHATTEN

    def test_verdict_json(self):
        X, F = flip()
        v = st.cone_member(st.MatricialStructure(X, st.SCHATTEN), F)
        data = json.loads(json.dumps(v.to_json()))
        assert data["verdict"] == "non-member"
        assert data["certificate"]["min_eig"] == pytest.approx(-1.0)


class TestLevelOne:
    @pytest.mark.parametrize("X", [sp.lattice(1, 3), sp.lattice(math.inf, 2), sp.schatten(2, 2),
                                   sp.schatten(math.inf, 2)])
    def test_all_kinds_restrict_to_base(self, X):
        rng = np.random.default_rng(0)
        kinds = [st.MIN, st.MAX] + ([st.SCHATTEN] if X.model == sp.SCHATTEN else [])
        for kind in kinds:
            S = st.MatricialStructure(X, kind, restarts=4)
            for _ in range(5):
                x = st.random_element(S, 1, rng)
                est = st.level_norm(S, x)
                assert est.lower == pytest.approx(sp.base_norm(X, x.coeffs[0, 0]), rel=1e-9)
                assert est.upper == pytest.approx(est.lower, rel=1e-9)


class TestMinNorm:
    def test_diagonal_linf(self):
        X = sp.lattice(math.inf, 2)
        S = st.MatricialStructure(X, st.MIN)
        assert st.min_level_norm(S, lattice_element(X, [E11, E22])) == pytest.approx(1.0)

    def test_optimizer_against_closed_form(self):
        X = sp.lattice(math.inf, 2)
        S = st.MatricialStructure(X, st.MIN, restarts=8)
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = st.random_element(S, 2, rng)
            closed = max(np.linalg.norm(M, 2) for M in x.coordinate_matrices())
            found = st._min_norm_search(S, x)[0]
            assert found <= closed * (1 + 1e-12)
            assert closed <= found + 1e-6

    def test_bracket_valid(self):
        rng = np.random.default_rng(1)
        for X in (sp.lattice(1, 3), sp.lattice(2, 2), sp.schatten(1, 2)):
            S = st.MatricialStructure(X, st.MIN, restarts=4)
            for _ in range(10):
                est = st.level_norm(S, st.random_element(S, 2, rng))
                assert est.lower <= est.upper * (1 + 1e-12)


class TestMinCone:
    def test_elementary_tensor(self):
        X = sp.lattice(2, 3)
        rng = np.random.default_rng(0)
        x = X.elementary(la.random_psd(rng, 3), X.cone_generators[1])
        assert st.min_cone_member(st.MatricialStructure(X, st.MIN), x).member is True

    def test_flip_is_member(self):
        X, F = flip()
        assert st.min_cone_member(st.MatricialStructure(X, st.MIN), F).member is True

    def test_negative_diagonal(self):
        X = sp.lattice(2, 2)
        x = lattice_element(X, [np.diag([1.0, -1.0]), np.eye(2)])
        v = st.min_cone_member(st.MatricialStructure(X, st.MIN), x)
        assert v.member is False
        assert v.certificate


class TestMaxCone:
    def test_decomposition(self):
        X = sp.lattice(1, 2)
        x = lattice_element(X, [np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([[1.0, -1.0], [-1.0, 1.0]])])
        assert st.max_cone_member(st.MatricialStructure(X, st.MAX), x).member is True

    def test_non_psd_coordinate(self):
        X = sp.lattice(1, 2)
        x = lattice_element(X, [la.swap_matrix(2, 2), np.eye(4)])
        assert st.max_cone_member(st.MatricialStructure(X, st.MAX), x).member is False

    def test_non_hermitian(self):
        X = sp.lattice(1, 2)
        S = st.MatricialStructure(X, st.MAX)
        x = lattice_element(X, [np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2))])
        with pytest.raises(NonHermitianInputError):
            st.max_cone_member(S, x)
        assert st.cone_member(S, x).member is False

    def test_flip_non_member(self):
        X, F = flip()
        v = st.max_cone_member(st.MatricialStructure(X, st.MAX), F, attempts=100)
        assert v.member is False

    def test_max_inside_min(self):
        rng = np.random.default_rng(3)
        for X in (sp.lattice(2, 2), sp.schatten(2, 2)):
            S = st.MatricialStructure(X, st.MAX)
            Smin = S.replace(kind=st.MIN)
            for _ in range(20):
                x = st.random_cone_member(S, 2, rng)
                assert st.cone_member(S, x).member is True
                assert st.cone_member(Smin, x).member is True


class TestMaxNorm:
    def test_elementary_tensor(self):
        rng = np.random.default_rng(0)
        for X in (sp.lattice(1, 2), sp.lattice(3, 3), sp.lattice(math.inf, 2)):
            S = st.MatricialStructure(X, st.MAX, restarts=8)
            a = la.random_complex(rng, (2, 2))
            a /= np.linalg.norm(a, 2)
            v = la.random_complex(rng, X.dim)
            v /= sp.base_norm(X, v)
            est = st.max_level_norm(S, X.elementary(a, v))
            assert 1 - 1e-6 <= est.lower <= est.upper <= 1 + 1e-6

    def test_bracket_valid(self):
        rng = np.random.default_rng(2)
        S = st.MatricialStructure(sp.lattice(2, 2), st.MAX, restarts=4)
        for _ in range(200):
            est = st.max_level_norm(S, st.random_element(S, int(rng.integers(1, 3)), rng))
            assert est.lower <= est.upper * (1 + 1e-12)

    def test_min_below_max(self):
        rng = np.random.default_rng(4)
        X = sp.lattice(1, 2)
        Smax = st.MatricialStructure(X, st.MAX, restarts=4)
        Smin = Smax.replace(kind=st.MIN)
        for _ in range(20):
            x = st.random_element(Smax, 2, rng)
            assert st.level_norm(Smin, x).lower <= st.level_norm(Smax, x).upper * (1 + 1e-9)


class TestSchattenNorm:
    def test_identity_pattern(self):
        X = sp.schatten(math.inf, 2)
        x = X.element(np.einsum("ij,d->ijd", E11, E11.ravel()) + np.einsum("ij,d->ijd", E22, E22.ravel()))
        assert st.schatten_level_norm(st.matrix_system(2), x).value == pytest.approx(1.0)

    def test_flip_operator_norm(self):
        _, F = flip(math.inf)
        assert st.schatten_level_norm(st.matrix_system(2), F).value == pytest.approx(1.0)

    def test_p2_sanity_lower_bound(self):
        rng = np.random.default_rng(0)
        S = st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN, restarts=8)
        n = 2
        for _ in range(10):
            x = st.random_element(S, n, rng, hermitian=True)
            # a = b = I / n^(1/4) lies in the unit ball of S_4^n
            feasible = la.schatten_norm(la.realign_schatten(x), 2) / math.sqrt(n)
            est = st.schatten_level_norm(S, x)
            assert est.lower >= feasible * (1 - 1e-9)
            assert est.lower <= est.upper * (1 + 1e-12)

    def test_psd_p1_shortcut_matches_ascent(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            R = la.random_psd(rng, 4)
            exact = float(np.linalg.eigvalsh(la.partial_trace(R, 2, 2))[-1])
            ascent, _ = st._schatten_ascent(R, 2, 2, 1.0, rng, 16, 500)
            assert ascent == pytest.approx(exact, rel=1e-6)

    def test_psd_p2_shortcut_matches_ascent(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            R = la.random_psd(rng, 4)
            exact = st._psd_schatten2_norm(R, 2, 2)
            ascent, _ = st._schatten_ascent(R, 2, 2, 2.0, rng, 16, 500)
            assert ascent == pytest.approx(exact, rel=1e-6)


class TestSchattenCone:
    def test_flip(self):
        X, F = flip()
        v = st.schatten_cone_member(st.MatricialStructure(X, st.SCHATTEN), F)
        assert v.member is False
        assert v.certificate["min_eig"] == pytest.approx(-1.0, abs=1e-9)

    def test_tensor_of_positives(self):
        rng = np.random.default_rng(0)
        X = sp.schatten(1, 2)
        x = X.elementary(la.random_psd(rng, 3), la.random_psd(rng, 2).ravel())
        assert st.schatten_cone_member(st.MatricialStructure(X, st.SCHATTEN), x).member is True

    def test_zero(self):
        X = sp.schatten(1, 2)
        assert st.schatten_cone_member(st.MatricialStructure(X, st.SCHATTEN), X.zeros(2)).member is True

    def test_kind_mismatch(self):
        with pytest.raises(KindMismatchError):
            st.schatten_cone_member(st.MatricialStructure(sp.schatten(1, 2), st.MIN), sp.schatten(1, 2).zeros(1))


class TestAxiomRunners:
    @pytest.mark.parametrize("X,kind", [
        (sp.lattice(math.inf, 3), st.MIN),
        (sp.lattice(1, 2), st.MAX),
        (sp.schatten(2, 2), st.SCHATTEN),
        (sp.schatten(math.inf, 2), st.MATRIX_SYSTEM),
    ])
    def test_small_runs(self, X, kind):
        S = st.MatricialStructure(X, kind, restarts=4)
        assert st.ruan_check(S, budget=20, seed=1)["pass"]
        report = st.cone_axiom_check(S, budget=20, seed=1)
        assert report["pass"] and report["undecided"] == 0

    def test_min_linf_direct_sum_equality(self):
        X = sp.lattice(math.inf, 2)
        S = st.MatricialStructure(X, st.MIN)
        rng = np.random.default_rng(0)
        for _ in range(20):
            x, y = st.random_element(S, 2, rng), st.random_element(S, 1, rng)
            lhs = st.min_level_norm(S, la.direct_sum(x, y))
            assert lhs == pytest.approx(max(st.min_level_norm(S, x), st.min_level_norm(S, y)), abs=1e-9)

    def test_report_records_seed(self):
        S = st.matrix_system(2)
        assert st.ruan_check(S, budget=3, seed=9)["seed"] == 9
