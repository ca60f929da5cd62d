import math

import numpy as np
import pytest

from matorder import duality as du
from matorder import linalg as la
from matorder import spaces as sp
from matorder import structures as st
from matorder.errors import DimensionMismatchError, KindMismatchError


class TestPairing:
    def test_scalar(self):
        X = sp.lattice(2, 3)
        v = np.array([1 + 1j, 2, -1])
        f = np.array([2, 1j, 3])
        P = du.pairing(X.element(f.reshape(1, 1, 3)), X.element(v.reshape(1, 1, 3)))
        assert P.shape == (1, 1)
        assert P[0, 0] == pytest.approx(sp.pair(f, v))

    def test_elementary_tensors(self):
        rng = np.random.default_rng(0)
        X = sp.lattice(1, 2)
        a, b = la.random_complex(rng, (2, 2)), la.random_complex(rng, (3, 3))
        v, f = la.random_complex(rng, 2), la.random_complex(rng, 2)
        P = du.pairing(X.elementary(b, f), X.elementary(a, v))
        np.testing.assert_allclose(P, np.kron(a, b) * sp.pair(f, v), atol=1e-12)

    def test_index_convention(self):
        rng = np.random.default_rng(1)
        X = sp.lattice(2, 2)
        xb = X.element(la.random_complex(rng, (2, 2, 2)))
        x = X.element(la.random_complex(rng, (3, 3, 2)))
        P = du.pairing(xb, x)
        for i in range(3):
            for j in range(3):
                for k in range(2):
                    for l in range(2):
                        assert P[i * 2 + k, j * 2 + l] == pytest.approx(sp.pair(xb.coeffs[k, l], x.coeffs[i, j]))

    def test_hermitian_pairs(self):
        rng = np.random.default_rng(2)
        for t in range(100):
            X = sp.schatten(2, 2) if t % 2 else sp.lattice(1, 3)
            S = st.MatricialStructure(X, st.MIN)
            x = st.random_element(S, 2, rng, hermitian=True)
            xb = du.random_dual_element(S, 2, rng)
            P = du.pairing(xb, x)
            np.testing.assert_allclose(P, P.conj().T, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            du.pairing(sp.lattice(1, 2).zeros(1), sp.lattice(1, 3).zeros(1))


class TestDualCone:
    @pytest.mark.parametrize("kind", [st.MIN, st.MAX])
    def test_routes_agree_on_lattices(self, kind):
        rng = np.random.default_rng(3)
        for X in (sp.lattice(1, 2), sp.lattice(math.inf, 3)):
            S = st.MatricialStructure(X, kind)
            Sd = S.dual()
            for t in range(40):
                n = 1 + t % 3
                xb = st.random_cone_member(Sd, n, rng) if t % 2 else du.random_dual_element(S, n, rng)
                a = du.dual_cone_member(S, xb)
                b = du.dual_cone_member_by_pairing(S, xb)
                assert a.member is not None and a.member == b.member

    def test_max_l1_dual_is_min_linf(self):
        S = st.MatricialStructure(sp.lattice(1, 2), st.MAX)
        assert S.dual().kind == st.MIN and math.isinf(S.dual().base.p)

    def test_schatten_flip_conjugate(self):
        rng = np.random.default_rng(4)
        S = st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN)
        for _ in range(30):
            xb = du.random_dual_element(S, 2, rng)
            if rng.random() < 0.5:
                xb = la.unrealign_schatten(la.random_psd(rng, 4), 2)
            expected = la.is_psd(la.flip_conjugate(xb))
            assert du.dual_cone_member(S, xb).member == expected

    def test_schatten_certificate(self):
        S = st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN)
        F = la.unrealign_schatten(la.swap_matrix(2, 2), 2)
        v = du.dual_cone_member(S, F)
        assert v.member is False
        r = v.certificate["primal"]
        assert st.cone_member(S, r).member
        assert v.certificate["value"] < 0

    def test_wrong_base(self):
        S = st.MatricialStructure(sp.lattice(1, 2), st.MIN)
        with pytest.raises(KindMismatchError):
            du.dual_cone_member(S, sp.schatten(2, 2).zeros(1))

    def test_pairing_of_members_is_psd(self):
        rng = np.random.default_rng(5)
        S = st.MatricialStructure(sp.lattice(2, 2), st.MAX)
        for _ in range(20):
            x = st.random_cone_member(S, 2, rng)
            xb = st.random_cone_member(S.dual(), 2, rng)
            assert la.is_psd(du.pairing(xb, x), 1e-9)


class TestProducts:
    def test_check(self):
        r = du.products_check(budget=60, seed=0)
        assert r["pass"] and r["min_eig"] >= -1e-8

    def test_zero_off_diagonal(self):
        rng = np.random.default_rng(0)
        X = sp.lattice(1, 2)
        P = la.random_psd(rng, 2)
        u1 = X.elementary(P, [1.0, 0.0])
        v1 = X.elementary(P, [1.0, 0.0])
        z = X.zeros(2)
        M = du.assembled_pairing(u1, z, u1, v1, z, v1)
        assert la.is_psd(M, 1e-12)


class TestGenNormalDuality:
    def test_min_linf(self):
        S = st.MatricialStructure(sp.lattice(math.inf, 2), st.MIN)
        r = du.gen_normal_duality_probe(S, n=2, budget=20, seed=0)
        assert r["pass"] and r["primal_side"] == "exact"

    def test_schatten(self):
        S = st.MatricialStructure(sp.schatten(2, 2), st.SCHATTEN, restarts=4)
        r = du.gen_normal_duality_probe(S, n=1, budget=30, seed=0)
        assert r["pass"]
