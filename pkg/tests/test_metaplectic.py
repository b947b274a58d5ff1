from fractions import Fraction as F

import numpy as np
import pytest

from heisenlab import exact
from heisenlab.algebra import (
    AlgebraElement,
    DiscreteSubgroup,
    GroupElement,
    alg_conjugate,
    ge_multiply,
    subgroup_member,
    symbolic_trace,
)
from heisenlab.exact import SQRT2
from heisenlab.gaussian import apply_pipeline, fourier, l2_distance, norm, scale, tf_shift
from heisenlab.metaplectic import (
    FACTOR_KINDS,
    CubeParameterError,
    MetaplecticFactor,
    MetaplecticPipeline,
    build_H,
    choose_b,
    complete_basis,
    cube_trace,
    embed_double,
    j_exact,
    standard_pipeline,
    transition_exact,
    transition_matrix,
)

from randgen import group_element, packet, subgroup, subgroup_element


def ge(*c):
    h = len(c) // 2
    return GroupElement(c[:h], c[h:])


TEST_GROUPS = {
    "Z2": DiscreteSubgroup.standard(1),
    "half": DiscreteSubgroup(1, [ge(F(1, 2), 0), ge(0, 1)]),
    "rank1": DiscreteSubgroup(1, [ge(1, 0)]),
}


class TestEmbedding:
    def test_examples(self):
        assert embed_double(ge(F(1, 2), 1)) == GroupElement([F(1, 2), 0], [1, 0])
        assert embed_double(GroupElement.identity(1)).is_identity

    def test_twist_preserved(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            g, h = group_element(rng, 2), group_element(rng, 2)
            ph, gh = ge_multiply(g, h)
            ph2, gh2 = ge_multiply(embed_double(g), embed_double(h))
            assert ph == ph2 and gh2 == embed_double(gh)

    def test_complete_basis(self):
        Z = DiscreteSubgroup.standard(1)
        assert complete_basis(Z) == list(Z.generators)
        assert complete_basis(TEST_GROUPS["rank1"]) == [ge(1, 0), ge(0, 1)]
        basis = complete_basis(DiscreteSubgroup(2, []))
        assert [list(g.vector) for g in basis] == [[int(i == j) for j in range(4)] for i in range(4)]


class TestTransition:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_factorization(self, n):
        tr = transition_matrix(n)
        assert tr.factorization_error < 1e-12
        assert np.allclose(tr.T @ tr.T.T, np.eye(4 * n))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_j_squares_to_identity(self, n):
        j = j_exact(2 * n)
        assert exact.matmul(j, j) == [[int(i == k) for k in range(2 * n)] for i in range(2 * n)]

    @pytest.mark.parametrize("n", [1, 2])
    def test_determinant(self, n):
        assert exact.determinant(transition_exact(n)) == 1

    def test_exact_entries(self):
        T = transition_exact(1)
        assert T[0][0] == SQRT2 / 2 and T[0][3] == -SQRT2 / 2


class TestFactors:
    def test_inverse_pairs(self):
        for kind in FACTOR_KINDS:
            f = MetaplecticFactor(kind, 2)
            assert f.inverse.inverse == f
            assert exact.matmul(f.matrix(), f.inverse.matrix()) == [[int(i == j) for j in range(4)] for i in range(4)]

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValueError):
            MetaplecticFactor("Chirp", 1)

    @pytest.mark.parametrize("kind", FACTOR_KINDS)
    def test_covariance_each_factor(self, kind):
        rng = np.random.default_rng(1)
        pipe = MetaplecticPipeline([MetaplecticFactor(kind, 2)])
        for _ in range(5):
            f, g = packet(rng, 2), group_element(rng, 2, 3, 3)
            c, h = pipe.push(g)
            lhs = apply_pipeline(pipe, tf_shift(g, apply_pipeline(pipe, f, "inverse")))
            assert l2_distance(lhs, scale(tf_shift(h, f), c.value)) < 1e-8 * norm(f)

    def test_fourier_phase(self):
        # u^-1 (x, y) u = e^{-2 pi i x.y} (-y, x)
        ph, g = MetaplecticFactor("Fourier", 2).conjugation(GroupElement([F(1, 2), 1], [F(1, 3), 0]))
        assert ph.turn == F(5, 6) and g == GroupElement([F(-1, 3), 0], [F(1, 2), 1])

    def test_fourier_order_four(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p = packet(rng, 2)
            q = p
            for _ in range(4):
                q = fourier(q)
            assert l2_distance(p, q) < 1e-9 * norm(p)


class TestBuildH:
    @pytest.mark.parametrize("name", sorted(TEST_GROUPS))
    def test_contains_modulations(self, name):
        H, pipe = build_H(TEST_GROUPS[name])
        for j in range(2):
            e = GroupElement.from_vector([0, 0] + [int(i == j) for i in range(2)])
            assert H.generators[2 + j] == e
            assert subgroup_member(H, e) is not None

    def test_tau_H_contains_G(self):
        G = TEST_GROUPS["Z2"]
        H, pipe = build_H(G)
        T = transition_exact(1)
        K = DiscreteSubgroup(2, [GroupElement.from_vector(exact.matvec(T, list(h.vector))) for h in H.generators])
        for g in G.generators:
            assert subgroup_member(K, embed_double(g)) is not None

    def test_trivial_group(self):
        H, pipe = build_H(DiscreteSubgroup(1, []))
        assert H.rank == 4 and not pipe.table

    @pytest.mark.parametrize("name", sorted(TEST_GROUPS))
    def test_pipeline_covariance(self, name):
        rng = np.random.default_rng(3)
        H, pipe = build_H(TEST_GROUPS[name])
        assert [f.kind for f in pipe.factors] == ["Chirp", "Dilation", "Fourier", "Chirp"]
        for g, (c, h) in pipe.table.items():
            assert abs(abs(c.value) - 1) < 1e-15
            assert subgroup_member(H, h) is not None
            for _ in range(5):
                f = packet(rng, 2)
                lhs = apply_pipeline(pipe, tf_shift(g, apply_pipeline(pipe, f, "inverse")))
                assert l2_distance(lhs, scale(tf_shift(h, f), c.value)) < 1e-8 * norm(f)

    def test_random_subgroups(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(1, 3))
            H, pipe = build_H(subgroup(rng, n, int(rng.integers(0, 2 * n + 1))))
            for j in range(2 * n):
                e = [0] * (2 * n) + [int(i == j) for i in range(2 * n)]
                assert subgroup_member(H, GroupElement.from_vector(e)) is not None

    def test_json(self):
        H, pipe = build_H(TEST_GROUPS["half"])
        out = pipe.to_json()
        assert [f["kind"] for f in out["factors"]] == ["Chirp", "Dilation", "Fourier", "Chirp"]
        assert len(out["map"]) == 2 and {"g", "turn", "h"} <= set(out["map"][0])


class TestCubeTrace:
    def test_choose_b_examples(self):
        assert choose_b(DiscreteSubgroup.standard(1)).b == 2
        assert choose_b(DiscreteSubgroup(1, [ge(F(1, 2), 0), ge(0, 1)])).b == 3
        assert choose_b(DiscreteSubgroup.standard(2)).b == 2

    @pytest.mark.parametrize("name", sorted(TEST_GROUPS))
    def test_choose_b_agrees_with_brute_force(self, name):
        H, _ = build_H(TEST_GROUPS[name])
        data = choose_b(H)
        norms = []
        for m in np.ndindex(*(7,) * H.rank):
            h = H.element([int(v) - 3 for v in m])
            if any(v != 0 for v in h.x):
                norms.append(max(abs(v) for v in h.x))
        best = min(norms)
        assert best == data.min_translation
        assert F(1, data.b) < best
        assert data.b == 1 or F(1, data.b - 1) >= best

    def test_disjoint_cubes(self):
        H, _ = build_H(TEST_GROUPS["half"])
        data = choose_b(H)
        for m in np.ndindex(5, 5, 5, 5):
            h = H.element([int(v) - 2 for v in m])
            if any(v != 0 for v in h.x):
                assert max(abs(v) for v in h.x) > F(1, data.b)

    def test_rejects_fractional_modulation(self):
        with pytest.raises(CubeParameterError):
            choose_b(DiscreteSubgroup(1, [ge(1, 0), ge(0, F(1, 2))]))

    def test_rejects_dense_translations(self):
        H = DiscreteSubgroup(1, [GroupElement([1], [1]), GroupElement([SQRT2], [0])])
        with pytest.raises(CubeParameterError):
            choose_b(H)

    def test_basic_values(self):
        data = choose_b(DiscreteSubgroup.standard(2))
        assert data.c == 4
        assert abs(cube_trace(AlgebraElement.one(2), data) - 1) < 1e-15
        assert abs(cube_trace(AlgebraElement.basis(GroupElement([0, 0], [1, -2])), data)) < 1e-15
        assert cube_trace(AlgebraElement.basis(GroupElement([1, 0], [1, 0])), data) == 0

    def test_support_outside_H(self):
        data = choose_b(DiscreteSubgroup.standard(1))
        with pytest.raises(ValueError):
            cube_trace(AlgebraElement.basis(ge(F(1, 2), 0)), data)

    def test_matches_symbolic_trace(self):
        rng = np.random.default_rng(6)
        for name in sorted(TEST_GROUPS):
            H, _ = build_H(TEST_GROUPS[name])
            data = choose_b(H)
            for _ in range(20):
                theta = subgroup_element(rng, H, int(rng.integers(1, 11)))
                assert abs(cube_trace(theta, data) - symbolic_trace(theta)) < 1e-12

    def test_tracial_and_conjugation_invariant(self):
        rng = np.random.default_rng(7)
        H, _ = build_H(TEST_GROUPS["half"])
        data = choose_b(H)
        for _ in range(30):
            a, b = subgroup_element(rng, H, 3, 1), subgroup_element(rng, H, 3, 1)
            assert abs(cube_trace(a * b, data) - cube_trace(b * a, data)) < 1e-10
            x = group_element(rng, 2, 3, 4)
            # x a x^-1 has the same support as a, so it stays inside H
            assert abs(cube_trace(alg_conjugate(x, a), data) - cube_trace(a, data)) < 1e-10

    def test_trace_transport(self):
        rng = np.random.default_rng(8)
        for name in sorted(TEST_GROUPS):
            G = TEST_GROUPS[name]
            H, pipe = build_H(G)
            data = choose_b(H)
            for _ in range(10):
                a = subgroup_element(rng, G, 4)
                assert abs(symbolic_trace(a) - cube_trace(pipe.transport(a), data)) < 1e-9

    def test_standard_pipeline_matrix(self):
        assert standard_pipeline(2).matrix() == transition_exact(2)
