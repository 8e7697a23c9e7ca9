import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xstates.bloch import BlochState, all_words, correlation, from_bloch, pauli_string, scalar_product
from xstates.errors import InvalidArgument
from xstates.geometry import SectionPoint2, section_coords2, section_embed2
from xstates.group import (
    L_Z,
    REFLECTION,
    LieTangent,
    LocalRotation,
    WeylElement,
    act,
    central_element,
    from_sl2,
    gm_from_so2,
    infinitesimal_action,
    orthogonality_residual,
    random_rotation,
    section_normalizer2,
    so2_from_gm,
    weyl_embed,
    weyl_sample,
)


def random_state(n, rng):
    k = 4**n - 1
    return BlochState.from_vector(n, rng.normal(size=k) + 1j * rng.normal(size=k))


def random_gl2(rng):
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


lam_strategy = st.builds(
    lambda r, t: r * np.exp(1j * t),
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=-np.pi, max_value=np.pi),
)


class TestAct:
    def test_identity(self):
        rng = np.random.default_rng(0)
        b = random_state(2, rng)
        assert act(LocalRotation.identity(2), b).allclose(b, atol=0)

    def test_half_turn(self):
        g = LocalRotation([np.diag([-1, -1, 1])])
        assert dict(act(g, BlochState(1, {"X": 1})).components) == {"X": -1}

    def test_size_mismatch(self):
        with pytest.raises(InvalidArgument):
            act(LocalRotation.identity(2), BlochState(3))

    def test_is_group_action(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            b = random_state(3, rng)
            g, h = random_rotation(3, rng), random_rotation(3, rng)
            assert act(g, act(h, b)).allclose(act(g @ h, b), atol=1e-9)

    def test_preserves_scalar_products(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            b = random_state(3, rng)
            moved = act(random_rotation(3, rng), b)
            for subset in ([1], [2], [3], [1, 3], [1, 2, 3]):
                c0, c1 = correlation(b, subset).ravel(), correlation(moved, subset).ravel()
                assert abs(scalar_product(c0, c0) - scalar_product(c1, c1)) < 1e-9 * (1 + abs(c0 @ c0))

    def test_matches_operator_conjugation(self):
        # independent oracle: conjugate the operator by M1 ⊗ M2 and re-expand
        rng = np.random.default_rng(3)
        mats = [random_gl2(rng) for _ in range(2)]
        b = random_state(2, rng)
        big = np.kron(mats[0], mats[1])
        d = big @ from_bloch(b).matrix @ np.linalg.inv(big)
        comps = {w: np.trace(d @ pauli_string(w)) for w in all_words(2)}
        assert act(from_sl2(mats), b).allclose(BlochState(2, comps), atol=1e-9)


class TestFromSl2:
    def test_identity_and_scalars(self):
        assert np.allclose(from_sl2([np.eye(2)]).blocks[0], np.eye(3))
        assert np.allclose(from_sl2([(2 - 3j) * np.eye(2)]).blocks[0], np.eye(3), atol=1e-12)

    def test_diagonal_phase(self):
        g = from_sl2([np.diag([1j, -1j])])
        assert np.allclose(g.blocks[0], np.diag([-1, -1, 1]))

    def test_singular_rejected(self):
        with pytest.raises(InvalidArgument):
            from_sl2([np.array([[1, 2], [2, 4]])])

    def test_homomorphism(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            m, n = random_gl2(rng), random_gl2(rng)
            lhs = from_sl2([m @ n]).blocks[0]
            rhs = from_sl2([m]).blocks[0] @ from_sl2([n]).blocks[0]
            assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(lhs)))


class TestLocalRotation:
    def test_non_orthogonal_rejected(self):
        with pytest.raises(InvalidArgument):
            LocalRotation([np.diag([2, 1, 0.5])])

    def test_reflection_rejected(self):
        with pytest.raises(InvalidArgument):
            LocalRotation([np.diag([1, 1, -1])])

    def test_inverse(self):
        g = random_rotation(2, 7)
        assert np.allclose((g @ g.inverse()).blocks, [np.eye(3)] * 2, atol=1e-12)


class TestRandomRotation:
    def test_scale_zero(self):
        assert np.allclose(random_rotation(3, 1, scale=0).blocks, [np.eye(3)] * 3)

    def test_valid_for_many_seeds(self):
        for seed in range(100):
            for g in random_rotation(2, seed).blocks:
                assert orthogonality_residual(g) < 1e-9
                assert abs(np.linalg.det(g) - 1) < 1e-9

    def test_seeded(self):
        a, b, c = random_rotation(2, 1), random_rotation(2, 1), random_rotation(2, 2)
        assert np.array_equal(a.blocks, b.blocks)
        assert np.linalg.norm(np.array(a.blocks) - np.array(c.blocks)) > 1e-3

    def test_negative_scale(self):
        with pytest.raises(InvalidArgument):
            random_rotation(1, 0, scale=-1)


class TestInfinitesimal:
    def test_zero(self):
        b = BlochState(2, {"XY": 1, "ZI": 2})
        x = LieTangent([np.zeros((3, 3))] * 2)
        assert np.all(infinitesimal_action(x, b) == 0)

    def test_planar_generator(self):
        t = infinitesimal_action(LieTangent([L_Z]), BlochState(1, {"X": 1}))
        assert np.allclose(t, [0, 0, 1, 0])

    def test_finite_difference(self):
        rng = np.random.default_rng(8)
        h = 1e-6
        for n in (1, 2, 3):
            b = random_state(n, rng)
            x = LieTangent.from_coords(rng.normal(size=3 * n) + 1j * rng.normal(size=3 * n))
            plus = act(LieTangent([h * blk for blk in x.blocks]).exp(), b).tensor
            minus = act(LieTangent([-h * blk for blk in x.blocks]).exp(), b).tensor
            fd = (plus - minus) / (2 * h)
            exact = infinitesimal_action(x, b)
            assert np.max(np.abs(fd - exact)) < 1e-5 * (1 + np.max(np.abs(exact)))

    def test_size_mismatch(self):
        with pytest.raises(InvalidArgument):
            infinitesimal_action(LieTangent([L_Z]), BlochState(2))


class TestSo2:
    def test_examples(self):
        assert np.allclose(so2_from_gm(1), np.eye(2))
        assert np.allclose(so2_from_gm(2), [[5 / 4, -3j / 4], [3j / 4, 5 / 4]])
        assert gm_from_so2(np.eye(2)) == 1
        assert gm_from_so2(np.array([[0, 1], [-1, 0]])) == 1j

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgument):
            so2_from_gm(0)

    def test_non_orthogonal_rejected(self):
        with pytest.raises(InvalidArgument):
            gm_from_so2(np.diag([2, 0.5]))

    @given(lam_strategy)
    def test_round_trip(self, lam):
        a = so2_from_gm(lam)
        assert orthogonality_residual(a) < 1e-9
        assert abs(gm_from_so2(a) - lam) < 1e-12 * abs(lam) * 10

    @given(lam_strategy, lam_strategy)
    def test_multiplicative(self, x, y):
        prod = gm_from_so2(so2_from_gm(x) @ so2_from_gm(y))
        assert abs(prod - x * y) < 1e-10 * abs(x * y) * 100


class TestWeyl:
    def test_identity(self):
        assert np.allclose(weyl_embed(WeylElement([np.eye(2)] * 2)).blocks, [np.eye(3)] * 2)

    def test_reflection_block(self):
        assert np.allclose(weyl_embed(WeylElement([REFLECTION])).blocks[0], np.diag([1, -1, -1]))

    def test_non_orthogonal_rejected(self):
        with pytest.raises(InvalidArgument):
            weyl_embed(WeylElement([np.diag([2, 1])]))

    def test_sample_scale_zero(self):
        w = weyl_sample(3, 0, with_reflection=False, scale=0)
        assert np.allclose(w.planar, [np.eye(2)] * 3)

    def test_samples_fix_longitudinal_lines(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            for g in weyl_embed(weyl_sample(3, rng)).blocks:
                assert orthogonality_residual(g) < 1e-9
                z = g @ np.array([0, 0, 1])
                assert np.allclose(z[:2], 0) and abs(abs(z[2]) - 1) < 1e-12

    def test_reflections_are_sampled(self):
        dets = {round(np.linalg.det(a).real) for s in range(20) for a in weyl_sample(2, s).planar}
        assert dets == {-1, 1}

    def test_central_element(self):
        blocks = weyl_embed(central_element(2)).blocks
        assert np.allclose(blocks, [np.diag([-1, -1, 1])] * 2)

    def test_section_normalizer(self):
        group = section_normalizer2()
        assert len(group) == 32
        keys = {tuple(np.round(np.concatenate([b.ravel() for b in g.blocks]).real, 6)) for g in group}
        assert len(keys) == 32
        s = SectionPoint2(0.3 + 1j, -2, (1.1, 0.7j, -0.4 + 0.2j))
        for g in group:
            moved = act(g, section_embed2(s))
            assert moved.allclose(section_embed2(section_coords2(moved)), atol=0)
