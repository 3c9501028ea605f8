import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bundlelift import bundles as bd, manifolds as mf, obstruction as ob
from bundlelift.errors import BadParams, DegeneratePlaquette


class TestLatticeChernNumber:
    def test_trivial_line_is_zero(self):
        bundle = bd.trivial(mf.ComplexProjective(1), 1, complex_fibers=True)
        res = ob.lattice_chern_number(bundle, 3)
        assert res.value == 0
        assert res.stable
        assert abs(res.raw) <= 1e-10

    def test_tautological_anchor(self):
        res = ob.lattice_chern_number(bd.tautological_complex(1), 4)
        assert res.value == -1
        assert res.stable
        assert abs(res.raw - (-1)) <= 0.05

    @pytest.mark.parametrize("n", [2, 3])
    def test_pullback_scaling(self, n):
        bundle = bd.pullback(mf.cp1_power_map(n), bd.tautological_complex(1))
        res = ob.lattice_chern_number(bundle, 4)
        assert res.value == -n
        assert res.stable

    def test_ratio_is_convention_independent(self):
        base = ob.lattice_chern_number(bd.tautological_complex(1), 4)
        for n in (2, 3):
            pb = ob.lattice_chern_number(
                bd.pullback(mf.cp1_power_map(n), bd.tautological_complex(1)), 4)
            assert pb.value == n * base.value

    def test_sphere_base_accepted(self):
        # conjugate the tautological projector field through the chart
        tc = bd.tautological_complex(1)
        to_cp1 = mf.SmoothMap("chart", mf.sphere_to_cp1, mf.Sphere(2),
                              mf.ComplexProjective(1))
        bundle = bd.pullback(to_cp1, tc)
        assert ob.lattice_chern_number(bundle, 3).value == -1

    def test_rejects_real_bundle(self):
        with pytest.raises(BadParams):
            ob.lattice_chern_number(bd.tangent_sphere(2), 4)

    def test_rejects_coarse_mesh(self):
        with pytest.raises(BadParams):
            ob.lattice_chern_number(bd.tautological_complex(1), 2)

    def test_naturality_with_degree(self):
        gamma = bd.tautological_complex(1)
        c_gamma = ob.lattice_chern_number(gamma, 4).value
        cases = [
            (mf.identity_diffeo(mf.ComplexProjective(1)),
             mf.identity_diffeo(mf.Sphere(2)), None),
            (mf.named_diffeo(mf.ComplexProjective(1), "cpn_conjugation"),
             mf.named_diffeo(mf.Sphere(2), "sphere_reflection"), None),
            (mf.cp1_power_map(2), mf.sphere_power_map(2), None),
            (mf.cp1_power_map(3), mf.sphere_power_map(3), None),
        ]
        for f_cp1, f_s2, _ in cases:
            deg = mf.degree(f_s2, 4)
            c_pb = ob.lattice_chern_number(bd.pullback(f_cp1, gamma), 4).value
            assert c_pb == deg * c_gamma


class TestPullbackInvariance:
    def test_identity_not_obstructed(self):
        rep = ob.pullback_invariance_report(
            mf.identity_diffeo(mf.ComplexProjective(1)),
            bd.tautological_complex(1), mesh_level=3)
        assert rep["c1"] == rep["c1_pullback"] == -1
        assert not rep["lift_obstructed"]

    def test_conjugation_obstructed(self):
        rep = ob.pullback_invariance_report(
            mf.named_diffeo(mf.ComplexProjective(1), "cpn_conjugation"),
            bd.tautological_complex(1), mesh_level=4)
        assert rep["c1"] == -1
        assert rep["c1_pullback"] == 1
        assert rep["lift_obstructed"]

    def test_rotation_not_obstructed(self):
        rot = mf.named_diffeo(mf.ComplexProjective(1), "cpn_unitary",
                              matrix=np.diag([np.exp(0.9j), 1.0]))
        rep = ob.pullback_invariance_report(rot, bd.tautological_complex(1),
                                            mesh_level=3)
        assert rep["c1"] == rep["c1_pullback"] == -1
        assert not rep["lift_obstructed"]


def _all_bits(n):
    return [tuple(int(x) for x in np.binary_repr(m, width=n))
            for m in range(1, 2 ** n)]


class TestTorusCriterion:
    def test_identity_always_liftable(self):
        for n in (1, 2, 3):
            for b in _all_bits(n):
                res = ob.torus_criterion(np.eye(n, dtype=int), b)
                assert res.fast_verdict and res.oracle_verdict

    def test_shear_cases(self):
        a = np.array([[1, 1], [0, 1]])
        assert not ob.torus_criterion(a, (1, 0)).liftable
        assert ob.torus_criterion(a, (0, 1)).liftable

    def test_exhaustive_sweep_fast_equals_oracle(self):
        total = 0
        for n in (1, 2, 3):
            for b in _all_bits(n):
                for i in range(20):
                    a = mf.random_unimodular(n, 1000 * n + 31 * i + hash(b) % 97)
                    res = ob.torus_criterion(a, b)
                    assert res.fast_verdict == res.oracle_verdict
                    total += 1
        assert total == (1 + 3 + 7) * 20

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=4),
           st.integers(min_value=0, max_value=10 ** 6))
    def test_property_sweep(self, n, seed):
        rng = np.random.default_rng(seed)
        b = tuple(rng.integers(0, 2, size=n).tolist())
        if not any(b):
            b = tuple([1] + [0] * (n - 1))
        a = mf.random_unimodular(n, seed)
        res = ob.torus_criterion(a, b)
        assert res.fast_verdict == res.oracle_verdict

    def test_rejects_non_unimodular(self):
        with pytest.raises(BadParams):
            ob.torus_criterion(np.array([[2, 0], [0, 1]]), (1, 0))

    def test_rejects_zero_bits(self):
        with pytest.raises(BadParams):
            ob.torus_criterion(np.eye(2, dtype=int), (0, 0))

    def test_generators_span_expected_shapes(self):
        gens = ob.subgroup_generators((1, 0, 1))
        arrs = {tuple(g) for g in gens}
        assert (0, 1, 0) in arrs        # free coordinate
        assert (2, 0, 0) in arrs        # doubled first set bit
        assert (1, 0, 1) in arrs        # pair of set bits


class TestW1Profile:
    @pytest.mark.parametrize("b,expected", [
        ((1, 0), (-1, 1)),
        ((1, 1), (-1, -1)),
        ((0, 1), (1, -1)),
    ])
    def test_t2_profiles(self, b, expected):
        assert tuple(ob.w1_profile(b, steps=256)) == expected

    def test_t3_all_bits(self):
        for b in _all_bits(3):
            profile = ob.w1_profile(b, steps=256)
            assert tuple(profile) == tuple((-1) ** bi for bi in b)

    def test_trivial_bundle_distinguished(self):
        # every nonzero b forces at least one -1 in the profile
        for n in (1, 2, 3):
            for b in _all_bits(n):
                assert -1 in ob.w1_profile(b, steps=256)

    def test_dimension_cap(self):
        with pytest.raises(BadParams):
            ob.w1_profile((1, 0, 0, 0, 1), steps=64)


def test_torus_lift_agrees_with_criterion():
    from bundlelift import lifts as lf
    from bundlelift.errors import BundleLiftError

    for n in (1, 2, 3):
        for b in _all_bits(n):
            for i in range(20):
                a = mf.random_unimodular(n, 555 * n + 13 * i + hash(b) % 101)
                expected = ob.torus_criterion(a, b).liftable
                try:
                    lf.torus_line_lift(a, b)
                    built = True
                except BundleLiftError:
                    built = False
                assert built == expected


def test_degenerate_plaquette_detected():
    # a field orthogonal to its surroundings at one mesh vertex zeroes the
    # triple overlap on every triangle touching it
    base = mf.ComplexProjective(1)
    verts, _ = mf.icosphere(3)
    pole = verts[0]

    def field(p):
        x = mf.cp1_to_sphere(p)
        z = np.array([0.0, 1.0], dtype=complex) if np.linalg.norm(x - pole) < 1e-9 \
            else np.array([1.0, 0.0], dtype=complex)
        return np.outer(z, z.conj())

    bundle = bd.BundleModel(("pointwise_orthogonal",), base, 4, 2,
                            lambda p: np.eye(4), complex_projector=field)
    with pytest.raises(DegeneratePlaquette):
        ob.lattice_chern_number(bundle, 3)


def test_non_convergent_detected():
    # variation far below the mesh scale aliases into different integers
    # at consecutive levels
    from bundlelift.errors import NonConvergent

    base = mf.ComplexProjective(1)

    def spiky(p):
        x = mf.cp1_to_sphere(p)
        z = np.array([1.0, 40.0 * x[0] + 40.03 * x[1]], dtype=complex)
        z /= np.linalg.norm(z)
        return np.outer(z, z.conj())

    bundle = bd.BundleModel(("spiky",), base, 4, 2, lambda p: np.eye(4),
                            complex_projector=spiky)
    with pytest.raises(NonConvergent):
        ob.lattice_chern_number(bundle, 3)
