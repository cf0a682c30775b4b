import numpy as np
import pytest

import liemech as lm


def fs_pullback_oracle(space, pivot, z, dz, step=1e-6):
    """Ambient-metric pullback through the projection by central differences."""

    def lift(t):
        amp = np.insert(z + t * dz, pivot, 1.0 + 0.0j)
        return amp / np.linalg.norm(amp)

    v = (lift(step) - lift(-step)) / (2.0 * step)
    s = lift(0.0)
    v_perp = v - s * np.vdot(s, v)
    u = lm.realify(v_perp)
    return float(u @ space.g @ u)


class TestKahlerSpace:
    def test_compatibility_identities(self):
        for n in (1, 2, 4):
            k = lm.KahlerSpace(n)
            assert np.array_equal(k.J @ k.J, -np.eye(2 * n))
            assert np.array_equal(k.omega, k.J.T @ k.g)
            assert np.array_equal(k.g, np.eye(2 * n))
            block = np.zeros((2 * n, 2 * n))
            block[:n, n:] = np.eye(n)
            block[n:, :n] = -np.eye(n)
            assert np.array_equal(k.omega, block)

    def test_pairing_identities_on_basis(self):
        k = lm.KahlerSpace(3)
        basis = np.eye(6)
        for u in basis:
            for v in basis:
                assert k.symplectic(u, v) == k.metric(k.J @ u, v)
                assert abs(k.metric(k.J @ u, k.J @ v) - k.metric(u, v)) <= 1e-15

    def test_contravariant_round_trip(self):
        k = lm.KahlerSpace(2)
        G, W = k.contravariant()
        assert np.max(np.abs(G @ k.g - np.eye(4))) <= 1e-12
        assert np.max(np.abs(W @ k.omega + np.eye(4))) <= 1e-12

    def test_realify_round_trip(self):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert np.allclose(lm.unrealify(lm.realify(psi)), psi)
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert np.allclose(lm.realified_operator(m) @ lm.realify(psi),
                           lm.realify(m @ psi), atol=1e-14)


class TestHermitianSplit:
    def test_self_pairing_of_unit_vector(self):
        k = lm.KahlerSpace(2)
        psi = lm.QuantumState([1.0, 1.0j])
        g, w, ip = lm.hermitian_split(k, psi, psi)
        assert g == pytest.approx(1.0, abs=1e-12)
        assert w == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_states(self):
        k = lm.KahlerSpace(2)
        g, w, ip = lm.hermitian_split(k, lm.QuantumState([1, 0]), lm.QuantumState([0, 1]))
        assert (g, w, ip) == (0.0, 0.0, 0.0)

    def test_conjugate_linear_first_argument(self):
        k = lm.KahlerSpace(2)
        g, w, ip = lm.hermitian_split(k, lm.QuantumState([1, 0]), lm.QuantumState([1j, 0]))
        assert g == pytest.approx(0.0, abs=1e-15)
        assert w == pytest.approx(1.0, abs=1e-15)
        assert ip == pytest.approx(1j)

    def test_matches_matrix_contractions(self):
        rng = np.random.default_rng(3)
        k = lm.KahlerSpace(3)
        for _ in range(20):
            x = lm.random_state(rng, 3)
            y = lm.random_state(rng, 3)
            g, w, ip = lm.hermitian_split(k, x, y)
            assert abs(g - k.metric(x.realified, y.realified)) <= 1e-12
            assert abs(w - k.symplectic(x.realified, y.realified)) <= 1e-12
            assert abs(ip - (g + 1j * w)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lm.hermitian_split(lm.KahlerSpace(2), lm.QuantumState([1, 0, 0]),
                               lm.QuantumState([1, 0, 0]))


class TestFubiniStudy:
    def test_origin_is_flat(self):
        dz = np.array([0.3 + 0.1j, -0.2j])
        val = lm.fubini_study_metric(np.zeros(2, dtype=complex), dz)
        assert val == pytest.approx(float(np.vdot(dz, dz).real))

    def test_radial_displacement_scalar_case(self):
        eps = 1e-3
        val = lm.fubini_study_metric(np.array([1.0 + 0j]), np.array([eps + 0j]))
        assert val == pytest.approx(eps ** 2 / 4.0)

    def test_positivity(self):
        rng = np.random.default_rng(12)
        for _ in range(10_000):
            z = rng.normal(size=2) + 1j * rng.normal(size=2)
            dz = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert lm.fubini_study_metric(z, dz) >= 0.0

    def test_pullback_of_ambient_metric(self):
        rng = np.random.default_rng(7)
        k = lm.KahlerSpace(3)
        for _ in range(200):
            z = rng.normal(size=2) + 1j * rng.normal(size=2)
            dz = rng.normal(size=2) + 1j * rng.normal(size=2)
            chart_val = lm.fubini_study_metric(z, dz)
            oracle = fs_pullback_oracle(k, 0, z, dz)
            assert abs(chart_val - oracle) <= 1e-8

    def test_chart_round_trip(self):
        rng = np.random.default_rng(9)
        psi = lm.random_state(rng, 4)
        pivot, z = lm.chart_coordinates(psi)
        amp = lm.chart_embedding(pivot, z)
        pivot2, z2 = lm.chart_coordinates(lm.QuantumState(amp), pivot=pivot)
        assert pivot2 == pivot
        assert np.allclose(z2, z, atol=1e-12)

    def test_chart_singularity(self):
        with pytest.raises(ValueError, match="singular"):
            lm.chart_coordinates(lm.QuantumState([1.0, 0.0]), pivot=1)


class TestGeodesicTransition:
    def test_identical_rays(self):
        psi = lm.QuantumState([1, 1j])
        gamma, prob = lm.geodesic_transition(psi, psi)
        assert prob == pytest.approx(1.0, abs=1e-15)
        assert gamma == pytest.approx(0.0, abs=1e-7)

    def test_orthogonal_rays(self):
        for hbar in (1.0, 0.5):
            gamma, prob = lm.geodesic_transition(lm.QuantumState([1, 0]),
                                                 lm.QuantumState([0, 1]), hbar=hbar)
            assert prob == 0.0
            assert gamma == pytest.approx(np.sqrt(2 * hbar) * np.pi / 2)

    def test_qubit_superposition(self):
        gamma, prob = lm.geodesic_transition(lm.QuantumState([1, 0]),
                                             lm.QuantumState([1, 1]))
        assert prob == pytest.approx(0.5, abs=1e-15)
        assert gamma == pytest.approx(np.sqrt(2.0) * np.pi / 4)

    def test_cosine_squared_law(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            x = lm.random_state(rng, 3)
            y = lm.random_state(rng, 3)
            gamma, prob = lm.geodesic_transition(x, y, hbar=0.7)
            assert np.cos(gamma / np.sqrt(2 * 0.7)) ** 2 == pytest.approx(prob, abs=1e-12)
            assert prob == pytest.approx(abs(x.overlap(y)) ** 2)


class TestRayProjector:
    def test_basis_state(self):
        proj = lm.ray_projector(lm.QuantumState([1, 0]))
        assert np.array_equal(proj.matrix, np.diag([1.0, 0.0]).astype(complex))

    def test_unnormalized_input(self):
        proj = lm.ray_projector(np.array([1.0, 1.0]))
        assert np.allclose(proj.matrix, 0.5 * np.ones((2, 2)), atol=1e-15)

    def test_phase_invariance(self):
        rng = np.random.default_rng(5)
        psi = lm.random_state(rng, 3)
        rotated = lm.QuantumState(np.exp(1j * np.pi / 3) * psi.amplitudes)
        a = lm.ray_projector(psi).matrix
        b = lm.ray_projector(rotated).matrix
        assert np.max(np.abs(a - b)) <= 1e-15

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            lm.RayProjector(np.eye(2))  # trace 2
        with pytest.raises(ValueError):
            lm.RayProjector(0.5 * np.eye(2))  # not idempotent
        with pytest.raises(ValueError):
            lm.QuantumState([0.0, 0.0])
