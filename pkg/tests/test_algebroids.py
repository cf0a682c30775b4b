import itertools

import numpy as np
import pytest

import liemech as lm
from liemech.numdiff import directional_derivative


def epsilon_tensor():
    # Independent Levi-Civita build from permutation parity.
    eps = np.zeros((3, 3, 3))
    for perm in itertools.permutations(range(3)):
        sign = 1
        p = list(perm)
        for i in range(3):
            while p[i] != i:
                j = p[i]
                p[i], p[j] = p[j], p[i]
                sign = -sign
        eps[perm] = sign
    return eps


def corrupted_so3():
    # Single-entry corruption: the antisymmetric partner is left untouched.
    bad = lm.levi_civita().copy()
    bad[2, 0, 1] = -1.0
    return lm.lie_algebra_algebroid(bad, name="corrupted")


class TestBracket:
    def test_tangent_coordinate_fields(self):
        A = lm.tangent_algebroid(1)
        s1 = lm.AlgebroidSection([1.0])
        s2 = lm.AlgebroidSection(lambda x: np.array([x[0]]))
        out = lm.bracket(A, s1, s2, [1.0])
        assert np.allclose(out, [1.0], atol=1e-9)

    def test_equal_sections_vanish(self):
        A = lm.tangent_algebroid(2)
        s = lm.AlgebroidSection(lambda x: np.array([np.sin(x[0]), x[1] ** 2]))
        out = lm.bracket(A, s, s, [0.4, -0.3])
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_so3_basis_pair(self):
        A = lm.so3_algebroid()
        e = lm.basis_sections(A)
        out = lm.bracket(A, e[0], e[1], [0.0])
        eps = epsilon_tensor()
        expected = np.einsum("abg,a,b->g", eps, [1.0, 0, 0], [0, 1.0, 0])
        assert np.allclose(out, expected, atol=1e-12)
        assert np.allclose(expected, [0, 0, 1.0])

    def test_antisymmetry_random_sections(self):
        rng = np.random.default_rng(11)
        for A in (lm.tangent_algebroid(2), lm.so3_algebroid(), lm.affine_algebroid()):
            r = A.fiber_rank
            c1 = rng.normal(size=(r, A.base_dim))
            c2 = rng.normal(size=(r, A.base_dim))
            s1 = lm.AlgebroidSection(lambda x, c=c1: np.sin(c @ x) + 0.5)
            s2 = lm.AlgebroidSection(lambda x, c=c2: np.cos(c @ x) - 0.2)
            x = rng.normal(size=A.base_dim)
            fwd = lm.bracket(A, s1, s2, x)
            bwd = lm.bracket(A, s2, s1, x)
            assert np.max(np.abs(fwd + bwd)) <= 1e-9

    def test_jacobiator_constant_sections_so3(self):
        rng = np.random.default_rng(5)
        A = lm.so3_algebroid()
        u, v, w = (lm.AlgebroidSection(rng.normal(size=3)) for _ in range(3))
        x = [0.0]
        jac = (lm.bracket(A, u, lm.AlgebroidSection(lm.bracket(A, v, w, x)), x)
               + lm.bracket(A, v, lm.AlgebroidSection(lm.bracket(A, w, u, x)), x)
               + lm.bracket(A, w, lm.AlgebroidSection(lm.bracket(A, u, v, x)), x))
        assert np.max(np.abs(jac)) <= 1e-12

    def test_dimension_mismatch(self):
        A = lm.so3_algebroid()
        with pytest.raises(ValueError):
            lm.bracket(A, lm.AlgebroidSection([1.0, 0.0]), lm.AlgebroidSection([1.0, 0.0]), [0.0])
        with pytest.raises(ValueError):
            lm.bracket(A, lm.AlgebroidSection([1.0, 0, 0]), lm.AlgebroidSection([0, 1.0, 0]), [0.0, 0.0])


class TestStructureEquations:
    def test_tangent_exact(self):
        A = lm.tangent_algebroid(3)
        pts = np.random.default_rng(0).normal(size=(10, 3))
        rep = lm.check_structure_equations(A, pts, 1e-6)
        assert rep.passed
        assert rep.max_first_equation == 0.0
        assert rep.max_second_equation == 0.0

    def test_so3_exact(self):
        rep = lm.check_structure_equations(lm.so3_algebroid(), [[0.0], [1.0]], 1e-6)
        assert rep.passed
        assert rep.max_second_equation == 0.0

    def test_corrupted_epsilon_fails(self):
        rep = lm.check_structure_equations(corrupted_so3(), [[0.0]], 1e-6)
        assert not rep.passed
        assert rep.max_second_equation > 0.0
        # Brute-force cyclic sum with the corrupted tensor.
        c = corrupted_so3().structure_at([0.0])
        worst = 0.0
        for nu, a, b, g in itertools.product(range(3), repeat=4):
            total = 0.0
            for m in range(3):
                total += (c[m, b, g] * c[nu, a, m] + c[m, g, a] * c[nu, b, m]
                          + c[m, a, b] * c[nu, g, m])
            worst = max(worst, abs(total))
        assert rep.max_second_equation == pytest.approx(worst, abs=1e-12)

    def test_builtins_at_random_points(self):
        rng = np.random.default_rng(1)
        for name in ("tangent-R3", "so3-point", "affine-line"):
            A = lm.named_algebroid(name)
            pts = rng.normal(size=(100, A.base_dim))
            rep = lm.check_structure_equations(A, pts, 1e-6)
            assert rep.passed, name

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            lm.check_structure_equations(lm.so3_algebroid(), [], 1e-6)


class TestDifferential:
    def test_zero_form_is_anchor_derivative(self):
        A = lm.tangent_algebroid(2)
        f = lm.AlgebroidForm(0, lambda x: np.sin(x[0]) * x[1])
        s = lm.AlgebroidSection([1.0, 2.0])
        x = np.array([0.3, -0.7])
        val = lm.differential(A, f, [s], x)
        oracle = directional_derivative(lambda y: np.sin(y[0]) * y[1], x, [1.0, 2.0], 1e-6)
        assert abs(val - float(oracle)) <= 1e-8

    def test_coordinate_function_components(self):
        # d of a coordinate function evaluated on e_a gives the anchor row.
        A = lm.affine_algebroid()
        f = lm.AlgebroidForm(0, lambda x: x[0])
        e = lm.basis_sections(A)
        for x0 in (0.0, 0.7, -1.3):
            assert lm.differential(A, f, [e[0]], [x0]) == pytest.approx(1.0, abs=1e-9)
            assert lm.differential(A, f, [e[1]], [x0]) == pytest.approx(x0, abs=1e-9)

    def test_d_squared_zero_form_so3(self):
        rng = np.random.default_rng(2)
        A = lm.so3_algebroid()
        f = lm.AlgebroidForm(0, lambda x: float(np.sin(x[0]) + x[0] ** 2))
        df = lm.AlgebroidForm(1, lambda y: lm.differential_components(A, f, y))
        e = lm.basis_sections(A)
        for _ in range(5):
            i, j = rng.choice(3, size=2, replace=False)
            val = lm.differential(A, df, [e[i], e[j]], [rng.normal()])
            assert abs(val) <= 1e-6

    def test_d_squared_one_form_tangent(self):
        rng = np.random.default_rng(3)
        A = lm.tangent_algebroid(3)
        coef = rng.normal(size=(3, 3))
        mu = lm.AlgebroidForm(1, lambda x: np.sin(coef @ x))
        dmu = lm.AlgebroidForm(2, lambda y: lm.differential_components(A, mu, y))
        e = lm.basis_sections(A)
        val = lm.differential(A, dmu, e, rng.normal(size=3))
        assert abs(val) <= 1e-6

    def test_degree_and_arity_validation(self):
        A = lm.affine_algebroid()
        with pytest.raises(ValueError):
            lm.differential(A, lm.AlgebroidForm(3, lambda x: np.zeros((2, 2, 2))),
                            lm.basis_sections(A) * 2, [0.0])
        with pytest.raises(ValueError):
            lm.differential(A, lm.AlgebroidForm(0, 1.0), lm.basis_sections(A), [0.0])


class TestFormValidation:
    def test_antisymmetry_enforced_at_evaluation(self):
        rng = np.random.default_rng(6)
        raw = rng.normal(size=(3, 3))
        bad = lm.AlgebroidForm(2, raw)
        with pytest.raises(ValueError, match="antisymmetric"):
            bad.at([0.0])
        good = lm.AlgebroidForm(2, lm.antisymmetrize(raw))
        arr = good.at([0.0])
        assert np.allclose(arr, -arr.T)

    def test_degree_zero_accepts_scalars(self):
        f = lm.AlgebroidForm(0, 2.5)
        assert f.at([1.0, 2.0]) == 2.5


class TestLieDerivative:
    def test_zero_form(self):
        A = lm.tangent_algebroid(2)
        f = lm.AlgebroidForm(0, lambda x: x[0] * x[1])
        s = lm.AlgebroidSection([2.0, -1.0])
        x = np.array([0.5, 0.25])
        val = lm.lie_derivative(A, s, f, x)
        assert val == pytest.approx(2.0 * 0.25 - 1.0 * 0.5, abs=1e-9)

    def test_closed_form_reduces_to_d_of_contraction(self):
        A = lm.tangent_algebroid(2)
        f = lm.AlgebroidForm(0, lambda x: np.sin(x[0]) + x[1] ** 3)
        closed = lm.AlgebroidForm(1, lambda y: lm.differential_components(A, f, y))
        s = lm.AlgebroidSection(lambda x: np.array([x[1], 1.0]))
        x = np.array([0.2, 0.6])
        lie = lm.lie_derivative(A, s, closed, x)
        inner = lm.AlgebroidForm(
            0, lambda y: float(closed.at(y) @ s.at(y)))
        oracle = lm.differential_components(A, inner, x)
        assert np.max(np.abs(lie - oracle)) <= 1e-6

    def test_so3_one_form_against_direct_expansion(self):
        rng = np.random.default_rng(7)
        A = lm.so3_algebroid()
        mu_c = rng.normal(size=3)
        xv = rng.normal(size=3)
        mu = lm.AlgebroidForm(1, mu_c)
        s = lm.AlgebroidSection(xv)
        lie = lm.lie_derivative(A, s, mu, [0.0])
        # With a zero anchor and constant data both Cartan terms reduce to
        # bracket insertions: (L_X mu)(e_b) = -mu([X, e_b]).
        c = A.structure_at([0.0])
        oracle = -np.einsum("g,gab,a->b", mu_c, c, xv)
        assert np.max(np.abs(lie - oracle)) <= 1e-9


class TestDualPoisson:
    def test_canonical_pair(self):
        A = lm.tangent_algebroid(1)
        z = lm.DualCoordinates([0.2], [0.9])
        val = lm.dual_poisson(A, lambda q, p: q[0], lambda q, p: p[0], z)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_antisymmetry_diagonal(self):
        A = lm.so3_algebroid()
        rng = np.random.default_rng(4)
        z = lm.DualCoordinates(rng.normal(size=1), rng.normal(size=3))
        f = lambda q, p: float(np.sin(p[0]) + q[0] * p[1] ** 2)
        assert lm.dual_poisson(A, f, f, z) == pytest.approx(0.0, abs=1e-10)

    def test_so3_momentum_pair(self):
        A = lm.so3_algebroid()
        z = lm.DualCoordinates([0.0], [0.0, 0.0, 1.0])
        val = lm.dual_poisson(A, lambda q, p: p[0], lambda q, p: p[1], z)
        # Direct formula evaluation: -C^l_12 p_l.
        c = A.structure_at([0.0])
        oracle = -float(np.einsum("l,l->", c[:, 0, 1], z.p))
        assert val == pytest.approx(oracle, abs=1e-10)
        assert oracle == -1.0

    def test_leibniz_rule(self):
        rng = np.random.default_rng(9)
        for A in (lm.tangent_algebroid(2), lm.so3_algebroid()):
            n, r = A.base_dim, A.fiber_rank
            for _ in range(5):
                cf, cg, ch = (rng.normal(size=(n + r,)) for _ in range(3))
                f = lambda q, p, c=cf: float(c[:n] @ q + c[n:] @ p + (p[0] * q[0]))
                g = lambda q, p, c=cg: float(c[:n] @ q ** 2 + c[n:] @ p * p[0])
                h = lambda q, p, c=ch: float(c[:n] @ q + (c[n:] @ p) ** 2)
                z = lm.DualCoordinates(rng.normal(size=n), rng.normal(size=r))
                fg = lambda q, p: f(q, p) * g(q, p)
                lhs = lm.dual_poisson(A, fg, h, z)
                rhs = (f(z.q, z.p) * lm.dual_poisson(A, g, h, z)
                       + g(z.q, z.p) * lm.dual_poisson(A, f, h, z))
                assert abs(lhs - rhs) <= 1e-8

    def test_non_finite_gradient_raises(self):
        A = lm.tangent_algebroid(1)
        # Undefined on the negative-side probe of the central difference.
        f = lambda q, p: float(q[0]) if q[0] >= 0 else float("nan")
        z = lm.DualCoordinates([0.0], [1.0])
        with pytest.raises(lm.NumericalBlowupError):
            lm.dual_poisson(A, f, lambda q, p: p[0], z)

    def test_jacobi_identity_sampled(self):
        rng = np.random.default_rng(13)
        A = lm.so3_algebroid(fd_step=1e-4)
        for _ in range(5):
            coeffs = rng.normal(size=(3, 3))
            fns = [lambda q, p, c=c: float(c @ p + 0.3 * (c[0] * p[1]) ** 2) for c in coeffs]
            z = lm.DualCoordinates([0.0], rng.normal(size=3))
            def pb(a, b):
                return lambda q, p: lm.dual_poisson(A, a, b, lm.DualCoordinates(q, p))
            f, g, h = fns
            jac = (lm.dual_poisson(A, f, pb(g, h), z)
                   + lm.dual_poisson(A, g, pb(h, f), z)
                   + lm.dual_poisson(A, h, pb(f, g), z))
            assert abs(jac) <= 1e-6


class TestJsonLoading:
    def test_round_trip_constant(self, tmp_path):
        doc = {
            "base_dim": 3,
            "fiber_rank": 3,
            "anchor": np.eye(3).tolist(),
            "structure": np.zeros((3, 3, 3)).tolist(),
            "name": "flat",
        }
        path = tmp_path / "alg.json"
        import json
        path.write_text(json.dumps(doc))
        A = lm.load_algebroid(path)
        assert A.base_dim == 3 and A.fiber_rank == 3
        assert np.allclose(A.anchor_at([0, 0, 0]), np.eye(3))
        assert lm.check_structure_equations(A, [[0.1, 0.2, 0.3]], 1e-6).passed

    def test_named_builtin_fields(self):
        A = lm.algebroid_from_dict({"base_dim": 1, "fiber_rank": 3,
                                    "anchor": "zero", "structure": "so3"})
        assert np.allclose(A.structure_at([0.0]), lm.levi_civita())

    def test_invalid_documents(self):
        with pytest.raises(ValueError):
            lm.algebroid_from_dict({"base_dim": 2, "fiber_rank": 3,
                                    "anchor": "identity", "structure": "zero"})
        with pytest.raises(ValueError):
            lm.algebroid_from_dict({"base_dim": 1, "fiber_rank": 3, "anchor": "zero"})
        with pytest.raises(ValueError):
            lm.algebroid_from_dict({"base_dim": 1, "fiber_rank": 3, "anchor": "zero",
                                    "structure": "so3", "extra": 1})
        with pytest.raises(ValueError):
            lm.algebroid_from_dict({"base_dim": 1, "fiber_rank": 2, "anchor": "zero",
                                    "structure": "so3"})

    def test_named_algebroids(self):
        assert lm.named_algebroid("tangent-R4").base_dim == 4
        assert lm.named_algebroid("so3-point").fiber_rank == 3
        assert lm.named_algebroid("affine-line").name == "affine-line"
        with pytest.raises(ValueError):
            lm.named_algebroid("moebius")
