import json

import numpy as np
import pytest

from xstates import jsonio
from xstates.errors import EvaluationError, InvalidArgument
from xstates.geometry import SectionPoint2, parametrize, section_embed2
from xstates.invariants import p_invariants
from xstates.verify import (
    ToleranceConfig,
    jacobian,
    numeric_rank,
    plan,
    rank_and_gap,
    run_suite,
    suite_dims,
    suite_separation2,
    suite_torsor,
)

FAST = ToleranceConfig(trials=3, seed=5)


class TestJacobian:
    def test_linear(self):
        a = np.random.default_rng(0).normal(size=(4, 3)) + 1j
        assert np.allclose(jacobian(lambda z: a @ z, np.zeros(3)), a, atol=1e-10)

    def test_square(self):
        assert abs(jacobian(lambda z: z**2, [3.0])[0, 0] - 6) < 1e-9

    def test_holomorphic_complex_point(self):
        z0 = 1 + 2j
        assert abs(jacobian(lambda z: z**3, [z0])[0, 0] - 3 * z0**2) < 1e-8

    def test_non_finite(self):
        with np.errstate(divide="ignore", invalid="ignore"), pytest.raises(EvaluationError):
            jacobian(lambda z: 1 / (z - z), [1.0])

    def test_p_on_section(self):
        # hand derivatives of (x^2, y^2, l3 x y, sum l^2, l1 l2 l3)
        x, y, l1, l2, l3 = 2, 3, 1, 2, 5

        def f(z):
            return p_invariants(section_embed2(SectionPoint2.from_vector(z))).vector()

        jac = jacobian(f, [x, y, l1, l2, l3])
        expected = np.array(
            [
                [2 * x, 0, 0, 0, 0],
                [0, 2 * y, 0, 0, 0],
                [l3 * y, l3 * x, 0, 0, x * y],
                [0, 0, 2 * l1, 2 * l2, 2 * l3],
                [0, 0, l2 * l3, l1 * l3, l1 * l2],
            ]
        )
        assert np.allclose(jac, expected, atol=1e-7)


class TestRank:
    def test_examples(self):
        assert numeric_rank(np.eye(5)) == 5
        assert numeric_rank(np.outer(np.arange(1, 8), np.arange(1, 5))) == 1
        assert numeric_rank(np.zeros((3, 3))) == 0

    def test_gap(self):
        r, gap = rank_and_gap(np.diag([1, 1e-2, 1e-12]))
        assert r == 2 and gap == pytest.approx(1e10)
        assert rank_and_gap(np.eye(3))[1] == float("inf")

    def test_parametrization_rank_two_qubits(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=13) + 1j * rng.normal(size=13)
        jac = jacobian(lambda v: parametrize(2, v[:6], v[6:]), z)
        assert numeric_rank(jac) == 11


class TestConfig:
    def test_defaults(self):
        cfg = ToleranceConfig()
        assert (cfg.fd_step, cfg.rank_rel_tol, cfg.residual_tol) == (1e-6, 1e-6, 1e-8)
        assert cfg.trials_for("torsor") == 1000

    @pytest.mark.parametrize("kw", [{"fd_step": 0}, {"residual_tol": -1}, {"trials": 0}])
    def test_rejects(self, kw):
        with pytest.raises(InvalidArgument):
            ToleranceConfig(**kw)


class TestSuites:
    @pytest.mark.parametrize("n, ranks", [(2, (11, 6, 5)), (3, (37, 9, 28))])
    def test_dims(self, n, ranks):
        r = suite_dims(n, FAST)
        assert r.passed
        assert set(r.observed["param_ranks"]) == {ranks[0]}
        assert set(r.observed["orbit_ranks"]) == {ranks[1]}
        assert set(r.observed["differences"]) == {ranks[2]}
        assert r.gap_audit >= 1e3

    def test_dims_range(self):
        with pytest.raises(InvalidArgument):
            suite_dims(5, FAST)

    @pytest.mark.parametrize("name", ["invariance", "independence", "relations", "pattern"])
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_n_suites(self, name, n):
        assert run_suite(name, n, FAST).passed

    def test_independence_values(self):
        r = run_suite("independence", 3, FAST)
        assert r.observed["quotient_rank"] == [8] and r.observed["wprime_rank"] == [5]
        assert r.gap_audit >= 1e3

    def test_torsor(self):
        r = suite_torsor(FAST)
        assert r.passed and r.observed["rank_one_rejected"]

    def test_separation(self):
        r = suite_separation2(ToleranceConfig(trials=20, seed=3))
        assert r.passed and r.observed["failing_seeds"] == []

    def test_failure_is_reported(self):
        # an absurdly strict residual tolerance must fail, not raise
        r = run_suite("invariance", 2, ToleranceConfig(trials=2, residual_tol=1e-300))
        assert not r.passed

    def test_unknown(self):
        with pytest.raises(InvalidArgument):
            run_suite("nope", 2, FAST)

    def test_report_shape(self):
        d = run_suite("pattern", 2, FAST).to_dict()
        assert set(d) == {"suite", "n", "seed", "trials", "expected", "observed", "gap_audit", "pass"}
        json.loads(jsonio.dumps(d))

    def test_deterministic_across_workers(self):
        serial = jsonio.dumps(run_suite("dims", 2, ToleranceConfig(trials=4, seed=9)).to_dict())
        pooled = jsonio.dumps(run_suite("dims", 2, ToleranceConfig(trials=4, seed=9, workers=3)).to_dict())
        assert serial == pooled

    def test_plan_order(self):
        jobs = plan(["torsor", "dims", "separation"], [3, 2])
        assert jobs == [("dims", 2), ("dims", 3), ("separation", 2), ("torsor", None)]
