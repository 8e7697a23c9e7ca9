"""Numerical verification suites.

Every suite takes explicit seeds, derives per-trial generators as
``default_rng(seed + trial)`` and returns a :class:`SuiteReport`. Trials are
independent, so they may run on a thread pool; results are merged in trial
order, which keeps reports identical regardless of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bloch import from_bloch, to_bloch
from .errors import EvaluationError, InvalidArgument, NotGeneric, ReductionFailed
from .geometry import (
    dim_formulas,
    fiber_tensor,
    in_section_orbit,
    parametrize,
    random_fiber_point,
    random_x_matrix,
    random_xstate,
    random_xt_point,
    reduce_to_section2,
    xt_from_tensor,
    XTPoint,
    fiber_embed,
    is_admissible,
    is_x_pattern,
    lift_xT,
)
from .group import (
    L_Z,
    LIE_BASIS,
    REFLECTION,
    LieTangent,
    WeylElement,
    act,
    act_tensor,
    central_element,
    infinitesimal_tensor,
    random_rotation,
    so2_from_gm,
    weyl_embed,
    weyl_sample,
)
from .invariants import (
    aux_dtab,
    diagonal_residuals,
    eta_reconstruct,
    loop_residual,
    p_from_parts,
    p_invariants,
    quotient_coords,
    rho_residual,
    torsor_recover,
    wprime_coords,
)

GAP_MIN = 1e3
IDENTITY_TOL = 1e-10
TORSOR_TOL = 1e-9
SEPARATION_TOL = 1e-6
MAX_RESAMPLE = 16

DEFAULT_TRIALS = {
    "dims": 20,
    "invariance": 100,
    "independence": 20,
    "torsor": 1000,
    "separation": 200,
    "relations": 100,
    "pattern": 1000,
}


@dataclass(frozen=True)
class ToleranceConfig:
    fd_step: float = 1e-6
    rank_rel_tol: float = 1e-6
    residual_tol: float = 1e-8
    trials: int | None = None
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if min(self.fd_step, self.rank_rel_tol, self.residual_tol) <= 0:
            raise InvalidArgument("tolerances must be positive")
        if self.trials is not None and self.trials < 1:
            raise InvalidArgument("trials must be >= 1")

    def trials_for(self, suite: str) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS[suite]


@dataclass
class SuiteReport:
    suite: str
    n: int | None
    seed: int
    trials: int
    expected: dict = field(default_factory=dict)
    observed: dict = field(default_factory=dict)
    gap_audit: float | None = None
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "expected": self.expected,
            "observed": self.observed,
            "gap_audit": self.gap_audit,
            "pass": self.passed,
        }


# ---------------------------------------------------------------------------
# numerical primitives


def jacobian(f: Callable, point, step: float = 1e-6) -> np.ndarray:
    """Central differences along each real coordinate direction.

    For holomorphic f this is the complex Jacobian with O(step^2) error.
    """
    point = np.asarray(point, dtype=complex)
    cols = []
    for k in range(point.size):
        e = np.zeros_like(point)
        e[k] = step
        hi = np.asarray(f(point + e), dtype=complex)
        lo = np.asarray(f(point - e), dtype=complex)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise EvaluationError(f"non-finite evaluation along coordinate {k}")
        cols.append((hi - lo) / (2 * step))
    return np.array(cols).T


def singular_values(m) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def numeric_rank(m, rel_tol: float = 1e-6) -> int:
    return rank_and_gap(m, rel_tol)[0]


def rank_and_gap(m, rel_tol: float = 1e-6) -> tuple[int, float]:
    """Rank by relative threshold, and the ratio last-kept / first-dropped singular value."""
    s = singular_values(m)
    if s.size == 0 or s[0] == 0:
        return 0, math.inf
    r = int(np.sum(s > rel_tol * s[0]))
    if r == s.size:
        return r, math.inf
    return r, float(s[r - 1] / max(s[r], 1e-300))


def _complex_normal(rng, size, scale=1.0):
    return (rng.normal(size=size) + 1j * rng.normal(size=size)) * (scale / np.sqrt(2))


def _relative_dev(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / (1 + np.max(np.abs(b))))


def _map_trials(fn, seed: int, trials: int, workers: int) -> list:
    seeds = [seed + i for i in range(trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, seeds))
    return [fn(s) for s in seeds]


def _min_gap(gaps) -> float | None:
    finite = [g for g in gaps if math.isfinite(g)]
    return min(finite) if finite else None


# ---------------------------------------------------------------------------
# suites


def _dims_trial(n: int, cfg: ToleranceConfig, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    dims = dim_formulas(n)
    nlie = 3 * n
    for attempt in range(MAX_RESAMPLE):
        point = np.concatenate([_complex_normal(rng, nlie, 0.7), _complex_normal(rng, dims.dim_fiber)])

        def f(z):
            return parametrize(n, z[:nlie], z[nlie:])

        ranks = []
        for step in (cfg.fd_step, cfg.fd_step * 2, cfg.fd_step / 2):
            ranks.append(rank_and_gap(jacobian(f, point, step), cfg.rank_rel_tol))
        param_rank, gap = ranks[0]
        stable = len({r for r, _ in ranks}) == 1

        state = act_tensor(_exp_blocks(point[:nlie]), fiber_tensor(n, point[nlie:]))
        cols = []
        for q in range(n):
            for gen in LIE_BASIS:
                gens = [np.zeros((3, 3), dtype=complex) for _ in range(n)]
                gens[q] = gen
                cols.append(infinitesimal_tensor(gens, state).reshape(-1))
        orbit_rank, orbit_gap = rank_and_gap(np.array(cols).T, cfg.rank_rel_tol)
        gap_all = min(gap, orbit_gap)
        if gap_all >= GAP_MIN and stable:
            break
    return {
        "param_rank": param_rank,
        "orbit_rank": orbit_rank,
        "difference": param_rank - orbit_rank,
        "gap": gap_all,
        "stable": stable,
        "resamples": attempt,
    }


def _exp_blocks(lie_coords):
    return LieTangent.from_coords(lie_coords).exp().blocks


def suite_dims(n: int, cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """Parametrization rank, orbit rank and their difference at random X-states."""
    if not 2 <= n <= 4:
        raise InvalidArgument("suite_dims supports 2 <= n <= 4")
    dims = dim_formulas(n)
    trials = cfg.trials_for("dims")
    rows = _map_trials(lambda s: _dims_trial(n, cfg, s), cfg.seed, trials, cfg.workers)
    expected = {
        "param_rank": dims.dim_variety,
        "orbit_rank": 3 * n,
        "difference": dims.trdeg,
        "dimF_plus_4n_minus_4": dims.trdeg,
    }
    observed = {
        "param_ranks": [r["param_rank"] for r in rows],
        "orbit_ranks": [r["orbit_rank"] for r in rows],
        "differences": [r["difference"] for r in rows],
        "fd_step_stable": all(r["stable"] for r in rows),
        "resamples": sum(r["resamples"] for r in rows),
        "dimF_plus_4n_minus_4": dims.dim_F + 4 * n - 4,
    }
    gap = _min_gap(r["gap"] for r in rows)
    passed = (
        all(r["param_rank"] == dims.dim_variety for r in rows)
        and all(r["orbit_rank"] == 3 * n for r in rows)
        and all(r["difference"] == dims.trdeg for r in rows)
        and observed["fd_step_stable"]
        and observed["dimF_plus_4n_minus_4"] == dims.trdeg
        and (gap is None or gap >= GAP_MIN)
    )
    return SuiteReport("dims", n, cfg.seed, trials, expected, observed, gap, passed)


def _p_tensor(t: np.ndarray) -> np.ndarray:
    v, w, c = t[1:, 0], t[0, 1:], t[1:, 1:]
    return p_from_parts(v, w, c).vector()


def _invariance_trial(n: int, trials: int, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    out = {}
    if n == 2:
        state, _ = random_xstate(2, rng)
        base = _p_tensor(state.tensor)
        worst = 0.0
        for _ in range(trials):
            g = random_rotation(2, rng)
            worst = max(worst, _relative_dev(_p_tensor(act_tensor(g.blocks, state.tensor)), base))
        out["p"] = worst
    p = random_fiber_point(n, rng)
    t = fiber_embed(p).tensor
    base = quotient_coords(xt_from_tensor(t)).vector()
    worst = 0.0
    for _ in range(trials):
        w = weyl_embed(weyl_sample(n, rng, with_reflection=True))
        moved = act_tensor(w.blocks, t)
        worst = max(worst, _relative_dev(quotient_coords(xt_from_tensor(moved)).vector(), base))
    # pure reflection on a random qubit, always exercised
    k = int(rng.integers(n))
    planar = [np.eye(2, dtype=complex) for _ in range(n)]
    planar[k] = REFLECTION
    moved = act_tensor(weyl_embed(WeylElement(planar)).blocks, t)
    worst = max(worst, _relative_dev(quotient_coords(xt_from_tensor(moved)).vector(), base))
    out["quotient"] = worst
    central = act_tensor(weyl_embed(central_element(n)).blocks, t)
    out["central"] = float(np.max(np.abs(central - t)))
    return out


def suite_invariance(n: int, cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """p under G (n = 2) and quotient_coords under N, plus the central element."""
    if n < 2:
        raise InvalidArgument("suite_invariance needs n >= 2")
    trials = cfg.trials_for("invariance")
    rows = _map_trials(lambda s: _invariance_trial(n, trials, s), cfg.seed, trials, cfg.workers)
    observed = {
        "quotient_max_deviation": max(r["quotient"] for r in rows),
        "central_max_deviation": max(r["central"] for r in rows),
    }
    expected = {"quotient_max_deviation": f"< {cfg.residual_tol:g}", "central_max_deviation": "< 1e-12"}
    if n == 2:
        observed["p_max_deviation"] = max(r["p"] for r in rows)
        expected["p_max_deviation"] = f"< {cfg.residual_tol:g}"
    passed = (
        observed["quotient_max_deviation"] < cfg.residual_tol
        and observed["central_max_deviation"] < 1e-12
        and observed.get("p_max_deviation", 0.0) < cfg.residual_tol
    )
    return SuiteReport("invariance", n, cfg.seed, trials, expected, observed, None, passed)


def _wprime_orbit_rank(xt: XTPoint, rel_tol: float) -> tuple[int, float]:
    t = fiber_embed(lift_xT(xt)).tensor
    cols = []
    for q in range(xt.n):
        gens = [np.zeros((3, 3), dtype=complex) for _ in range(xt.n)]
        gens[q] = L_Z
        cols.append(xt_from_tensor(infinitesimal_tensor(gens, t)).vector())
    return rank_and_gap(np.array(cols).T, rel_tol)


def _dup_audit(jac: np.ndarray, rel_tol: float) -> tuple[int, float]:
    """Rank and gap of jac with its first row repeated.

    A full-row-rank Jacobian rejects no singular value, so the gap audit is
    taken on this control, whose exact rank equals the original row count.
    """
    return rank_and_gap(np.vstack([jac, jac[:1]]), rel_tol)


def _independence_trial(n: int, cfg: ToleranceConfig, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    out = {}
    for _ in range(MAX_RESAMPLE):
        gaps = []
        if n == 2:
            point = np.concatenate([_complex_normal(rng, 6, 0.7), _complex_normal(rng, 7)])

            def pchain(z):
                return _p_tensor(act_tensor(_exp_blocks(z[:6]), fiber_tensor(2, z[6:])))

            jac = jacobian(pchain, point, cfg.fd_step)
            out["p_rank"] = numeric_rank(jac, cfg.rank_rel_tol)
            out["p_dup_rank"], gp = _dup_audit(jac, cfg.rank_rel_tol)
            gaps.append(gp)
        xt = random_xt_point(n, rng)

        def qmap(z):
            return quotient_coords(XTPoint.from_vector(n, z)).vector()

        jq = jacobian(qmap, xt.vector(), cfg.fd_step)
        out["quotient_rank"] = numeric_rank(jq, cfg.rank_rel_tol)
        _, gq = _dup_audit(jq, cfg.rank_rel_tol)
        out["wprime_orbit_rank_xT"], go = _wprime_orbit_rank(xt, cfg.rank_rel_tol)

        blocks = xt.vector()[n:]
        alphas = xt.vector()[:n]

        def wmap(z):
            return wprime_coords(XTPoint.from_vector(n, np.concatenate([alphas, z])))

        jw = jacobian(wmap, blocks, cfg.fd_step)
        out["wprime_rank"] = numeric_rank(jw, cfg.rank_rel_tol)
        _, gw = _dup_audit(jw, cfg.rank_rel_tol)
        gaps += [gq, go, gw]
        out["gap"] = min(gaps)
        if out["gap"] >= GAP_MIN:
            break
    return out


def suite_independence(n: int, cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """Jacobian ranks of p (n = 2), the quotient coordinates, and the W'-stage coordinates."""
    if n < 2:
        raise InvalidArgument("suite_independence needs n >= 2")
    trials = cfg.trials_for("independence")
    rows = _map_trials(lambda s: _independence_trial(n, cfg, s), cfg.seed, trials, cfg.workers)
    expected = {
        "quotient_rank": 4 * n - 4,
        "wprime_orbit_rank_xT": n,
        "quotient_plus_orbit": 5 * n - 4,
        "wprime_rank": 3 * n - 4,
    }
    keys = ["quotient_rank", "wprime_orbit_rank_xT", "wprime_rank"]
    if n == 2:
        expected.update({"p_rank": 5, "p_dup_rank": 5})
        keys += ["p_rank", "p_dup_rank"]
    observed = {k: sorted({r[k] for r in rows}) for k in keys}
    observed["quotient_plus_orbit"] = sorted({r["quotient_rank"] + r["wprime_orbit_rank_xT"] for r in rows})
    gap = _min_gap(r["gap"] for r in rows)
    passed = all(observed[k] == [v] for k, v in expected.items()) and (gap is None or gap >= GAP_MIN)
    return SuiteReport("independence", n, cfg.seed, trials, expected, observed, gap, passed)


def _torsor_trial(trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    while True:
        m = _complex_normal(rng, (2, 2))
        if abs(np.linalg.det(m)) > 1e-3:
            break
    lam = np.exp(_complex_normal(rng, None, 0.7))
    g0 = so2_from_gm(lam)
    g = torsor_recover(m, g0 @ m)
    return {
        "relation": aux_dtab(m).relation(),
        "recovery": _relative_dev(g, g0),
    }


def suite_torsor(cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """(delta, t, a, b) relation and recovery of planted left rotations."""
    trials = cfg.trials_for("torsor")
    rows = _map_trials(_torsor_trial, cfg.seed, trials, cfg.workers)
    rank_one = np.outer([1.0, 2.0], [3.0, -1.0]).astype(complex)
    try:
        torsor_recover(rank_one, rank_one)
        degenerate_rejected = False
    except Exception as exc:  # noqa: BLE001 - any rejection is reported
        degenerate_rejected = type(exc).__name__ == "Degenerate"
    observed = {
        "relation_max_residual": max(r["relation"] for r in rows),
        "recovery_max_error": max(r["recovery"] for r in rows),
        "rank_one_rejected": degenerate_rejected,
    }
    expected = {
        "relation_max_residual": f"< {IDENTITY_TOL:g}",
        "recovery_max_error": f"< {TORSOR_TOL:g}",
        "rank_one_rejected": True,
    }
    passed = (
        observed["relation_max_residual"] < IDENTITY_TOL
        and observed["recovery_max_error"] < TORSOR_TOL
        and degenerate_rejected
    )
    return SuiteReport("torsor", None, cfg.seed, trials, expected, observed, None, passed)


def _separation_trial(cfg: ToleranceConfig, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    b1, _ = random_xstate(2, rng)
    b2 = act(random_rotation(2, rng), b1)
    p1, p2 = p_invariants(b1).vector(), p_invariants(b2).vector()
    same_p = _relative_dev(p2, p1) < cfg.residual_tol
    try:
        _, s1 = reduce_to_section2(b1)
        _, s2 = reduce_to_section2(b2)
        matched = in_section_orbit(s1, s2, SEPARATION_TOL)
    except (NotGeneric, ReductionFailed):
        matched = False
    c, _ = random_xstate(2, rng)
    false_match = _relative_dev(p_invariants(c).vector(), p1) < SEPARATION_TOL
    return {"matched": bool(same_p and matched), "false_match": bool(false_match)}


def suite_separation2(cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """Planted same-orbit pairs match through the section orbit; independent pairs do not."""
    trials = cfg.trials_for("separation")
    rows = _map_trials(lambda s: _separation_trial(cfg, s), cfg.seed, trials, cfg.workers)
    failed = [cfg.seed + i for i, r in enumerate(rows) if not r["matched"]]
    false = [cfg.seed + i for i, r in enumerate(rows) if r["false_match"]]
    observed = {
        "planted_matched": trials - len(failed),
        "independent_false_matches": len(false),
        "failing_seeds": failed + false,
    }
    expected = {"planted_matched": trials, "independent_false_matches": 0}
    passed = not failed and not false
    return SuiteReport("separation", 2, cfg.seed, trials, expected, observed, None, passed)


def _relations_trial(n: int, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    xt = random_xt_point(n, rng)
    out = {"diagonal": max(diagonal_residuals(xt)), "loop2": 0.0, "loop3": 0.0, "rho": 0.0, "eta": 0.0}
    m = n - 1
    for j in range(1, m + 1):
        for k in range(j + 1, m + 1):
            out["loop2"] = max(out["loop2"], loop_residual(xt, [j, k]))
            for l in range(k + 1, m + 1):
                if j == 1:
                    out["loop3"] = max(out["loop3"], loop_residual(xt, [j, k, l]), loop_residual(xt, [j, l, k]))
    q = quotient_coords(xt)
    for j in range(2, n):
        out["rho"] = max(out["rho"], rho_residual(xt, j))
        target = xt.alphas[j - 1] ** 2
        out["eta"] = max(out["eta"], abs(eta_reconstruct(q, j) - target) / abs(target))
    return out


def suite_relations(n: int, cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """Diagonal and loop relations, rho_j = 0, and eta_j reconstruction on random X_T points."""
    if n < 2:
        raise InvalidArgument("suite_relations needs n >= 2")
    trials = cfg.trials_for("relations")
    rows = _map_trials(lambda s: _relations_trial(n, s), cfg.seed, trials, cfg.workers)
    checks = ["diagonal"]
    if n >= 3:
        checks += ["loop2", "rho", "eta"]
    if n >= 4:
        checks += ["loop3"]
    observed = {f"{c}_max_residual": max(r[c] for r in rows) for c in checks}
    expected = {
        f"{c}_max_residual": f"< {cfg.residual_tol if c == 'eta' else IDENTITY_TOL:g}" for c in checks
    }
    passed = all(
        observed[f"{c}_max_residual"] < (cfg.residual_tol if c == "eta" else IDENTITY_TOL) for c in checks
    )
    return SuiteReport("relations", n, cfg.seed, trials, expected, observed, None, passed)


def _pattern_trial(n: int, trial_seed: int) -> dict:
    rng = np.random.default_rng(trial_seed)
    d = from_bloch(fiber_embed(random_fiber_point(n, rng)))
    fiber_ok = is_x_pattern(d, 1e-12)
    b = to_bloch(random_x_matrix(n, rng))
    leak = max([abs(c) for w, c in b.components.items() if not is_admissible(w)], default=0.0)
    return {"fiber_ok": fiber_ok, "leak": leak}


def suite_pattern(n: int, cfg: ToleranceConfig = ToleranceConfig()) -> SuiteReport:
    """Fiber points have the X pattern; X-patterned matrices live on admissible words."""
    trials = cfg.trials_for("pattern")
    rows = _map_trials(lambda s: _pattern_trial(n, s), cfg.seed, trials, cfg.workers)
    observed = {
        "fiber_to_pattern_failures": sum(not r["fiber_ok"] for r in rows),
        "pattern_to_fiber_max_leak": max(r["leak"] for r in rows),
    }
    expected = {"fiber_to_pattern_failures": 0, "pattern_to_fiber_max_leak": "<= 1e-12"}
    passed = observed["fiber_to_pattern_failures"] == 0 and observed["pattern_to_fiber_max_leak"] <= 1e-12
    return SuiteReport("pattern", n, cfg.seed, trials, expected, observed, None, passed)


SUITE_NAMES = ("dims", "invariance", "independence", "torsor", "separation", "relations", "pattern")


def run_suite(name: str, n: int | None, cfg: ToleranceConfig) -> SuiteReport:
    if name == "dims":
        return suite_dims(n, cfg)
    if name == "invariance":
        return suite_invariance(n, cfg)
    if name == "independence":
        return suite_independence(n, cfg)
    if name == "torsor":
        return suite_torsor(cfg)
    if name == "separation":
        return suite_separation2(cfg)
    if name == "relations":
        return suite_relations(n, cfg)
    if name == "pattern":
        return suite_pattern(n, cfg)
    raise InvalidArgument(f"unknown suite {name!r}")


def plan(names, ns) -> list[tuple[str, int | None]]:
    """Canonical (suite, n) order: sorted by suite name, then n; n-free suites once."""
    jobs = []
    for name in sorted(set(names)):
        if name in ("torsor",):
            jobs.append((name, None))
        elif name == "separation":
            jobs.append((name, 2))
        else:
            jobs.extend((name, n) for n in sorted(set(ns)))
    return jobs
