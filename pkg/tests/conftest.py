"""Session-scoped solves shared by the end-to-end tests.

The desk-scale recovery problem is solved once (plus once more at a much
tighter target, to stand in for the true minimizer) and the results feed
every test that checks convergence bounds against the trace.  The inner-loop
benchmark and prox-oracle sweeps are likewise run once and their per-iteration
potential streams kept, so the gap-soundness checks can replay them.
"""

import time

import numpy as np
import pytest

from iapg import (
    InnerConfig,
    OuterConfig,
    dual_pgd,
    iapg_solve,
    identity,
    op_norm_sq,
    scaled_l1,
)
from iapg.problems import build_sparse_l1_instance, build_tv_problem, ground_truth

# Desk-scale robust TV-l2 deblurring instance: a 4-tap box blur with enough
# noise that smoothing genuinely pays, and a TV weight calibrated so the
# active jump set settles early.  Every bound test reuses this one solve.
DESK = dict(n=256, l=4, eta=1.0, lam_box=0.2, sigma=0.1, seed=0)
DESK_SOLVER = dict(
    E0=1.0, p=2, rho_ratio=0.05, eps_stat=1e-8, max_iters=300, inner_s=1024
)


def _desk_setup():
    prob, f, spec, A = build_tv_problem(**DESK)
    B0 = 2.0 * op_norm_sq(prob.C, tol=1e-6)
    return prob, f, spec, A, B0


@pytest.fixture(scope="session")
def desk_solve():
    """Solve the desk instance once; report the trace, ledger and wall time."""
    prob, f, spec, A, B0 = _desk_setup()
    cfg = OuterConfig(B0=B0, **DESK_SOLVER)
    x0 = np.zeros(DESK["n"])
    t0 = time.perf_counter()
    x, trace, ledger = iapg_solve(f, spec, A, x0, cfg)
    wall = time.perf_counter() - t0
    return {
        "prob": prob,
        "f": f,
        "spec": spec,
        "A": A,
        "cfg": cfg,
        "x0": x0,
        "x": x,
        "trace": trace,
        "ledger": ledger,
        "wall": wall,
        "truth": ground_truth(DESK["n"]),
    }


@pytest.fixture(scope="session")
def desk_reference():
    """The same instance pushed to a 1e-12 target with ten times the budget.

    Its final point and best objective value stand in for (xbar, F*) when the
    value and stationarity bounds are evaluated.
    """
    prob, f, spec, A, B0 = _desk_setup()
    solver = dict(DESK_SOLVER, eps_stat=1e-12, max_iters=10 * DESK_SOLVER["max_iters"])
    cfg = OuterConfig(B0=B0, **solver)
    x0 = np.zeros(DESK["n"])
    x, trace, ledger = iapg_solve(f, spec, A, x0, cfg)
    return {
        "x_bar": x,
        "F_star": min(r.F for r in trace.records),
        "status": trace.status,
        "residual": trace.records[-1].residual,
    }


# Tolerance grid for the inner-loop complexity benchmark: 2^-8 down to 2^-32,
# thinning by 2^-4 per step.
BENCH_EXPONENTS = np.arange(8.0, 36.0, 4.0)
BENCH_TRIALS = 20
BENCH_SEED = 0


@pytest.fixture(scope="session")
def bench_runs():
    """Twenty seeded dual-descent runs at the tightest benchmark tolerance.

    Each run keeps the full (phi, psi) stream and the first iteration at
    which the gap crossed every grid level, mirroring the benchmark command.
    """
    grid = 2.0**-BENCH_EXPONENTS
    eps_tight = float(grid.min())
    n, eta, lam = 128, 2.0, 1.0
    runs = []
    t0 = time.perf_counter()
    for t in range(BENCH_TRIALS):
        rng = np.random.default_rng([BENCH_SEED, t])
        A, spec = build_sparse_l1_instance(n=n, eta=eta, seed=int(rng.integers(2**63)))
        y = rng.uniform(-eta, eta, n)
        first = np.full(grid.size, -1, dtype=np.int64)
        phis, psis = [], []

        def on_iter(j, phi, psi, z, v, tau, first=first, phis=phis, psis=psis):
            phis.append(phi)
            psis.append(psi)
            hit = (first < 0) & (phi + psi <= grid)
            if hit.any():
                first[hit] = j

        icfg = InnerConfig(
            eps_abs=eps_tight,
            rho=0.0,
            lam=lam,
            tau0=lam * op_norm_sq(A, seed=int(rng.integers(2**63))),
        )
        rep = dual_pgd(A, spec, y, y, y, icfg, record=on_iter)
        runs.append(
            {
                "report": rep,
                "first": first,
                "phis": np.array(phis),
                "psis": np.array(psis),
                "eps_abs": eps_tight,
                "rho": 0.0,
                "y_ref": y,
            }
        )
    return {"runs": runs, "grid": grid, "wall": time.perf_counter() - t0}


PROX_ORACLE_TRIALS = 500
PROX_ORACLE_SEED = 11


@pytest.fixture(scope="session")
def prox_oracle_runs():
    """Dual descent on tiny identity-operator instances with an exact answer.

    With A = I the certified point must match the soft threshold, so these
    runs double as a closed-form oracle for the solver and as more gap
    streams for the soundness sweep.
    """
    runs = []
    for t in range(PROX_ORACLE_TRIALS):
        rng = np.random.default_rng([PROX_ORACLE_SEED, t])
        n = int(rng.integers(1, 17))
        eta = float(rng.uniform(0.2, 2.0))
        lam = float(rng.uniform(0.2, 2.0))
        y = rng.uniform(-5.0, 5.0, n)
        phis, psis = [], []

        def on_iter(j, phi, psi, z, v, tau, phis=phis, psis=psis):
            phis.append(phi)
            psis.append(psi)

        icfg = InnerConfig(eps_abs=1e-12, rho=0.0, lam=lam)
        rep = dual_pgd(identity(n), scaled_l1(eta, n), y, y, y, icfg, record=on_iter)
        runs.append(
            {
                "report": rep,
                "phis": np.array(phis),
                "psis": np.array(psis),
                "eps_abs": 1e-12,
                "rho": 0.0,
                "y_ref": y,
                "y_plus": y,
                "lam": lam,
                "eta": eta,
            }
        )
    return runs
