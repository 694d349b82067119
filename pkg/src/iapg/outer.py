"""Accelerated proximal gradient outer loop with inexact proximal steps.

Minimizes ``F(x) = f(x) + omega(A x)`` for smooth convex f.  Each outer
iteration extrapolates a momentum point, takes a gradient step, and evaluates
the proximal operator of ``omega(A.)`` *inexactly* through the dual loop of
:mod:`iapg.inner`, to a tolerance that is scheduled to decay fast enough for
the accelerated O(1/k^2) value rate to survive.  The smoothness estimate B is
calibrated by an Armijo test with doubling; the per-iteration constant L
relaxes geometrically between iterations, floored at a fixed fraction of the
largest constant seen.

Termination is on the proximal-gradient residual ``||x_k - y_k||``, which
bounds the distance to stationarity up to a known factor.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import zeta

from .inner import InnerConfig, dual_pgd
from .linops import op_norm_sq
from .prox import omega_eval


@dataclass(frozen=True)
class Smooth:
    """Smooth term interface: plain callables for the value and the gradient."""

    value: Callable
    gradient: Callable


@dataclass(frozen=True)
class OuterConfig:
    E0: float  # initial absolute inner tolerance
    p: float  # tolerance decay exponent, > 1
    rho_ratio: float  # relative-error weight: rho_k = rho_ratio * B_k
    B0: float  # initial smoothness estimate
    eps_stat: float  # exit threshold on ||x_k - y_k||
    max_iters: int  # largest outer iteration index
    r: float = 1.0 / 16.0  # floor ratio: L_k >= r * L_max
    s: int = 1024  # relaxation half-life of L between iterations
    B_cap: float = 2.0**1023
    inner_s: int = 4096  # relaxation half-life of the inner step constant
    inner_max_iters: int = 2**20
    keep_iterates: bool = False  # store x_k, y_k, x_circ_k on the trace
    # Seed each inner solve from the previous dual solution instead of a
    # fresh point.  The certificate the outer loop consumes is identical
    # either way (any feasible start is admissible for the inner theory),
    # but restarting cold re-pays the full duality gap at every k, which
    # multiplies the total inner work by orders of magnitude.
    warm_start: bool = True


@dataclass
class OuterState:
    """Mutable per-iteration solver state."""

    x_prev: np.ndarray
    x_circ_prev: np.ndarray
    alpha: float
    B: float
    rho_k: float
    L: float
    L_max: float
    k: int = 0


@dataclass(frozen=True)
class TraceRecord:
    k: int
    alpha: float
    B: float
    L: float
    eps_abs: float
    inner_iters: int  # all inner iterations spent at this k, retries included
    residual: float  # ||x_k - y_k||
    F: float
    gap: float


@dataclass
class OuterTrace:
    x_init: np.ndarray
    records: list = field(default_factory=list)
    status: str = "max-iters"  # "converged" | "max-iters" | "line-search-error"
    iterates: Optional[dict] = None  # {"x": [...], "y": [...], "x_circ": [...]}


@dataclass
class TheoryLedger:
    """Measured sequences needed to evaluate the convergence bounds.

    Entry i of every list belongs to outer iteration k = i.  ``beta`` is the
    momentum product alpha_k^2 L_k / L_0, ``R`` the accumulated tolerance
    mass E0 * (1 + sum_{l<=k} l^-p), ``sum_inv_sqrt_L`` the partial sum of
    L_i^{-1/2} over i = 1..k, and ``L_maxes`` the running maximum of L.
    """

    E0: float
    p: float
    L0: float = 0.0
    beta: list = field(default_factory=list)
    R: list = field(default_factory=list)
    sum_inv_sqrt_L: list = field(default_factory=list)
    L_maxes: list = field(default_factory=list)

    def beta_bounds(self, k):
        """Two-sided bracket for beta_k from the measured L sequence."""
        s = self.sum_inv_sqrt_L[k]
        root = math.sqrt(self.L0)
        return (1.0 + root * s) ** -2, (1.0 + 0.5 * root * s) ** -2

    def R_limit(self):
        """Limit of R as k grows: E0 * (1 + zeta(p))."""
        return self.E0 * (1.0 + float(zeta(self.p)))

    def value_bound(self, k, dist0_sq):
        """Bound on F(x_k) - F(xbar) given ||xbar - x_circ_{-1}||^2."""
        return self.beta[k] * (0.5 * self.L0 * dist0_sq + self.R[k])

    def stationarity_bound(self, k, dist0):
        """Bound on the residual ||x_k - y_k|| given ||xbar - x_circ_{-1}||."""
        q = math.sqrt(self.L0 / self.L_maxes[k])
        return 2.0 * q / (1.0 + 0.5 * k * q) * (
            dist0 + math.sqrt(2.0 * self.R[k] / self.L0)
        )


def momentum_point(x_circ_prev, x_prev, alpha):
    """Extrapolated point alpha * x_circ_prev + (1 - alpha) * x_prev."""
    return alpha * x_circ_prev + (1.0 - alpha) * x_prev


def eps_abs_schedule(k, L_k, L0, alpha_k, E0, p):
    """Absolute inner tolerance for iteration k: E0 at k=0, then beta_k * E0 * k^-p."""
    if k == 0:
        return E0
    return (L_k / L0) * alpha_k**2 * E0 * float(k) ** (-p)


def update_alpha(alpha_k, L_k, L_next):
    """Positive root of (1 - a) * alpha_k^2 * L_k = a^2 * L_next, always in (0, 1)."""
    if alpha_k <= 0 or L_k <= 0 or L_next <= 0:
        raise ValueError("update_alpha needs positive inputs")
    ratio = L_next / L_k
    a2 = alpha_k * alpha_k
    # rationalized quadratic root; no cancellation for small alpha_k
    return 2.0 * a2 / (a2 + math.sqrt(a2 * a2 + 4.0 * a2 * ratio))


def armijo_check(f_eval, f_grad_at_y, x_cand, y, B, f_y=None):
    """Descent test: f(x) - f(y) - <grad f(y), x - y> <= (B/2) ||x - y||^2.

    The comparison carries a relative float allowance: near convergence the
    candidate step is so short that both sides shrink below the rounding
    noise of f itself, and without the allowance an adequate B can fail by
    an ulp and double forever.
    """
    if f_y is None:
        f_y = f_eval(y)
    d = np.asarray(x_cand, dtype=float) - np.asarray(y, dtype=float)
    return bool(
        f_eval(x_cand) - f_y - float(np.asarray(f_grad_at_y) @ d)
        <= 0.5 * B * float(d @ d) + 1e-12 * (1.0 + abs(f_y))
    )


def backtrack_L(L_k, L_max, r, s):
    """Next step constant: max(2^(-1/s) * L_k, r * L_max)."""
    return max(2.0 ** (-1.0 / s) * L_k, r * L_max)


def extrapolate(x_prev, x_k, alpha):
    """Overshoot point x_prev + (x_k - x_prev) / alpha."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return x_prev + (np.asarray(x_k, dtype=float) - np.asarray(x_prev, dtype=float)) / alpha


def _validate(cfg):
    if cfg.p <= 1:
        raise ValueError("p must exceed 1")
    if not 0.0 < cfg.r <= 1.0:
        raise ValueError("r must lie in (0, 1]")
    if cfg.B0 <= 0 or cfg.E0 <= 0 or cfg.rho_ratio <= 0:
        raise ValueError("B0, E0 and rho_ratio must be positive")
    if cfg.s < 1 or cfg.inner_s < 1:
        raise ValueError("relaxation half-lives must be >= 1")


def iapg_solve(f, spec, A, x_init, cfg):
    """Minimize f(x) + omega(Ax) by inexact accelerated proximal gradient.

    Parameters
    ----------
    f : Smooth
        Convex, Lipschitz-smooth term (caller's responsibility).
    spec : RegularizerSpec
    A : LinearOperator
    x_init : array
        Starting point (also used as the initial overshoot point).
    cfg : OuterConfig

    Returns
    -------
    (x, trace, ledger)
        Final iterate, per-iteration :class:`OuterTrace` (whose ``status``
        reports how the run ended; inner-loop failures surface there too),
        and the :class:`TheoryLedger` of measured bound ingredients.
    """
    _validate(cfg)
    x_init = np.asarray(x_init, dtype=float)
    rho = cfg.rho_ratio
    st = OuterState(
        x_prev=x_init.copy(),
        x_circ_prev=x_init.copy(),
        alpha=1.0,
        B=float(cfg.B0),
        rho_k=rho * cfg.B0,
        L=(1.0 + rho) * cfg.B0,
        L_max=(1.0 + rho) * cfg.B0,
    )
    L0 = st.L  # rebound after iteration 0 in case its Armijo loop doubles B
    at_a_norm = op_norm_sq(A)

    trace = OuterTrace(x_init=x_init.copy())
    if cfg.keep_iterates:
        trace.iterates = {"x": [], "y": [], "x_circ": []}
    ledger = TheoryLedger(E0=cfg.E0, p=cfg.p)
    R_k = cfg.E0
    S_k = 0.0
    x = st.x_prev
    v_warm = None  # last dual solution; feasible start for the next inner solve

    for k in range(cfg.max_iters + 1):
        st.k = k
        y = momentum_point(st.x_circ_prev, st.x_prev, st.alpha)
        st.rho_k = rho * st.B
        f_y = f.value(y)
        g_y = f.gradient(y)

        inner_total = 0
        x_cand = None
        rep = None
        eps_k = None
        armijo_ok = False
        inner_failed = None
        while st.B <= cfg.B_cap:
            lam = 1.0 / st.L
            eps_k = eps_abs_schedule(k, st.L, L0, st.alpha, cfg.E0, cfg.p)
            y_plus = y - g_y / st.L
            icfg = InnerConfig(
                eps_abs=eps_k,
                rho=st.rho_k,
                lam=lam,
                tau0=lam * at_a_norm,
                s=cfg.inner_s,
                max_iters=cfg.inner_max_iters,
            )
            z0 = y if v_warm is None else v_warm
            rep = dual_pgd(A, spec, y, y_plus, z0, icfg)
            inner_total += rep.iters
            x_cand = rep.z
            if rep.status != "converged":
                inner_failed = rep.status
                break
            if cfg.warm_start:
                v_warm = rep.v
            if armijo_check(f.value, g_y, x_cand, y, st.B, f_y=f_y):
                armijo_ok = True
                break
            st.B *= 2.0
            st.rho_k = rho * st.B
            st.L = (1.0 + rho) * st.B
            st.L_max = max(st.L, st.L_max)

        if x_cand is None:
            # the Armijo loop never ran: B already past the overflow cap
            trace.status = "line-search-error"
            break
        if k == 0:
            L0 = st.L
        ledger.L0 = L0

        residual = float(np.linalg.norm(x_cand - y))
        F_val = f.value(x_cand) + omega_eval(spec, A.apply(x_cand))
        trace.records.append(
            TraceRecord(
                k=k,
                alpha=st.alpha,
                B=st.B,
                L=st.L,
                eps_abs=eps_k,
                inner_iters=inner_total,
                residual=residual,
                F=F_val,
                gap=rep.gap,
            )
        )
        if k >= 1:
            S_k += 1.0 / math.sqrt(st.L)
            R_k += cfg.E0 * float(k) ** (-cfg.p)
        ledger.beta.append(st.alpha**2 * st.L / L0)
        ledger.R.append(R_k)
        ledger.sum_inv_sqrt_L.append(S_k)
        ledger.L_maxes.append(st.L_max)
        x = x_cand

        x_circ = extrapolate(st.x_prev, x_cand, st.alpha)
        if cfg.keep_iterates:
            trace.iterates["x"].append(x_cand)
            trace.iterates["y"].append(y)
            trace.iterates["x_circ"].append(x_circ)

        if residual <= cfg.eps_stat:
            trace.status = "converged"
            break
        if inner_failed is not None:
            trace.status = inner_failed
            break
        if not armijo_ok:
            trace.status = "line-search-error"
            break

        L_next = backtrack_L(st.L, st.L_max, cfg.r, cfg.s)
        st.alpha = update_alpha(st.alpha, st.L, L_next)
        st.x_prev = x_cand
        st.x_circ_prev = x_circ
        st.L = L_next

    return x, trace, ledger
