"""Model problems: blurred-signal recovery and the random sparse l1 instance.

The recovery problem is

    min_x  0.5 * dist(Cx - x_tilde | [-lam, lam]^n)^2 + eta * ||D x||_1

with C a non-uniform box blur, D the forward difference, and a dead-zone
fidelity that ignores residuals inside the box.  The fidelity is smooth: its
gradient is C^T applied to the residual's distance-to-box gradient.
"""

from dataclasses import dataclass

import numpy as np

from .linops import LinearOperator, box_blur, forward_difference, identity, op_sum, random_sparse
from .outer import Smooth
from .prox import moreau_grad_dist_box, scaled_l1, zero_spec


@dataclass(frozen=True, eq=False)
class RobustTVL2:
    C: LinearOperator  # n x n blur
    x_tilde: np.ndarray  # observed signal
    lam_box: float  # fidelity dead-zone half-width
    eta: float  # total-variation weight
    A: LinearOperator  # (n-1) x n forward difference


def ground_truth(n):
    """Square-wave test signal: the sign of sin(4 pi i / (n-1)) for i = 0..n-1.

    The sign is classified exactly: with q = 4i mod 2(n-1), the angle is
    pi q / (n-1), which is positive for 0 < q < n-1, negative for q > n-1,
    and an exact multiple of pi (sign 0) when q is 0 or n-1.  Both endpoints
    are therefore exactly zero, free of floating-point sine rounding.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    m = n - 1
    q = (4 * np.arange(n)) % (2 * m)
    out = np.zeros(n)
    out[(0 < q) & (q < m)] = 1.0
    out[q > m] = -1.0
    return out


def observe(C, x_bar, sigma, seed):
    """Blur and corrupt: C x_bar + sigma * z with standard normal z, seeded."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    return C.apply(x_bar) + sigma * rng.standard_normal(C.rows)


def fidelity_value(prob, x):
    """0.5 * squared distance of Cx - x_tilde to the box [-lam, lam]^n."""
    r = prob.C.apply(x) - prob.x_tilde
    d = moreau_grad_dist_box(r, prob.lam_box)
    return 0.5 * float(d @ d)


def fidelity_gradient(prob, x):
    r = prob.C.apply(x) - prob.x_tilde
    return prob.C.apply_adjoint(moreau_grad_dist_box(r, prob.lam_box))


def build_tv_problem(n, l, eta, lam_box, sigma, seed, blur="box"):
    """Assemble the recovery instance.

    Returns ``(prob, f, spec, A)``: the problem record, the smooth fidelity
    interface, the regularizer (scaled-l1 of weight eta, or the zero
    regularizer when eta = 0), and the difference operator.  ``blur`` may be
    "identity" to skip the blur entirely.
    """
    if blur == "box":
        C = box_blur(n, l)
    elif blur == "identity":
        C = identity(n)
    else:
        raise ValueError(f"unknown blur kind {blur!r}")
    x_bar = ground_truth(n)
    x_tilde = observe(C, x_bar, sigma, seed)
    prob = RobustTVL2(C=C, x_tilde=x_tilde, lam_box=float(lam_box), eta=float(eta), A=forward_difference(n))
    f = Smooth(
        value=lambda x: fidelity_value(prob, x),
        gradient=lambda x: fidelity_gradient(prob, x),
    )
    spec = scaled_l1(eta, n - 1) if eta > 0 else zero_spec(n - 1)
    return prob, f, spec, prob.A


def build_sparse_l1_instance(n=128, eta=2.0, seed=0):
    """Square random-sparse-plus-identity operator and scaled-l1 regularizer."""
    A = op_sum(random_sparse(n, n, seed), identity(n))
    return A, scaled_l1(eta, n)
