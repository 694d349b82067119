"""Polyhedral regularizers, conjugates, and proximal primitives.

A regularizer here is a finite maximum of linear forms,
``omega(z) = max_i <w_i, z>``.  Its convex conjugate is the indicator of the
generators' convex hull, so the proximal operator of the conjugate is a
Euclidean projection and does not depend on the prox scaling.  The scaled-l1
case ``omega = eta * ||.||_1`` is kept as a first-class kind so its conjugate
prox stays a coordinate-wise clamp.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np


class UnsupportedSpecError(ValueError):
    """Raised when an operation is not available for a regularizer kind."""


@dataclass(frozen=True, eq=False)
class RegularizerSpec:
    kind: str  # "scaled-l1" | "max-affine" | "zero"
    m: int
    eta: Optional[float] = None
    generators: Optional[np.ndarray] = None  # N x m, max-affine only
    projection: Optional[Callable] = None  # v -> projection onto conv(generators)


def scaled_l1(eta, m):
    """omega(z) = eta * ||z||_1 on R^m."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    return RegularizerSpec(kind="scaled-l1", m=int(m), eta=float(eta))


def max_affine(generators, projection=None):
    """omega(z) = max_i <w_i, z> for generator rows w_i.

    ``projection``, if given, must map a point of R^m to its Euclidean
    projection onto the convex hull of the generators; it is required by
    :func:`conj_prox`.
    """
    W = np.atleast_2d(np.asarray(generators, dtype=float))
    return RegularizerSpec(
        kind="max-affine", m=W.shape[1], generators=W, projection=projection
    )


def zero_spec(m):
    """The identically-zero regularizer (conjugate: indicator of the origin)."""
    return RegularizerSpec(kind="zero", m=int(m))


def lipschitz_constant(spec):
    """Global Lipschitz constant of omega: the largest generator norm."""
    if spec.kind == "scaled-l1":
        return spec.eta * np.sqrt(spec.m)
    if spec.kind == "max-affine":
        return float(np.max(np.linalg.norm(spec.generators, axis=1)))
    if spec.kind == "zero":
        return 0.0
    raise UnsupportedSpecError(f"unknown regularizer kind {spec.kind!r}")


def _check_dim(spec, z):
    z = np.asarray(z, dtype=float)
    if z.shape != (spec.m,):
        raise ValueError(f"expected vector of length {spec.m}, got shape {z.shape}")
    return z


def omega_eval(spec, z):
    """Evaluate omega(z)."""
    z = _check_dim(spec, z)
    if spec.kind == "scaled-l1":
        return spec.eta * float(np.sum(np.abs(z)))
    if spec.kind == "max-affine":
        return float(np.max(spec.generators @ z))
    if spec.kind == "zero":
        return 0.0
    raise UnsupportedSpecError(f"unknown regularizer kind {spec.kind!r}")


def conj_prox(spec, sigma, v):
    """prox of sigma * omega-conjugate at v.

    The conjugate is an indicator function for every supported kind, so the
    result is the projection onto its domain and is independent of ``sigma``.
    """
    v = _check_dim(spec, v)
    if spec.kind == "scaled-l1":
        return np.clip(v, -spec.eta, spec.eta)
    if spec.kind == "zero":
        return np.zeros_like(v)
    if spec.kind == "max-affine":
        if spec.projection is None:
            raise UnsupportedSpecError(
                "max-affine conjugate prox needs a registered projection onto the "
                "generator hull (pass projection= to max_affine)"
            )
        return np.asarray(spec.projection(v), dtype=float)
    raise UnsupportedSpecError(f"unknown regularizer kind {spec.kind!r}")


def soft_threshold(v, t):
    """Componentwise shrinkage: sign(v) * max(|v| - t, 0); the prox of t*||.||_1."""
    if t <= 0:
        raise ValueError("threshold must be positive")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def moreau_grad_dist_box(r, lam_box):
    """Gradient of 0.5 * dist(. | [-lam_box, lam_box]^n)^2 at r.

    Equals r minus its projection onto the box; zero inside the box, and the
    plain residual r when lam_box = 0.
    """
    if lam_box < 0:
        raise ValueError("box half-width must be nonnegative")
    r = np.asarray(r, dtype=float)
    return r - np.clip(r, -lam_box, lam_box)


def gap_certificate(gap, eps_abs, rho, z, y_ref):
    """Inner-loop exit test: gap < eps_abs + (rho/2) * ||z - y_ref||^2."""
    if eps_abs < 0 or rho < 0:
        raise ValueError("tolerances must be nonnegative")
    dz = np.asarray(z, dtype=float) - np.asarray(y_ref, dtype=float)
    return bool(gap < eps_abs + 0.5 * rho * float(dz @ dz))


def min_norm_point(generators, v):
    """Reference projection of v onto conv{w_i} for small generator sets.

    Enumerates every nonempty vertex subset, projects onto its affine hull by
    a KKT solve, and keeps the closest candidate whose affine weights are
    nonnegative.  Exponential in the number of generators; intended as a test
    oracle and as a projection callback for specs with at most 8 generators.
    """
    W = np.atleast_2d(np.asarray(generators, dtype=float))
    N, m = W.shape
    if N > 8:
        raise ValueError("reference projection supports at most 8 generators")
    v = np.asarray(v, dtype=float)
    best = None
    best_dist = np.inf
    for size in range(1, N + 1):
        for idx in combinations(range(N), size):
            V = W[list(idx)]  # size x m
            # minimize ||V^T lam - v||^2 subject to sum(lam) = 1
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = V @ V.T
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.concatenate([V @ v, [1.0]])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            lam = sol[:size]
            if np.all(lam >= -1e-9):
                cand = V.T @ lam
                d = np.linalg.norm(cand - v)
                if d < best_dist:
                    best_dist = d
                    best = cand
    return best
