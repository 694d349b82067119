"""Summary statistics and the regression fits used by the experiment reports."""

import numpy as np


def five_number_summary(values):
    """(min, q1, median, q3, max) with linearly interpolated quartiles.

    Quartile q sits at position (len(values) - 1) * q of the sorted sample.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("need at least one value")
    return tuple(float(t) for t in np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0]))


def fit_affine(xs, ys):
    """Ordinary least squares line.

    Returns
    -------
    (intercept, slope, r_squared)
        For constant ys the fit is the flat line through the mean, with
        r_squared defined as 0.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.unique(xs).size < 2:
        raise ValueError("need at least two distinct abscissae")
    if np.all(ys == ys[0]):
        return float(ys[0]), 0.0, 0.0
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (intercept + slope * xs)
    ss_res = float(resid @ resid)
    dev = ys - ys.mean()
    ss_tot = float(dev @ dev)
    return float(intercept), float(slope), 1.0 - ss_res / ss_tot


def fit_log_decay(xs, ys):
    """Fit ``y ~ c * max(ln max(c1, x), 1)^a / max(c1, x)^b`` by least squares.

    In log form:  ln y = ln c + a * max(0, ln ln max(c1, x)) - b * ln max(c1, x).
    The saturation point c1 is chosen by a one-dimensional grid search over
    the observed x values; the remaining coefficients come from a linear
    solve per candidate. Candidates whose least-squares optimum needs a ``c``
    outside float range are skipped (near-collinear designs produce huge
    cancelling coefficients); if none survive, a ValueError is raised.

    Returns ``(c, c1, a, b)``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 4:
        raise ValueError("need at least 4 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("xs and ys must be positive")
    ly = np.log(ys)
    best = None
    for c1 in np.unique(xs):
        t = np.log(np.maximum(c1, xs))
        loglog = np.zeros_like(t)
        mask = t > 1.0
        loglog[mask] = np.log(t[mask])
        design = np.column_stack([np.ones_like(t), loglog, -t])
        coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
        if abs(coef[0]) > 700.0:
            continue
        sse = float(np.sum((design @ coef - ly) ** 2))
        if best is None or sse < best[0]:
            best = (sse, c1, coef)
    if best is None:
        raise ValueError("no saturation candidate yields a representable fit")
    _, c1, coef = best
    return float(np.exp(coef[0])), float(c1), float(coef[1]), float(coef[2])
