"""Experiment command line: inner-loop benchmark, signal recovery, generic solve.

Outputs are comma-separated files whose leading ``#`` comment lines carry the
column documentation, the invoking command, and the wall time; the data body
itself is deterministic for a fixed (config, seed) so runs can be diffed.
Each report also renders a matplotlib figure next to the delimited output.
"""

import csv
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .inner import InnerConfig, dual_pgd
from .linops import op_norm_sq
from .outer import OuterConfig, iapg_solve
from .problems import build_sparse_l1_instance, build_tv_problem, ground_truth
from .stats import fit_affine, fit_log_decay, five_number_summary

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LINE_SEARCH = 3
EXIT_MAX_ITERS = 4

_STATUS_EXIT = {
    "converged": EXIT_OK,
    "line-search-error": EXIT_LINE_SEARCH,
    "max-iters": EXIT_MAX_ITERS,
}


class ConfigError(Exception):
    pass


# key -> (type, default, help); B0 defaults to twice the blur's squared norm
_CONFIG_SCHEMA = {
    "n": (int, 2048, "signal length"),
    "l": (int, 128, "blur window half-width"),
    "eta": (float, 2.0, "total-variation weight (0 disables the regularizer)"),
    "lam_box": (float, 0.2, "fidelity dead-zone half-width"),
    "sigma": (float, 0.3, "observation noise level"),
    "seed": (int, 0, "noise seed"),
    "blur": (str, "box", "blur kind: box | identity"),
    "E0": (float, 64.0, "initial absolute inner tolerance"),
    "p": (float, 2.0, "inner tolerance decay exponent (> 1)"),
    "rho": (float, 1.0, "relative-error weight: rho_k = rho * B_k"),
    "r": (float, 1.0 / 16.0, "floor ratio between smallest and largest step constant"),
    "s_inner": (int, 4096, "inner step-constant relaxation half-life"),
    "s_outer": (int, 1024, "outer step-constant relaxation half-life"),
    "B0": (float, None, "initial smoothness estimate (default: 2 * ||C||^2)"),
    "eps_stat": (float, 1e-8, "exit threshold on ||x_k - y_k||"),
    "max_outer": (int, 100000, "largest outer iteration index"),
}

_CONFIG_HELP = "config keys (key=value per line, # comments allowed):\n" + "\n".join(
    f"  {k:<10} {t.__name__:<6} default {d!r}: {h}" for k, (t, d, h) in _CONFIG_SCHEMA.items()
)


def parse_config(path):
    """Read a flat key=value file; unknown keys are hard errors."""
    cfg = {k: d for k, (t, d, _) in _CONFIG_SCHEMA.items()}
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        typ = _CONFIG_SCHEMA[key][0]
        try:
            cfg[key] = typ(val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad {typ.__name__} for {key!r}: {val!r}") from exc
    if cfg["blur"] not in ("box", "identity"):
        raise ConfigError(f"blur must be 'box' or 'identity', not {cfg['blur']!r}")
    return cfg


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path, comments, header, rows):
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


@click.group()
def main():
    """Inexact accelerated proximal gradient experiments."""


@main.command("inner-bench")
@click.option("--seed", type=int, default=0, show_default=True, help="root seed; trial t uses stream (seed, t)")
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--imax", type=click.IntRange(min=0), default=64, show_default=True,
              help="largest tolerance index: grid eps_i = 2^(-32 + i/4), i = 0..imax")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="summary CSV path; a .png figure lands next to it")
def cmd_inner_bench(seed, trials, imax, out_path):
    """Benchmark how many dual iterations a gap tolerance costs.

    Each trial builds a random sparse-plus-identity operator (128 x 128),
    draws a target uniformly from the dual domain scaled box, and runs one
    dual descent to the tightest tolerance on the grid, recording the first
    iteration at which the duality gap crossed each grid level.
    """
    t0 = time.perf_counter()
    n, eta, lam = 128, 2.0, 1.0
    grid = 2.0 ** (-32.0 + np.arange(imax + 1) / 4.0)
    iters = np.zeros((trials, imax + 1), dtype=np.int64)
    censored = np.zeros((trials, imax + 1), dtype=bool)
    cap = 2**20
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        A, spec = build_sparse_l1_instance(n=n, eta=eta, seed=int(rng.integers(2**63)))
        y = rng.uniform(-eta, eta, n)
        first = np.full(imax + 1, -1, dtype=np.int64)

        def on_iter(j, phi, psi, z, v, tau, first=first):
            hit = (first < 0) & (phi + psi <= grid)
            if hit.any():
                first[hit] = j

        icfg = InnerConfig(
            eps_abs=float(grid[0]),
            rho=0.0,
            lam=lam,
            tau0=lam * op_norm_sq(A, seed=int(rng.integers(2**63))),
            max_iters=cap,
        )
        rep = dual_pgd(A, spec, y, y, y, icfg, record=on_iter)
        if rep.status == "line-search-error":
            click.echo(f"trial {t}: inner line search overflowed", err=True)
            sys.exit(EXIT_LINE_SEARCH)
        censored[t] = first < 0
        iters[t] = np.where(first < 0, cap, first)

    rows = []
    for i, eps in enumerate(grid):
        lo, q1, med, q3, hi = five_number_summary(iters[:, i])
        rows.append((i, eps, lo, q1, med, q3, hi, int(censored[:, i].sum())))
    wall = time.perf_counter() - t0
    comments = [
        "inner-loop benchmark: iterations until the duality gap certifies each tolerance",
        f"command: iapg inner-bench --seed {seed} --trials {trials} --imax {imax}",
        "columns: i (grid index), eps (gap tolerance 2^(-32+i/4)), "
        "min/q1/median/q3/max (five-number summary over trials of the smallest "
        "iteration j with gap <= eps), censored_count (trials still above eps "
        f"at the {cap}-iteration cap, reported as j = {cap})",
        f"wall_time_s: {wall:.3f}",
    ]
    _write_csv(out_path, comments, ["i", "eps", "min", "q1", "median", "q3", "max", "censored_count"], rows)
    fig_path = str(Path(out_path).with_suffix(".png"))
    _plot_bench(fig_path, grid, rows)
    click.echo(f"{trials} trials x {imax + 1} tolerances in {wall:.1f}s")
    click.echo(f"wrote {out_path} and {fig_path}")


def _plot_bench(path, grid, rows):
    xs = -np.log2(grid)
    arr = np.array([r[2:7] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.fill_between(xs, arr[:, 0], arr[:, 4], alpha=0.15, color="tab:blue", label="range")
    ax.fill_between(xs, arr[:, 1], arr[:, 3], alpha=0.35, color="tab:blue", label="quartiles")
    ax.plot(xs, arr[:, 2], color="tab:blue", lw=1.8, label="median")
    ax.set_xlabel(r"$-\log_2(\mathrm{gap\ tolerance})$")
    ax.set_ylabel("iterations to certify")
    ax.grid(alpha=0.3)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _solve_from_config(cfg):
    try:
        prob, f, spec, A = build_tv_problem(
            cfg["n"], cfg["l"], cfg["eta"], cfg["lam_box"], cfg["sigma"], cfg["seed"], blur=cfg["blur"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    B0 = cfg["B0"]
    if B0 is None:
        # inflate the iterative norm estimate so the very first descent test
        # passes and B never doubles mid-run
        B0 = 2.0 * op_norm_sq(prob.C)
    ocfg = OuterConfig(
        E0=cfg["E0"],
        p=cfg["p"],
        rho_ratio=cfg["rho"],
        B0=B0,
        eps_stat=cfg["eps_stat"],
        max_iters=cfg["max_outer"],
        r=cfg["r"],
        s=cfg["s_outer"],
        inner_s=cfg["s_inner"],
    )
    x0 = np.zeros(cfg["n"])
    x, trace, ledger = iapg_solve(f, spec, A, x0, ocfg)
    return prob, x0, x, trace, ledger


def _trace_rows(trace, rho_ratio):
    rows = []
    for rec in trace.records:
        eps_rel = 0.5 * rho_ratio * rec.B * rec.residual**2
        rows.append(
            (rec.k, rec.inner_iters, rec.residual, rec.eps_abs, eps_rel, rec.F, rec.alpha, rec.B, rec.L)
        )
    return rows


_TRACE_HEADER = ["k", "J_k", "residual", "eps_abs", "eps_rel", "F", "alpha", "B", "L"]

_TRACE_DOC = (
    "columns: k (outer iteration), J_k (inner iterations spent, retries included), "
    "residual (||x_k - y_k||), eps_abs (absolute inner tolerance), "
    "eps_rel ((rho_k/2)||x_k - y_k||^2), F (objective at x_k), alpha (momentum), "
    "B (smoothness estimate), L (step constant)"
)


def _report_solve(out_dir, cfg, trace, wall, config_path):
    comments = [
        f"config: {config_path}",
        "resolved: " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg) if cfg[k] is not None),
        "start point: zero vector",
        _TRACE_DOC,
        f"status: {trace.status}",
        f"wall_time_s: {wall:.3f}",
    ]
    trace_path = os.path.join(out_dir, "trace.csv")
    _write_csv(trace_path, comments, _TRACE_HEADER, _trace_rows(trace, cfg["rho"]))
    fig_path = os.path.join(out_dir, "convergence.png")
    _plot_convergence(fig_path, trace)
    return trace_path, fig_path


def _plot_convergence(path, trace):
    recs = trace.records
    ks = np.array([r.k for r in recs])
    js = np.array([r.inner_iters for r in recs], dtype=float)
    eps = np.array([r.eps_abs for r in recs])
    res = np.array([r.residual for r in recs])
    cum = np.cumsum(js)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.2))

    ax1.plot(ks, js, ".", ms=4, color="tab:blue")
    try:
        a, b, r2 = fit_affine(np.log(eps), js)
        ax1.plot(ks, a + b * np.log(eps), "-", color="tab:red", lw=1.2,
                 label=f"$a + b\\,\\ln\\epsilon_k$ ($b$={b:.3g}, $R^2$={r2:.3f})")
        ax1.legend(loc="best", fontsize=8)
    except ValueError:
        pass
    ax1.set_xlabel("outer iteration $k$")
    ax1.set_ylabel("inner iterations $J_k$")
    ax1.grid(alpha=0.3)

    pos = (res > 0) & (cum > 0)  # log axes need strictly positive data
    ax2.loglog(cum[pos], res[pos], ".", ms=4, color="tab:blue")
    try:
        c, c1, a, b = fit_log_decay(cum[pos], res[pos])
        xs = np.geomspace(cum[pos].min(), cum[pos].max(), 200)
        t = np.log(np.maximum(c1, xs))
        with np.errstate(over="ignore", invalid="ignore"):
            model = c * np.exp(np.where(t > 1.0, np.log(np.maximum(t, 1.0)), 0.0) * a - b * t)
        ok = np.isfinite(model) & (model > 0)
        if ok.any():
            ax2.loglog(xs[ok], model[ok], "-", color="tab:red", lw=1.2,
                       label=f"decay fit ($b$={b:.3g})")
            ax2.legend(loc="best", fontsize=8)
    except ValueError:
        pass
    ax2.set_xlabel("cumulative inner iterations")
    ax2.set_ylabel(r"residual $\|x_k - y_k\|$")
    ax2.grid(alpha=0.3, which="both")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_signals(path, truth, observed, recovered):
    idx = np.arange(truth.size)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8.0, 5.4), sharex=True)
    ax1.plot(idx, truth, color="0.3", lw=1.0, label="ground truth")
    ax1.plot(idx, observed, color="tab:orange", lw=0.8, alpha=0.8, label="observed")
    ax1.legend(loc="upper right", fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.plot(idx, truth, color="0.3", lw=1.0, label="ground truth")
    ax2.plot(idx, recovered, color="tab:green", lw=0.9, label="recovered")
    ax2.legend(loc="upper right", fontsize=8)
    ax2.grid(alpha=0.3)
    ax2.set_xlabel("sample index")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _load_and_run(config_path, out_dir):
    cfg = parse_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    prob, x0, x, trace, ledger = _solve_from_config(cfg)
    wall = time.perf_counter() - t0
    return cfg, prob, x0, x, trace, wall


def _echo_outcome(trace, wall):
    if trace.records:
        last = trace.records[-1]
        total_inner = sum(r.inner_iters for r in trace.records)
        click.echo(
            f"status {trace.status}: {len(trace.records)} outer iterations, "
            f"{total_inner} inner iterations, residual {last.residual:.3e}, "
            f"F {last.F:.6e}, {wall:.1f}s"
        )
    else:
        click.echo(f"status {trace.status} before the first iteration completed")


@main.command("recover", epilog=_CONFIG_HELP)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_recover(config_path, out_dir):
    """Recover a blurred, corrupted square wave; write trace, signals, figures."""
    try:
        cfg, prob, x0, x, trace, wall = _load_and_run(config_path, out_dir)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    trace_path, conv_path = _report_solve(out_dir, cfg, trace, wall, config_path)
    truth = ground_truth(cfg["n"])
    signals_path = os.path.join(out_dir, "signals.csv")
    _write_csv(
        signals_path,
        [
            "recovery signals",
            f"config: {config_path}",
            "columns: index, ground_truth, observed (blurred + noise), recovered",
            f"wall_time_s: {wall:.3f}",
        ],
        ["index", "ground_truth", "observed", "recovered"],
        [(i, truth[i], prob.x_tilde[i], x[i]) for i in range(cfg["n"])],
    )
    fig_path = os.path.join(out_dir, "signals.png")
    _plot_signals(fig_path, truth, prob.x_tilde, x)
    _echo_outcome(trace, wall)
    click.echo(f"wrote {trace_path}, {signals_path}, {conv_path}, {fig_path}")
    sys.exit(_STATUS_EXIT[trace.status])


@main.command("solve", epilog=_CONFIG_HELP)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_solve(config_path, out_dir):
    """Solve the configured composite problem; write trace and solution.

    The same config schema as `recover` spans the generic family: blur kind,
    dead-zone width, and regularizer weight may each be turned off (eta=0
    runs plain accelerated gradient on the smooth term).
    """
    try:
        cfg, prob, x0, x, trace, wall = _load_and_run(config_path, out_dir)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    trace_path, conv_path = _report_solve(out_dir, cfg, trace, wall, config_path)
    sol_path = os.path.join(out_dir, "solution.csv")
    _write_csv(
        sol_path,
        ["final iterate", f"config: {config_path}", "columns: index, x", f"wall_time_s: {wall:.3f}"],
        ["index", "x"],
        [(i, x[i]) for i in range(x.size)],
    )
    _echo_outcome(trace, wall)
    click.echo(f"wrote {trace_path}, {sol_path}, {conv_path}")
    sys.exit(_STATUS_EXIT[trace.status])


if __name__ == "__main__":
    main()
