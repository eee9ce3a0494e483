"""magic-spectra command line."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as mio
from .errors import ConvergenceError, DecompositionError, DegenerateStateError, MagicSpectraError, ResourceError, ValidationError
from .imps import renyi_block
from .oracle import chord_length, critical_line_hamiltonian, fit_delta4, ground_state, mutual_sre_curve
from .perturb import CLIFFORDS, T_GATE, connected_response, maximize_injection
from .skeleton import chi2_tensors, chi4_tensors
from .spectra import build_operator, decompose, fit_w_scaling, mutual_sre_adjacent, sre_report, subsystem_sre_curve

COMMANDS = ("sre-density", "subsystem", "mutual", "xi", "perturb", "oracle", "fit")
FIGURE = {
    "sre-density": "SRE density sweep m_n(param)",
    "subsystem": "block SRE M~(N)/N convergence",
    "mutual": "adjacent-block mutual SRE L(l) and L_inf",
    "xi": "xi and xi_SRE",
    "perturb": "single-site injection and two-site connected response",
    "oracle": "ED mutual SRE W(l) on rings and 4*Delta_4",
    "fit": "W_inf against log correlation length",
}


def _state(cfg: mio.RunConfig, x: float | None):
    if cfg.source == "chi2":
        return chi2_tensors(x)
    if cfg.source == "chi4":
        return chi4_tensors(x)
    if cfg.source == "file":
        if not cfg.file:
            raise ValidationError("source=file needs --file")
        return mio.read_mps(cfg.file)
    raise ValidationError(f"unknown source {cfg.source!r}")


def _params(cfg: mio.RunConfig) -> list:
    return [0.0] if cfg.source == "file" else [float(v) for v in cfg.values()]


def _workers(cfg: mio.RunConfig) -> int:
    cap = os.environ.get("MAGIC_SPECTRA_THREADS")
    w = cfg.workers or os.cpu_count() or 1
    if cap:
        w = min(w, max(1, int(cap)))
    return w


def _sweep(cfg, fn):
    """Run ``fn`` over the grid; results come back in grid order."""
    params = _params(cfg)
    with ThreadPoolExecutor(max_workers=_workers(cfg)) as pool:
        return list(pool.map(fn, params))


def _chi_t(cfg):
    return cfg.chi_t or None


def cmd_sre_density(cfg):
    failed = []

    def point(x):
        try:
            rep = sre_report(_state(cfg, x), cfg.n, _chi_t(cfg), cfg.k or None, cfg.cutoff)
            return {"param": x, "m_n": rep.m_n, "mu1": rep.mu1, "converged": True}
        except (ConvergenceError, DecompositionError) as exc:
            failed.append(exc)
            return {"param": x, "m_n": float("nan"), "mu1": float("nan"), "converged": False}

    rows = _sweep(cfg, point)
    return ["param", "m_n", "mu1", "converged"], rows, (ConvergenceError("some points did not converge") if failed else None)


def cmd_subsystem(cfg):
    def point(x):
        st = _state(cfg, x)
        op = build_operator(st, cfg.n, _chi_t(cfg), cfg.cutoff)
        m = subsystem_sre_curve(op, cfg.N)
        out = []
        for N in range(1, cfg.N + 1):
            s = renyi_block(st, N, cfg.n)
            mt = m[N - 1] - s
            out.append({"param": x, "N": N, "M": m[N - 1], "S": s, "M_tilde": mt, "density": mt / N, "witness": mt - 2 * s})
        return out

    rows = [r for block in _sweep(cfg, point) for r in block]
    return ["param", "N", "M", "S", "M_tilde", "density", "witness"], rows, None


def cmd_mutual(cfg):
    def point(x):
        st = _state(cfg, x)
        op = build_operator(st, cfg.n, _chi_t(cfg), cfg.cutoff)
        rep = sre_report(st, cfg.n, _chi_t(cfg), cfg.k or None, cfg.cutoff)
        out = []
        for ell in range(1, cfg.N + 1):
            ent = (renyi_block(st, ell, cfg.n), renyi_block(st, 2 * ell, cfg.n))
            l, w, i = mutual_sre_adjacent(op, ell, ent)
            out.append({"param": x, "ell": ell, "L": l, "W": w, "I": i, "L_inf": rep.L_inf, "W_inf": rep.W_inf})
        return out

    rows = [r for block in _sweep(cfg, point) for r in block]
    return ["param", "ell", "L", "W", "I", "L_inf", "W_inf"], rows, None


def cmd_xi(cfg):
    def point(x):
        rep = sre_report(_state(cfg, x), cfg.n, _chi_t(cfg), cfg.k or None, cfg.cutoff)
        return {"param": x, "n": cfg.n, "xi": rep.xi, "xi_sre": rep.xi_sre}

    return ["param", "n", "xi", "xi_sre"], _sweep(cfg, point), None


def _gate(name: str):
    if name == "T":
        return T_GATE
    if name in CLIFFORDS:
        return CLIFFORDS[name]
    raise ValidationError(f"unknown gate {name!r}; use T or one of {sorted(CLIFFORDS)}")


def cmd_perturb(cfg):
    gate = _gate(cfg.gate)

    def point(x):
        st = _state(cfg, x)
        op = build_operator(st, cfg.n, _chi_t(cfg), cfg.cutoff)
        spec = decompose(op, k=cfg.k or None)
        angles, best = maximize_injection(op, spec, cfg.family)
        angles = tuple(angles) + (0.0,) * (3 - len(angles))
        rows = [{"g": x, "family": cfg.family, "theta": angles[0], "phi": angles[1], "lambda": angles[2], "delta_m": best, "r": 0, "connected_part": 0.0}]
        rs = list(range(1, cfg.r + 1))
        for r, c in zip(rs, connected_response(op, spec, gate, rs)):
            rows.append({"g": x, "family": cfg.gate, "theta": 0.0, "phi": 0.0, "lambda": 0.0, "delta_m": 0.0, "r": r, "connected_part": c})
        return rows

    rows = [r for block in _sweep(cfg, point) for r in block]
    return ["g", "family", "theta", "phi", "lambda", "delta_m", "r", "connected_part"], rows, None


def cmd_oracle(cfg):
    Ls = mio.parse_int_list(cfg.L)
    rows = []
    for gc in mio.parse_grid(cfg.gc):
        data = {L: mutual_sre_curve(ground_state(critical_line_hamiltonian(L, gc))[1], cfg.n) for L in Ls}
        fit = fit_delta4(data) if float(gc) != 1.0 else None
        slope = fit.pooled if fit else 0.0
        for L in Ls:
            for ell, w in data[L]:
                rows.append({"L": L, "g_c": gc, "ell": ell, "W2": w, "log_chord": float(np.log(chord_length(ell, L))), "slope": slope})
    return ["L", "g_c", "ell", "W2", "log_chord", "slope"], rows, None


def cmd_fit(cfg):
    def point(x):
        rep = sre_report(_state(cfg, x), cfg.n, _chi_t(cfg), cfg.k or None, cfg.cutoff)
        length = rep.xi_sre if cfg.abscissa == "xi_sre" else rep.xi
        return {"param": x, "log_length": float(np.log(length)) if 0 < length < np.inf else float("nan"), "W_inf": rep.W_inf}

    rows = _sweep(cfg, point)
    pts = [(r["log_length"], r["W_inf"]) for r in rows if np.isfinite(r["log_length"]) and np.isfinite(r["W_inf"])]
    slope, intercept, rss = fit_w_scaling(pts)
    for r in rows:
        r.update(slope=slope, intercept=intercept, rss=rss)
    return ["param", "log_length", "W_inf", "slope", "intercept", "rss"], rows, None


HANDLERS = {
    "sre-density": cmd_sre_density,
    "subsystem": cmd_subsystem,
    "mutual": cmd_mutual,
    "xi": cmd_xi,
    "perturb": cmd_perturb,
    "oracle": cmd_oracle,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magic-spectra", description="Stabilizer Renyi entropy spectra of infinite MPS.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--source", choices=("chi2", "chi4", "file"))
    p.add_argument("--file", help="MPS JSON file (source=file)")
    p.add_argument("--g", dest="g", help="chi=2 grid a:b:step or comma list")
    p.add_argument("--mu", help="chi=4 grid a:b:step or comma list")
    p.add_argument("--n", type=int)
    p.add_argument("--chi-t", dest="chi_t", type=int)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--k", type=int, help="eigenvectors requested from the iterative solver")
    p.add_argument("--N", type=int, help="largest block size")
    p.add_argument("--r", type=int, help="largest two-site distance")
    p.add_argument("--L", help="ring sizes, comma list")
    p.add_argument("--gc", help="critical-line points for the oracle command")
    p.add_argument("--family", choices=("Rx", "Ry", "Rz", "full"))
    p.add_argument("--gate", help="gate for the two-site response (T, I, X, Y, Z, H, S)")
    p.add_argument("--abscissa", choices=("xi_sre", "xi"))
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path (default stdout)")
    return p


def config_from_args(args) -> mio.RunConfig:
    over = {k: getattr(args, k) for k in ("source", "file", "n", "chi_t", "cutoff", "k", "N", "r", "L", "gc", "family", "gate", "abscissa", "workers", "seed", "out")}
    over["command"] = args.command
    if args.mu is not None:
        over["grid"] = args.mu
        over["source"] = over["source"] or "chi4"
    if args.g is not None:
        over["grid"] = args.g
        over["source"] = over["source"] or "chi2"
    return mio.load_config(args.config, **over)


def run(cfg: mio.RunConfig, stream) -> None:
    np.random.seed(cfg.seed)
    columns, rows, err = HANDLERS[cfg.command](cfg)
    meta = {
        "tool": f"magic-spectra {mio.TOOL_VERSION}",
        "command": cfg.command,
        "figure": FIGURE[cfg.command],
        "config_hash": cfg.hash(),
        "tolerances": f"eig_tol={cfg.tol} group_rtol=1e-08",
        "source": cfg.source,
        "n": cfg.n,
    }
    mio.write_csv(stream, columns, rows, meta)
    if err is not None:
        raise err


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.out:
            with open(cfg.out, "w", newline="") as fh:
                run(cfg, fh)
        else:
            run(cfg, sys.stdout)
    except (ValidationError, DegenerateStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, DecompositionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except MagicSpectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
