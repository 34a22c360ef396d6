"""Command-line entry point.

Exit codes: 0 success, 1 runtime or numerical error, 2 configuration
error, 3 a bound check ran but was violated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, privacy, tradeoff
from .config import ScenarioConfig, load_config, write_csv
from .errors import ConfigurationError, PlatoonError
from .quantizer import QuantizerKind, make_rng
from .sim import run, run_ensemble
from .synthesis import uub_bound

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_BOUND = 0, 1, 2, 3

# random-stream branch for privacy pair generation
PAIR_STREAM = 7


def _resolve(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.replicas is not None:
        changes["replicas"] = args.replicas
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.topology is not None:
        kind, _, n = args.topology.partition(":")
        changes["topology"] = {"kind": kind.upper(), "n": int(n) if n else cfg.build_topology().n_followers}
    q = cfg.quantizer.to_dict()
    if args.quantizer is not None:
        q["kind"] = args.quantizer
    if args.delta and args.command != "sweep":
        q["step"] = args.delta[-1]
    if q != cfg.quantizer.to_dict():
        changes["quantizer"] = q
    if args.delta and args.command == "sweep":
        changes["sweep_steps"] = list(args.delta)
    return cfg.replace(**changes) if changes else cfg


def _out(cfg, name):
    return Path(cfg.output_dir) / name


def cmd_synthesize(cfg, args):
    sim_cfg = cfg.build_sim()
    g = sim_cfg.gains
    spec = g.closed_loop_spectrum()
    residual = g.condition_residual()
    payload = {
        "P": g.P.tolist(),
        "K": g.K.tolist(),
        "gamma": g.gamma,
        "lambda_1": g.lambda_1,
        "lambda_N": g.lambda_N,
        "condition_residual": residual,
        "A_eps_spectrum_real": spec.real.tolist(),
        "A_eps_spectrum_imag": spec.eigenvalues.imag.tolist(),
        "uub_bound_per_unit_step": uub_bound(g, 1.0),
        "variance_trace_W": analysis.compute_variance_bound(g, 1.0).trace_W,
    }
    path = _out(cfg, "gains.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"K = {np.array2string(g.K[0], precision=6)}")
    print(f"lambda_1(L+S) = {g.lambda_1:.6g}, lambda_N(L+S) = {g.lambda_N:.6g}")
    print(f"gain condition residual (max eigenvalue) = {residual:.3e}")
    print(f"A_eps max real eigenvalue = {spec.real.max():.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def _trace_rows(trace):
    n = trace.control.shape[1]
    header = ["t", "p_0", "v_0", "a_0"]
    for i in range(1, n + 1):
        header += [f"p_{i}", f"v_{i}", f"a_{i}", f"u_{i}", f"spacing_{i}"]
    header.append("eps_norm")
    rows = []
    en = trace.error_norm
    for k, t in enumerate(trace.time):
        row = [t, *trace.states[k, 0]]
        for i in range(1, n + 1):
            row += [*trace.states[k, i], trace.control[k, i - 1], trace.spacing_error[k, i - 1]]
        row.append(en[k])
        rows.append(row)
    return header, rows


def cmd_simulate(cfg, args):
    sim_cfg = cfg.build_sim()
    tr = run(sim_cfg)
    header, rows = _trace_rows(tr)
    path = write_csv(_out(cfg, "trace.csv"), header, rows, cfg)
    w = analysis.steady_window(tr.time)
    rms = float(np.sqrt(np.mean(tr.error_norm[w] ** 2)))
    print(f"steady-state RMS tracking error = {rms:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_ensemble(cfg, args):
    sim_cfg = cfg.build_sim()
    traces = run_ensemble(sim_cfg, cfg.replicas)
    st = analysis.ensemble_stats(traces)
    rows = zip(st.time, st.mean_error_norm, st.half_width_norm, st.mean_sq_norm, st.half_width_sq_norm)
    path = write_csv(
        _out(cfg, "ensemble.csv"),
        ["t", "mean_eps_norm", "half_width_norm", "mean_sq_norm", "half_width_sq_norm"],
        rows,
        cfg,
    )
    step = cfg.quantizer.step
    checks = []
    if cfg.quantizer.kind is QuantizerKind.DETERMINISTIC:
        checks.append(analysis.check_uub(traces[0], sim_cfg.gains, step))
    else:
        checks.append(analysis.check_mean_convergence(st, st.time[-1] - 0.25 * (st.time[-1] - st.time[0])))
        checks.append(analysis.check_variance(st, sim_cfg.gains, step))
    for c in checks:
        print(("PASS " if c.passed else "FAIL ") + str(c))
    print(f"wrote {path}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_BOUND


def _attack(cfg):
    sim_cfg = cfg.build_sim()
    res = privacy.run_attack(sim_cfg, cfg.privacy.target)
    rows = (
        [t, *res.true_state[k], *res.estimate[k], res.error[k]] for k, t in enumerate(res.time)
    )
    path = write_csv(
        _out(cfg, "attack.csv"),
        ["t", "p", "v", "a", "p_hat", "v_hat", "a_hat", "error"],
        rows,
        cfg,
    )
    print(f"attack on follower {cfg.privacy.target}: terminal error {res.terminal_error:.6g}, "
          f"mean error {res.mean_error:.6g}, steady-window mean error {res.steady_mean_error():.6g}")
    print(f"wrote {path}")
    return res


def cmd_attack(cfg, args):
    _attack(cfg)
    return EXIT_OK


def cmd_privacy(cfg, args):
    step = cfg.quantizer.step
    zeta = cfg.privacy.zeta
    n = cfg.build_topology().n_followers
    rng = make_rng(cfg.seed, PAIR_STREAM)
    pairs = privacy.random_adjacent_pairs(rng, cfg.privacy.pairs, 3 * (n + 1), zeta, step)
    rep = privacy.verify_dp(pairs, step)
    rows = []
    for k, p in enumerate(pairs):
        j = int(np.argmax(rep.distances[k]))
        rows.append([k, privacy.pair_case(p.chi[j], p.chi_prime[j], step), rep.distances[k].max(), zeta / step,
                     int(rep.distances[k].max() <= zeta / step + privacy.DP_SLACK)])
    path = write_csv(_out(cfg, "dp_report.csv"), ["pair", "case", "max_tv", "bound", "pass"], rows, cfg)
    z, zp = privacy.tightness_witness(zeta, step)
    tight = privacy.tv_distance(z, zp, step)
    b1, b2 = privacy.boundary_witness(zeta, step)
    det_tv = privacy.tv_distance_deterministic(b1, b2, step)
    print(f"{'PASS' if rep.passed else 'FAIL'} DP: max TV {rep.max_distance:.6g} <= zeta/step {zeta / step:.6g}")
    print(f"tightness witness ({z:.6g}, {zp:.6g}): TV {tight:.6g}")
    print(f"deterministic boundary pair ({b1:.6g}, {b2:.6g}): TV {det_tv:.6g}")
    print(f"wrote {path}")
    _attack(cfg)
    return EXIT_OK if rep.passed else EXIT_BOUND


def cmd_tradeoff(cfg, args):
    ts = cfg.tradeoff
    grid = np.geomspace(ts.f2_min, ts.f2_max, ts.f2_points)
    front = tradeoff.pareto_front(grid)
    p1 = write_csv(_out(cfg, "pareto.csv"), ["f2", "f1"], front.tolist(), cfg)
    rows = []
    for w1, w2 in ts.weights:
        step, cost = tradeoff.optimal_step(tradeoff.TradeoffWeights(w1, w2))
        f1, f2 = tradeoff.objectives(step)
        rows.append([w1, w2, step, float(f1), float(f2), cost])
        print(f"w1={w1:g} w2={w2:g}: step*={step:.6g} f1={float(f1):.6g} f2={float(f2):.6g}")
    p2 = write_csv(_out(cfg, "tradeoff.csv"), ["w1", "w2", "step", "f1", "f2", "cost"], rows, cfg)
    print(f"wrote {p1}\nwrote {p2}")
    return EXIT_OK


def cmd_sweep(cfg, args):
    sim_cfg = cfg.build_sim()
    kinds = [args.quantizer] if args.quantizer else ["deterministic", "probabilistic"]
    rows = []
    flags = []
    for kind in kinds:
        c = sim_cfg.with_(quantizer=type(sim_cfg.quantizer)(kind, cfg.sweep_steps[0]))
        res = analysis.delta_sweep(c, cfg.sweep_steps, replicas=min(cfg.replicas, 20))
        flags.append(res.monotone)
        for r in res.rows:
            rows.append([r.step, r.kind, r.rms, r.bound])
            print(f"{r.kind:>13s} step={r.step:<6g} rms={r.rms:.6g} bound={r.bound:.6g}")
    path = write_csv(_out(cfg, "sweep.csv"), ["step", "kind", "rms", "bound"], rows, cfg)
    print(f"wrote {path}")
    return EXIT_OK if all(f is not False for f in flags) else EXIT_BOUND


COMMANDS = {
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "privacy": cmd_privacy,
    "attack": cmd_attack,
    "tradeoff": cmd_tradeoff,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qplatoon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--delta", type=float, action="append", help="quantization step (repeatable for sweep)")
        p.add_argument("--topology", help="BD, BDL, PF, PLF, TPF or TPLF, optionally KIND:N")
        p.add_argument("--quantizer", choices=[k.value for k in QuantizerKind])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        print(f"seed = {cfg.seed}")
        return COMMANDS[args.command](cfg, args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PlatoonError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
