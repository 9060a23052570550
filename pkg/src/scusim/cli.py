"""Command-line entry point: experiment drivers, schedules, and manifests.

Every command writes its outputs plus a manifest.json recording the
resolved configuration, the seed, and a digest of each output file.
With a fixed seed the CSV/JSON outputs are byte identical across runs.
Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channels import convex_decompose, parse_channel_spec, sample_term
from .ghz import GhzExperimentConfig, default_theta_grid, run_mqc_experiment
from .hamsim import (
    cts_schedule,
    cts_steps_for_error,
    cts_steps_for_overhead,
    enhanced_pf_schedule,
    pf_enhanced_steps_for_error,
    pf_enhanced_steps_for_overhead,
)
from .paulis import PauliSum
from .resources import TfimSweepConfig, tfim_sweep


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, config: dict, seed,
                    outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "artifact_version": __version__,
        "written_at": datetime.now(timezone.utc).isoformat(),
        "outputs": {p.name: _digest(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _resolve(flag_value, config: dict, key: str, default):
    """Flags override the config file; the file overrides defaults."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _prepare_out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ------------------------------------------------------------------ ghz

def cmd_ghz(args) -> int:
    file_cfg = _load_config_file(args.config)
    ps = _resolve(args.p or None, file_cfg, "p", [0.0])
    n = int(_resolve(args.n, file_cfg, "n", 8))
    shots = int(_resolve(args.shots, file_cfg, "shots", 1000))
    runs = int(_resolve(args.runs, file_cfg, "runs", 5))
    seed = int(_resolve(args.seed, file_cfg, "seed", 0))
    theta_points = _resolve(args.theta_points, file_cfg, "theta_points", None)
    if args.exact or file_cfg.get("exact"):
        shots = 0
    config_echo = {"n": n, "p": list(map(float, ps)), "shots": shots, "runs": runs,
                   "seed": seed, "theta_points": theta_points}

    grid = None
    if theta_points is not None:
        grid = np.arange(int(theta_points)) * (2 * np.pi / int(theta_points))
    results = []
    for p in ps:
        cfg = GhzExperimentConfig(n, float(p), theta_grid=grid,
                                  shots_per_angle=shots,
                                  n_runs=1 if shots == 0 else runs, seed=seed)
        results.append(run_mqc_experiment(cfg))

    out_dir = _prepare_out_dir(args.out_dir)
    csv_path = out_dir / "mqc_signal.csv"
    lines = ["run,theta,p,signal_mean,signal_stderr"]
    for res in results:
        for run in range(res.run_signals.shape[0]):
            for j, theta in enumerate(res.thetas):
                lines.append(",".join([
                    str(run), _fmt(theta), _fmt(res.damping_p),
                    _fmt(res.run_signals[run, j]), _fmt(res.run_signal_stderr[run, j]),
                ]))
    csv_path.write_text("\n".join(lines) + "\n")

    summary = []
    for res in results:
        summary.append({
            "n": res.n_qubits,
            "p": res.damping_p,
            "exact": res.exact,
            "fidelity": res.fidelity,
            "fidelity_stderr": res.fidelity_stderr,
            "populations": res.populations,
            "populations_stderr": res.populations_stderr,
            "coherence": res.coherence,
            "intensities": {str(m): v for m, v in sorted(res.intensities.items())},
        })
    summary_path = out_dir / "mqc_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(out_dir, "ghz", config_echo, seed, [csv_path, summary_path])
    for res in results:
        print(f"ghz n={res.n_qubits} p={res.damping_p:g}: "
              f"F = {res.fidelity:.6f} +- {res.fidelity_stderr:.6f}")
    return 0


# ------------------------------------------------------------------ estimate

def cmd_estimate(args) -> int:
    file_cfg = _load_config_file(args.config)
    sizes = _resolve(args.n or None, file_cfg, "sizes", list(TfimSweepConfig.sizes))
    algorithms = _resolve(args.algorithms, file_cfg, "algorithms",
                          ",".join(TfimSweepConfig.algorithms))
    algorithms = tuple(a.strip() for a in algorithms.split(",") if a.strip())
    if not algorithms:
        raise ValueError("algorithm list is empty")
    eps = _resolve(args.eps or None, file_cfg, "eps", [1e-6, 1e-3])
    lams = _resolve(args.lambda_max or None, file_cfg, "lambda_max", [2.0, 2000.0])
    eps_d = _resolve(args.eps_diamond or None, file_cfg, "eps_diamond", [2e-6, 2e-3])
    cfg = TfimSweepConfig(
        sizes=tuple(int(s) for s in sizes),
        algorithms=algorithms,
        eps_endpoints=tuple(float(e) for e in eps),
        lambda_endpoints=tuple(float(l) for l in lams),
        eps_diamond_endpoints=tuple(float(e) for e in eps_d),
    )
    config_echo = {
        "sizes": list(cfg.sizes), "algorithms": list(cfg.algorithms),
        "eps": list(cfg.eps_endpoints), "lambda_max": list(cfg.lambda_endpoints),
        "eps_diamond": list(cfg.eps_diamond_endpoints),
        "cts_order": cfg.cts_order, "pf1_order": cfg.pf1_order,
        "pf2_order": cfg.pf2_order,
    }
    rows, fits = tfim_sweep(cfg)

    out_dir = _prepare_out_dir(args.out_dir)
    csv_path = out_dir / "sweep.csv"
    lines = ["n,t,algorithm,constraint_kind,constraint_value,r,lambda,cnot_count,overhead"]
    for row in rows:
        lines.append(",".join([
            str(row.n), _fmt(row.t), row.algorithm, row.constraint_kind,
            _fmt(row.constraint_value), _fmt(row.r), _fmt(row.lam),
            _fmt(row.cnot_count), _fmt(row.overhead),
        ]))
    csv_path.write_text("\n".join(lines) + "\n")
    fits_path = out_dir / "fits.json"
    fits_path.write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    _write_manifest(out_dir, "estimate", config_echo, None, [csv_path, fits_path])
    failed = [row for row in rows if row.status != "ok"]
    print(f"estimate: {len(rows)} rows ({len(failed)} solver failures), "
          f"{len(fits)} fitted curves")
    return 0


# ------------------------------------------------------------------ compile

def cmd_compile(args) -> int:
    file_cfg = _load_config_file(args.config)
    ham_path = _resolve(args.hamiltonian, file_cfg, "hamiltonian", None)
    if not ham_path:
        raise ValueError("a Hamiltonian file is required")
    hamiltonian = PauliSum.deserialize(Path(ham_path).read_text())
    algorithm = _resolve(args.algorithm, file_cfg, "algorithm", "cts")
    t_raw = _resolve(args.t, file_cfg, "t", None)
    if t_raw is None:
        raise ValueError("an evolution time --t is required")
    t = float(t_raw)
    seed = int(_resolve(args.seed, file_cfg, "seed", 0))
    order = _resolve(args.order, file_cfg, "order", None)
    r = _resolve(args.r, file_cfg, "r", None)
    eps = _resolve(args.eps, file_cfg, "eps", None)
    lam_max = _resolve(args.lambda_max, file_cfg, "lambda_max", None)
    if sum(x is not None for x in (r, eps, lam_max)) != 1:
        raise ValueError("give exactly one of --r, --eps, --lambda-max")

    if algorithm == "cts":
        order = int(order) if order is not None else 3
        if r is None:
            r = cts_steps_for_error(hamiltonian, t, order, float(eps)) \
                if eps is not None else \
                cts_steps_for_overhead(hamiltonian, t, float(lam_max), order)
        r = int(r)
        if r < 1:
            raise ValueError("step count must be >= 1")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        schedule = cts_schedule(hamiltonian, t, r, order, rng, seed=seed)
    elif algorithm in ("pf1_enhanced", "pf2_enhanced"):
        pf_order = 1 if algorithm == "pf1_enhanced" else 2
        order = int(order) if order is not None else (3 if pf_order == 1 else 4)
        if r is None:
            r = pf_enhanced_steps_for_error(hamiltonian, t, pf_order, order,
                                            float(eps)) \
                if eps is not None else \
                pf_enhanced_steps_for_overhead(hamiltonian, t, pf_order, order,
                                               float(lam_max))
        r = int(r)
        if r < 1:
            raise ValueError("step count must be >= 1")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        schedule = enhanced_pf_schedule(hamiltonian, t, r, pf_order, order, rng,
                                        seed=seed)
    else:
        raise ValueError(f"unknown compile algorithm {algorithm!r}")

    config_echo = {"hamiltonian": str(ham_path), "algorithm": algorithm, "t": t,
                   "r": schedule.r, "order": order, "eps": eps,
                   "lambda_max": lam_max, "seed": seed}
    out_dir = _prepare_out_dir(args.out_dir)
    sched_path = out_dir / "schedule.json"
    sched_path.write_text(json.dumps(schedule.to_json_dict(), indent=2,
                                     sort_keys=True) + "\n")
    _write_manifest(out_dir, "compile", config_echo, seed, [sched_path])
    print(f"compile: {algorithm} r={schedule.r} lambda={schedule.lam:.6g}")
    return 0


# ------------------------------------------------------------------ sampling

def cmd_channel_sample(args) -> int:
    file_cfg = _load_config_file(args.config)
    spec = _resolve(args.channel, file_cfg, "channel", None)
    if not spec:
        raise ValueError("a channel preset or file is required")
    n_samples = int(_resolve(args.samples, file_cfg, "samples", 100))
    if n_samples < 1:
        raise ValueError("need at least one sample")
    seed = int(_resolve(args.seed, file_cfg, "seed", 0))
    channel = parse_channel_spec(spec)
    decomp = convex_decompose(channel)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    samples = []
    for _ in range(n_samples):
        term = sample_term(decomp, rng)
        samples.append({
            "kind": term.kind,
            "left": [str(g.pauli) for g in term.gates_left.gates],
            "right": [str(g.pauli) for g in term.gates_right.gates],
            "phase": term.phase,
            "weight": term.weight,
        })
    payload = {
        "channel": spec,
        "n_qubits": channel.n_qubits,
        "lambda": decomp.lam,
        "n_terms": decomp.n_terms,
        "seed": seed,
        "samples": samples,
    }
    out_dir = _prepare_out_dir(args.out_dir)
    path = out_dir / "samples.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_manifest(out_dir, "channel-sample",
                    {"channel": spec, "samples": n_samples, "seed": seed},
                    seed, [path])
    print(f"channel-sample: lambda={decomp.lam:.6g}, {n_samples} draws")
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scusim",
        description="Sampled convex-unitary simulation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    ghz = sub.add_parser("ghz", help="damped GHZ coherence experiment")
    ghz.add_argument("--n", type=int)
    ghz.add_argument("--p", type=float, action="append",
                     help="damping strength (repeatable)")
    ghz.add_argument("--shots", type=int)
    ghz.add_argument("--runs", type=int)
    ghz.add_argument("--theta-points", type=int)
    ghz.add_argument("--exact", action="store_true",
                     help="exhaustive term enumeration instead of shots")
    ghz.set_defaults(func=cmd_ghz)

    est = sub.add_parser("estimate", help="Ising-chain CNOT-cost sweep")
    est.add_argument("--n", type=int, action="append", help="chain size (repeatable)")
    est.add_argument("--algorithms", type=str,
                     help="comma list: qdrift,pf1,pf1_enhanced,pf2,pf2_enhanced,cts")
    est.add_argument("--eps", type=float, action="append")
    est.add_argument("--lambda-max", type=float, action="append")
    est.add_argument("--eps-diamond", type=float, action="append")
    est.set_defaults(func=cmd_estimate)

    comp = sub.add_parser("compile", help="sample a left/right gate schedule")
    comp.add_argument("--hamiltonian", type=str, help="Pauli-sum text file")
    comp.add_argument("--algorithm", type=str,
                      choices=("cts", "pf1_enhanced", "pf2_enhanced"))
    comp.add_argument("--t", type=float)
    comp.add_argument("--r", type=int)
    comp.add_argument("--eps", type=float)
    comp.add_argument("--lambda-max", type=float)
    comp.add_argument("--order", type=int)
    comp.set_defaults(func=cmd_compile)

    samp = sub.add_parser("channel-sample", help="draw terms from a channel")
    samp.add_argument("--channel", type=str,
                      help="preset like amplitude_damping(0.15) or a file")
    samp.add_argument("--samples", type=int)
    samp.set_defaults(func=cmd_channel_sample)

    for p in (ghz, est, comp, samp):
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", type=str, default="scusim_output")
        p.add_argument("--config", type=str, help="JSON config file (flags override)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
