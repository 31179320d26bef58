"""Command-line orchestration: configure, run, report.

Two subcommands. `qkdsim run` executes one session and writes its report
files; `qkdsim sweep` iterates one parameter (channel depolarizing strength
or the attack) over a grid and writes the combined (parameter, S, Q, r, R)
table. No interactivity: configure, run, read.

Exit codes: 0 success, 2 usage errors (unknown flag, malformed argument),
3 invalid configuration value (the message names the field), 4 unreadable or
invalid config file, 5 runtime failure such as an estimator left undefined by
too few rounds, 6 report write failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__, analysis, plots, protocol, report
from .adversary import AttackModel, NoiseModel, eve_information

PROTOCOLS = ("e91", "two_way")
MODES = ("exact", "sample", "both")
FORMATS = ("json", "csv", "both")
SWEEP_PARAMS = ("depolarizing", "attack")
ATTACK_CHOICES = (
    "none",
    "intercept-z:leg1",
    "intercept-z:leg2",
    "intercept-z:both",
    "probe-cnot:leg1",
)

DEFAULTS = {
    "protocol": "two_way",
    "rounds": 10000,
    "seed": None,  # resolved against QKDSIM_SEED, then 0
    "mode": "both",
    "attack": "none",
    "depolarizing": 0.0,
    "dephasing": 0.0,
    "format": "json",
    "output": "qkdsim_out",
    "figures": True,
}

SEED_ENV = "QKDSIM_SEED"


class ConfigValueError(Exception):
    """An out-of-range or unknown configuration value; message names the field."""


class ConfigFileError(Exception):
    """The config file could not be read or parsed."""


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    rounds: int
    seed: int
    mode: str
    attack: AttackModel
    attack_name: str
    noise: NoiseModel
    depolarizing: float
    dephasing: float
    output: Path
    format: str
    figures: bool


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--protocol", help=f"one of {', '.join(PROTOCOLS)}")
    common.add_argument("--rounds", type=int, help="rounds per session (>= 1)")
    common.add_argument("--seed", type=int, help=f"64-bit seed; falls back to ${SEED_ENV}, then 0")
    common.add_argument("--mode", help=f"one of {', '.join(MODES)}")
    common.add_argument("--attack", help=f"one of {', '.join(ATTACK_CHOICES)}")
    common.add_argument("--depolarizing", type=float, help="depolarizing p on both legs")
    common.add_argument("--dephasing", type=float, help="dephasing p on both legs")
    common.add_argument("--output", help="output directory (created if missing)")
    common.add_argument("--format", help=f"one of {', '.join(FORMATS)}")
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render figures next to the reports (default: on)",
    )

    parser = argparse.ArgumentParser(
        prog="qkdsim",
        description="Deterministic simulator for a two-way entanglement-based "
        "QKD protocol with an E91 baseline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one session and write its report")
    sweep = sub.add_parser("sweep", parents=[common], help="grid over one parameter")
    sweep.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    sweep.add_argument(
        "--values",
        required=True,
        nargs="+",
        help="grid values (space or comma separated)",
    )
    return parser


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigFileError(f"config file {path} must hold a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigValueError(f"unknown config file field {sorted(unknown)[0]!r} in {path}")
    return data


def _resolve_seed(value) -> int:
    if value is None:
        env = os.environ.get(SEED_ENV)
        if env is None:
            return 0
        try:
            value = int(env)
        except ValueError:
            raise ConfigValueError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise ConfigValueError(f"--seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over defaults, then validate."""
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(_load_config_file(args.config))
    for name in DEFAULTS:
        flag = getattr(args, name, None)
        if flag is not None:
            merged[name] = flag

    if merged["protocol"] not in PROTOCOLS:
        raise ConfigValueError(
            f"--protocol must be one of {', '.join(PROTOCOLS)}, got {merged['protocol']!r}"
        )
    if merged["mode"] not in MODES:
        raise ConfigValueError(f"--mode must be one of {', '.join(MODES)}, got {merged['mode']!r}")
    if merged["format"] not in FORMATS:
        raise ConfigValueError(
            f"--format must be one of {', '.join(FORMATS)}, got {merged['format']!r}"
        )
    try:
        rounds = int(merged["rounds"])
    except (TypeError, ValueError):
        raise ConfigValueError(f"--rounds must be an integer, got {merged['rounds']!r}") from None
    if rounds < 1:
        raise ConfigValueError(f"--rounds must be at least 1, got {rounds}")
    for field in ("depolarizing", "dephasing"):
        try:
            p = float(merged[field])
        except (TypeError, ValueError):
            raise ConfigValueError(f"--{field} must be a number, got {merged[field]!r}") from None
        if not 0.0 <= p <= 1.0:
            raise ConfigValueError(f"--{field} must lie in [0, 1], got {p}")
        merged[field] = p
    try:
        attack = AttackModel.parse(str(merged["attack"]))
    except ValueError as exc:
        raise ConfigValueError(f"--attack: {exc}") from None
    seed = _resolve_seed(merged["seed"])
    figures = bool(merged["figures"])

    return RunConfig(
        protocol=merged["protocol"],
        rounds=rounds,
        seed=seed,
        mode=merged["mode"],
        attack=attack,
        attack_name=attack.to_string(),
        noise=NoiseModel(merged["depolarizing"], merged["dephasing"]),
        depolarizing=merged["depolarizing"],
        dephasing=merged["dephasing"],
        output=Path(merged["output"]),
        format=merged["format"],
        figures=figures,
    )


def _echo_config(cfg: RunConfig) -> dict:
    """Logical configuration echoed into the report. Output path and figure
    toggles are presentation choices and stay out, so identical logical runs
    stay byte-identical."""
    return {
        "protocol": cfg.protocol,
        "rounds": cfg.rounds,
        "seed": cfg.seed,
        "mode": cfg.mode,
        "format": cfg.format,
        "attack": {
            "name": cfg.attack_name,
            "kind": cfg.attack.kind,
            "legs": sorted(cfg.attack.legs),
            "probe_measurement": cfg.attack.probe_measurement
            if cfg.attack.kind == "entangling_probe"
            else None,
        },
        "noise": {
            "leg1": {"depolarizing_p": cfg.noise.depolarizing_p[0], "dephasing_p": cfg.noise.dephasing_p[0]},
            "leg2": {"depolarizing_p": cfg.noise.depolarizing_p[1], "dephasing_p": cfg.noise.dephasing_p[1]},
        },
    }


def _exact_part(cfg: RunConfig):
    fig = (
        protocol.exact_two_way(cfg.noise, cfg.attack)
        if cfg.protocol == "two_way"
        else protocol.exact_e91(cfg.noise, cfg.attack)
    )
    estimate = analysis.ChshEstimate(
        s_value=fig.s_value,
        correlators={p: fig.correlators[p] for p in analysis.CHSH_PAIRS},
        counts=None,
        mode="exact",
    )
    return {
        "chsh": estimate,
        "rate": analysis.devetak_winter(fig.qber, fig.s_value),
        "components": {
            "p_a2_b1_mismatch": fig.p_a2_b1_mismatch,
            "p_a3_b2_mismatch": fig.p_a3_b2_mismatch,
            "p_x_mismatch": fig.p_x_mismatch,
        },
        "baseline_mode": fig.baseline_mode,
        "eve_mi_x": fig.eve_mi_x,
        "eve_mi_matched": fig.eve_mi_matched,
        "figures": fig,
    }


def _empirical_part(cfg: RunConfig):
    run = protocol.run_two_way if cfg.protocol == "two_way" else protocol.run_e91
    transcript = run(cfg.rounds, cfg.noise, cfg.attack, cfg.seed)
    estimate = analysis.chsh_empirical(protocol.chsh_rounds(transcript))
    comps = protocol.empirical_mismatch_rates(transcript)
    if cfg.protocol == "two_way":
        q = analysis.qber(
            comps["p_a2_b1_mismatch"], comps["p_a3_b2_mismatch"], comps["p_x_mismatch"]
        )
        baseline = False
    else:
        q = analysis.qber_baseline(comps["p_a2_b1_mismatch"], comps["p_a3_b2_mismatch"])
        baseline = True
    sifted = protocol.sift(transcript)
    x_bits = sum(1 for t in sifted.source_tags if t == "x-bit")
    matched_bits = len(sifted.source_tags) - x_bits
    attacked = sum(1 for r in transcript.rounds if r.attack_annotations)
    mi_x = eve_information(transcript, "x") if cfg.protocol == "two_way" else None
    part = {
        "chsh": estimate,
        "rate": analysis.devetak_winter(q, estimate.s_value),
        "components": comps,
        "baseline_mode": baseline,
        "eve_mi_x": mi_x,
        "eve_mi_matched": eve_information(transcript, "matched"),
        "eve_records": attacked,
        "keys": {
            "x_bits": x_bits,
            "matched_bits": matched_bits,
            "total": len(sifted.source_tags),
            "sift_rate": len(sifted.source_tags) / cfg.rounds,
        },
    }
    return part, transcript, sifted


def run_session(cfg: RunConfig):
    """Execute the configured session. Returns (report dict, transcript or None)."""
    t0 = time.perf_counter()
    exact_part = _exact_part(cfg) if cfg.mode in ("exact", "both") else None
    transcript = None
    empirical_part = None
    if cfg.mode in ("sample", "both"):
        empirical_part, transcript, _ = _empirical_part(cfg)
    doc = report.build_report(
        _echo_config(cfg), exact_part, empirical_part, time.perf_counter() - t0
    )
    return doc, transcript


def emit_report(doc: dict, transcript, cfg: RunConfig):
    """Write the configured files into the output directory; returns the paths."""
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if cfg.format in ("json", "both"):
        paths.append(report.write_json(doc, out))
    if cfg.format in ("csv", "both"):
        if transcript is not None:
            paths.append(report.write_transcript_csv(transcript, out))
        paths.append(report.write_summary_csv(doc, out))
    if cfg.figures:
        paths.append(plots.render_run_figure(doc, out))
    return paths


def _print_run_summary(doc: dict, paths):
    cfg = doc["config"]
    print(f"{cfg['protocol']} session: {cfg['rounds']} rounds, seed {cfg['seed']}, "
          f"attack {cfg['attack']['name']}")
    for mode in ("exact", "empirical"):
        chsh = doc["chsh"][mode]
        rate = doc["rate"][mode]
        if chsh and rate:
            print(
                f"  {mode:9s} S={chsh['s_value']:.6f}  Q={rate['qber']:.6f}  "
                f"r={rate['dw_rate']:.6f}  R={rate['throughput_R']:.6f}"
            )
    if doc["chsh"]["abs_diff_s"] is not None:
        print(f"  |S_exact - S_empirical| = {doc['chsh']['abs_diff_s']:.6f}")
    keys = doc["keys"]
    if keys["total"] is not None:
        print(
            f"  key bits: {keys['total']} ({keys['x_bits']} x-bits + "
            f"{keys['matched_bits']} matched), nominal {keys['nominal_total']:.1f}"
        )
    for p in paths:
        print(f"  wrote {p}")


def _sweep_values(param: str, raw_values):
    flat = []
    for chunk in raw_values:
        flat.extend(v for v in str(chunk).split(",") if v)
    if not flat:
        raise ConfigValueError("--values must list at least one value")
    if param == "depolarizing":
        out = []
        for v in flat:
            try:
                p = float(v)
            except ValueError:
                raise ConfigValueError(f"--values: {v!r} is not a number") from None
            if not 0.0 <= p <= 1.0:
                raise ConfigValueError(f"--values: depolarizing {p} outside [0, 1]")
            out.append(p)
        return out
    for v in flat:
        try:
            AttackModel.parse(v)
        except ValueError as exc:
            raise ConfigValueError(f"--values: {exc}") from None
    return flat


def run_sweep(cfg: RunConfig, param: str, values):
    """One session per grid value; rows carry (parameter, S, Q, r, R)."""
    rows = []
    for v in values:
        if param == "depolarizing":
            point = RunConfig(
                **{
                    **cfg.__dict__,
                    "noise": NoiseModel(float(v), cfg.dephasing),
                    "depolarizing": float(v),
                }
            )
        else:
            attack = AttackModel.parse(v)
            point = RunConfig(
                **{**cfg.__dict__, "attack": attack, "attack_name": attack.to_string()}
            )
        if cfg.mode == "sample":
            part, _, _ = _empirical_part(point)
        else:
            part = _exact_part(point)
        rate = part["rate"]
        rows.append(
            {
                "parameter": v,
                "S": part["chsh"].s_value,
                "Q": rate.qber,
                "r": rate.dw_rate,
                "R": rate.throughput_R,
            }
        )
    return rows


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args)
        if args.command == "sweep":
            if args.param not in SWEEP_PARAMS:
                raise ConfigValueError(
                    f"--param must be one of {', '.join(SWEEP_PARAMS)}, got {args.param!r}"
                )
            values = _sweep_values(args.param, args.values)
    except ConfigValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    try:
        if args.command == "run":
            doc, transcript = run_session(cfg)
        else:
            rows = run_sweep(cfg, args.param, values)
    except (analysis.EstimatorUndefinedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5

    try:
        if args.command == "run":
            paths = emit_report(doc, transcript, cfg)
            _print_run_summary(doc, paths)
        else:
            cfg.output.mkdir(parents=True, exist_ok=True)
            paths = [report.write_sweep_csv(rows, cfg.output)]
            if cfg.figures:
                paths.append(plots.render_sweep_figure(rows, args.param, cfg.output))
            print(f"sweep over {args.param}: {len(rows)} points")
            for row in rows:
                print(
                    f"  {row['parameter']!s:>18}  S={row['S']:.6f}  Q={row['Q']:.6f}  "
                    f"r={row['r']:.6f}  R={row['R']:.6f}"
                )
            for p in paths:
                print(f"  wrote {p}")
    except OSError as exc:
        print(f"error: cannot write report under {cfg.output}: {exc}", file=sys.stderr)
        return 6
    return 0


if __name__ == "__main__":
    sys.exit(main())
