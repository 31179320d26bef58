"""Report assembly and serialization.

One session produces a JSON document with the fixed top-level keys
{schema_version, config, chsh, rate, keys, eve, runtime} plus, in CSV mode,
a per-round transcript.csv and a one-row summary.csv. Numbers are serialized
at 12 significant digits with sorted keys, so identical (config, seed) runs
emit byte-identical JSON except for the wall-time field.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from . import __version__
from .analysis import CHSH_PAIRS

SCHEMA_VERSION = "1"

TOP_LEVEL_KEYS = ("schema_version", "config", "chsh", "rate", "keys", "eve", "runtime")

SIFT_NOTE = (
    "nominal figures assume the one-in-three matched-basis convention; "
    "uniform independent basis choice makes the matched fraction 2/9"
)

SUMMARY_COLUMNS = (
    "protocol",
    "rounds",
    "seed",
    "mode",
    "attack",
    "s_exact",
    "s_empirical",
    "qber_exact",
    "qber_empirical",
    "dw_rate_exact",
    "dw_rate_empirical",
    "throughput_exact",
    "throughput_empirical",
    "x_bits",
    "matched_bits",
    "total_key_bits",
    "sift_rate",
    "eve_information_x",
    "eve_information_matched",
)

TRANSCRIPT_COLUMNS = (
    "round",
    "x",
    "alice_basis",
    "bob_basis",
    "alice_outcome",
    "bob_outcome",
    "x_b",
    "matched",
    "eve_record",
)

SWEEP_COLUMNS = ("parameter", "S", "Q", "r", "R")


def _round_floats(value):
    """12 significant digits on every float, recursively."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def _pair_key(pair):
    return f"{pair[0]}{pair[1]}"


def _chsh_block(estimate):
    if estimate is None:
        return None
    block = {
        "s_value": estimate.s_value,
        "correlators": {_pair_key(p): estimate.correlators[p] for p in CHSH_PAIRS},
        "mode": estimate.mode,
    }
    if estimate.counts is None:
        block["counts"] = None
    else:
        block["counts"] = {_pair_key(p): estimate.counts[p] for p in CHSH_PAIRS}
    return block


def _rate_block(part):
    if part is None:
        return None
    rate = part["rate"]
    comps = part["components"]
    return {
        "qber": rate.qber,
        "qber_components": {
            "p_a2_b1_mismatch": comps["p_a2_b1_mismatch"],
            "p_a3_b2_mismatch": comps["p_a3_b2_mismatch"],
            "p_x_mismatch": comps["p_x_mismatch"],
        },
        "i_ab": rate.i_ab,
        "holevo_bound": rate.holevo_bound,
        "dw_rate_raw": rate.dw_rate_raw,
        "dw_rate": rate.dw_rate,
        "throughput_R": rate.throughput_R,
        "baseline_mode": part["baseline_mode"],
    }


def _eve_block(part):
    if part is None:
        return None
    return {
        "information_bits_x": part["eve_mi_x"],
        "information_bits_matched": part["eve_mi_matched"],
        "records": part.get("eve_records"),
    }


def build_report(config_echo: dict, exact_part, empirical_part, wall_time_s: float) -> dict:
    """Assemble the session report dict; parts are None when a mode is off."""
    rounds = config_echo["rounds"]
    two_way = config_echo["protocol"] == "two_way"
    keys = {
        "x_bits": None,
        "matched_bits": None,
        "total": None,
        "sift_rate": None,
        "expected_matched_fraction": 2.0 / 9.0,
        "nominal_matched_fraction": 1.0 / 3.0,
        "nominal_total": rounds * 4.0 / 3.0 if two_way else rounds / 3.0,
        "note": SIFT_NOTE,
    }
    if empirical_part is not None:
        keys.update(empirical_part["keys"])

    chsh = {
        "exact": _chsh_block(exact_part["chsh"]) if exact_part else None,
        "empirical": _chsh_block(empirical_part["chsh"]) if empirical_part else None,
        "abs_diff_s": None,
    }
    if exact_part and empirical_part:
        chsh["abs_diff_s"] = abs(exact_part["chsh"].s_value - empirical_part["chsh"].s_value)

    report = {
        "schema_version": SCHEMA_VERSION,
        "config": dict(config_echo),
        "chsh": chsh,
        "rate": {"exact": _rate_block(exact_part), "empirical": _rate_block(empirical_part)},
        "keys": keys,
        "eve": {"exact": _eve_block(exact_part), "empirical": _eve_block(empirical_part)},
        "runtime": {"version": __version__, "wall_time_s": wall_time_s},
    }
    return _round_floats(report)


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def without_wall_time(json_text: str) -> str:
    """The same document with runtime.wall_time_s dropped, for byte comparisons."""
    doc = json.loads(json_text)
    doc.get("runtime", {}).pop("wall_time_s", None)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(report: dict, out_dir) -> Path:
    path = Path(out_dir) / "report.json"
    path.write_text(report_json(report))
    return path


def write_transcript_csv(transcript, out_dir) -> Path:
    path = Path(out_dir) / "transcript.csv"
    from .protocol import MATCHED_PAIRS

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRANSCRIPT_COLUMNS)
        for r in transcript.rounds:
            eve = ";".join(f"{k}={v}" for k, v in sorted(r.attack_annotations.items()))
            writer.writerow(
                [
                    r.round_id,
                    "" if r.x is None else r.x,
                    r.alice_basis,
                    r.bob_basis,
                    r.alice_outcome,
                    r.bob_outcome,
                    "" if r.x_b is None else r.x_b,
                    int((r.alice_basis, r.bob_basis) in MATCHED_PAIRS),
                    eve,
                ]
            )
    return path


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return value


def write_summary_csv(report: dict, out_dir) -> Path:
    path = Path(out_dir) / "summary.csv"
    cfg = report["config"]
    chsh = report["chsh"]
    rate = report["rate"]
    keys = report["keys"]
    eve_emp = report["eve"]["empirical"] or {}
    eve_ex = report["eve"]["exact"] or {}

    def pick(block, field):
        return block[field] if block else None

    row = {
        "protocol": cfg["protocol"],
        "rounds": cfg["rounds"],
        "seed": cfg["seed"],
        "mode": cfg["mode"],
        "attack": cfg["attack"]["name"],
        "s_exact": pick(chsh["exact"], "s_value"),
        "s_empirical": pick(chsh["empirical"], "s_value"),
        "qber_exact": pick(rate["exact"], "qber"),
        "qber_empirical": pick(rate["empirical"], "qber"),
        "dw_rate_exact": pick(rate["exact"], "dw_rate"),
        "dw_rate_empirical": pick(rate["empirical"], "dw_rate"),
        "throughput_exact": pick(rate["exact"], "throughput_R"),
        "throughput_empirical": pick(rate["empirical"], "throughput_R"),
        "x_bits": keys["x_bits"],
        "matched_bits": keys["matched_bits"],
        "total_key_bits": keys["total"],
        "sift_rate": keys["sift_rate"],
        "eve_information_x": eve_emp.get("information_bits_x", eve_ex.get("information_bits_x")),
        "eve_information_matched": eve_emp.get(
            "information_bits_matched", eve_ex.get("information_bits_matched")
        ),
    }
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerow([_cell(row[c]) for c in SUMMARY_COLUMNS])
    return path


def write_sweep_csv(rows, out_dir) -> Path:
    path = Path(out_dir) / "sweep.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in SWEEP_COLUMNS])
    return path
