"""Command-line interface.

Subcommands:
    sweep-snr       rate-degradation table
    detect-eval     detector evaluation (ROC point and min-samples analysis)
    scenario        run the vehicle scenario, write metrics and optional plot
    export-dataset  CSI dataset for the reconstruction-based detector
    calibrate       fit attack magnitudes and thresholds, write the manifest

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .attacks import AttackConfig, AttackSchedule
from .dataio import (
    emit_plot,
    load_config,
    write_dataset,
    write_manifest,
    write_metrics,
)
from .errors import ConfigError
from .experiments import (
    DatasetConfig,
    LatencyExperimentConfig,
    Method1Config,
    Method2Config,
    build_manifest,
    calibrate_latency_detection,
    calibrate_method1,
    fit_spoof_magnitude,
    generate_dataset_records,
    latency_comparison,
    method1_detection,
    method2_min_samples,
    rate_degradation_table,
)
from .scenario import DetectionSettings, ScenarioConfig, Vehicle, run as run_scenario, summarize

SCENARIO_SCHEMA = {
    "n_slots": (True, int),
    "rng_seed": (False, int),
    "n_ant": (False, int),
    "n_beams": (False, int),
    "arrivals_per_slot": (False, int),
    "queue_capacity": (False, int),
    "identification_delay": (False, int),
    "packet_size_bits": (False, (int, float)),
    "bandwidth_hz": (False, (int, float)),
    "noise_var": (False, (int, float)),
    "detection": (False, ("dict", {
        "enabled": (False, bool),
        "threshold": (False, (int, float)),
        "mu0": (False, (int, float)),
        "sigma0": (False, (int, float)),
        "window": (False, int),
    })),
    "vehicles": (True, list),
}

VEHICLE_SCHEMA = {
    "id": (True, int),
    "radius": (True, (int, float)),
    "angular_speed": (True, (int, float)),
    "phase0": (False, (int, float)),
    "attack": (False, ("dict", {
        "vector": (True, str),
        "magnitude": (True, (int, float)),
        "start_slot": (False, int),
        "period": (False, int),
        "duration": (False, int),
    })),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beamsec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command")
    for name, help_text in (
        ("sweep-snr", "rate-degradation table"),
        ("detect-eval", "detector evaluation"),
        ("scenario", "run the vehicle scenario"),
        ("export-dataset", "export a CSI dataset"),
        ("calibrate", "calibrate attacks and thresholds"),
    ):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", type=Path, default=None)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", type=Path, default=Path("."))
        s.add_argument("--runs", type=int, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        handler = {
            "sweep-snr": _cmd_sweep_snr,
            "detect-eval": _cmd_detect_eval,
            "scenario": _cmd_scenario,
            "export-dataset": _cmd_export_dataset,
            "calibrate": _cmd_calibrate,
        }[args.command]
        return handler(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # runtime failures
        print(f"error: {e}", file=sys.stderr)
        return 2


def _cmd_sweep_snr(args) -> int:
    res = rate_degradation_table(seed=args.seed,
                                 n_channels=args.runs or 10_000)
    print(f"{'degradation_pct':>16} {'mean_drop_pct':>14} {'closed_form_pct':>16}")
    for pct, drop, cf in zip(res.degradation_pct, res.mean_drop_pct,
                             res.closed_form_drop_pct):
        print(f"{pct:>16} {drop:>14.2f} {cf:>16.2f}")
    args.out.mkdir(parents=True, exist_ok=True)
    out = args.out / "rate_degradation.json"
    out.write_text(json.dumps(asdict(res), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_detect_eval(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    m1_cfg = Method1Config()
    m1_cal = calibrate_method1(m1_cfg, seed=args.seed)
    rows = []
    for n in (50, 100):
        pt = method1_detection(m1_cfg, m1_cal, n, seed=args.seed,
                               n_runs=args.runs or 1000)
        rows.append(("cusum", "pilot_contamination", m1_cal.attack_power,
                     n, pt.false_positive_rate, pt.detection_probability))
    m2_cfg = Method2Config()
    delta = fit_spoof_magnitude(m2_cfg)
    for miss in (0.1, 0.2):
        res = method2_min_samples(m2_cfg, delta, miss, seed=args.seed)
        rows.append(("ks", "csi_phase_spoof", delta, res["m_min"],
                     m2_cfg.alpha, res["detection_at_m"]))
        print(f"ks miss<={miss}: m_min={res['m_min']} "
              f"detection={res['detection_at_m']:.3f}")
    out = args.out / "detection_results.csv"
    lines = ["detector,attack,magnitude,n_samples,fpr,detection_probability"]
    for r in rows:
        lines.append(",".join(
            x if isinstance(x, str) else f"{x:.6g}" for x in r
        ))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_scenario(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    if args.config is not None:
        cfg = _scenario_from_config(args.config, args.seed)
        log = run_scenario(cfg)
    else:
        lat_cfg = LatencyExperimentConfig(n_slots=args.runs or 3000)
        detection = calibrate_latency_detection(lat_cfg, seed=args.seed + 1000)
        result = latency_comparison(lat_cfg, detection, seed=args.seed)
        log = result["log_enabled"]
        write_metrics(result["log_disabled"], args.out / "metrics_disabled.csv")
        series = _latency_series(result)
        emit_plot(series, args.out / "latency.svg",
                  title="post-onset latency", y_label="latency (slots)")
        print(f"mean post-onset latency: enabled={result['latency_enabled']:.2f} "
              f"disabled={result['latency_disabled']:.2f}")
    write_metrics(log, args.out / "metrics.csv")
    summary = summarize(log)
    print(json.dumps(summary, indent=2, default=float))
    print(f"wrote {args.out / 'metrics.csv'}")
    return 0


def _latency_series(result) -> dict:
    series = {}
    for key, name in (("log_enabled", "detection enabled"),
                      ("log_disabled", "detection disabled")):
        rows = result[key].rows
        slots = sorted({r.slot for r in rows})
        per_slot = {s: [] for s in slots}
        for r in rows:
            if r.delivered_packets > 0 and math.isfinite(r.latency_slots):
                per_slot[r.slot].append(r.latency_slots)
        series[name] = np.array([
            float(np.mean(per_slot[s])) if per_slot[s] else np.nan for s in slots
        ])
    return series


def _scenario_from_config(path: Path, seed: int) -> ScenarioConfig:
    doc = load_config(path, SCENARIO_SCHEMA, "scenario")
    vehicles = []
    for i, v in enumerate(doc["vehicles"]):
        vdoc = v
        from .dataio import validate_config

        validate_config(vdoc, VEHICLE_SCHEMA, f"scenario.vehicles[{i}]")
        attack = None
        if "attack" in vdoc:
            a = vdoc["attack"]
            attack = AttackConfig(
                vector=a["vector"],
                magnitude=a["magnitude"],
                schedule=AttackSchedule(
                    start_slot=a.get("start_slot", 0),
                    period=a.get("period", 1),
                    duration=a.get("duration", 1),
                ),
            )
        vehicles.append(Vehicle(
            id=vdoc["id"], radius=vdoc["radius"],
            angular_speed=vdoc["angular_speed"],
            phase0=vdoc.get("phase0", 0.0), attack_cfg=attack,
        ))
    det = doc.get("detection", {})
    detection = DetectionSettings(
        enabled=det.get("enabled", False),
        threshold=det.get("threshold", float("inf")),
        mu0=det.get("mu0", 0.0),
        sigma0=det.get("sigma0", 1.0),
        window=det.get("window", 100),
    )
    kwargs = {k: doc[k] for k in (
        "n_ant", "n_beams", "arrivals_per_slot", "queue_capacity",
        "identification_delay", "packet_size_bits", "bandwidth_hz", "noise_var",
    ) if k in doc}
    return ScenarioConfig(
        n_slots=doc["n_slots"],
        vehicles=tuple(vehicles),
        detection=detection,
        rng_seed=doc.get("rng_seed", seed),
        **kwargs,
    )


def _cmd_export_dataset(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    n = args.runs or 10_000
    records = generate_dataset_records(DatasetConfig(n_records=n), seed=args.seed)
    out = args.out / "csi_dataset.csid"
    count = write_dataset(records, out)
    print(f"wrote {count} records to {out}")
    return 0


def _cmd_calibrate(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    m1_cfg = Method1Config()
    m1_cal = calibrate_method1(m1_cfg, seed=args.seed)
    m2_cfg = Method2Config()
    delta = fit_spoof_magnitude(m2_cfg)
    manifest = build_manifest(args.seed, m1_cfg, m1_cal, m2_cfg, delta)
    out = args.out / "manifest.json"
    write_manifest(manifest, out)
    print(f"contamination power: {m1_cal.attack_power:.4f} "
          f"(snr {m1_cal.baseline_snr_db:.2f} -> {m1_cal.attacked_snr_db:.2f} dB)")
    print(f"phase spoof delta: {delta:.4f} rad")
    print(f"cusum threshold: {m1_cal.threshold:.4f}")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
