"""Command-line pipeline driver.

Subcommands run the stages of the design flow from one JSON configuration
file, writing plot-ready CSV/JSON artifacts plus a manifest with content
digests. Exit codes: 0 success, 2 design-spec failure, 3 numerical
failure, 4 configuration error.

    loopshaper full --config design.json --out results/
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, LoopShaperError
from .ilc import IlcConfig, save_learning_curve
from .inverse_filter import InverseLearnConfig, ReferenceShaping
from .lti import Cascade, RationalTf, save_tf
from .metrics import (
    DesignSpec,
    check_specs,
    closed_loop,
    loop_step_metrics,
    metrics_as_dict,
    report_as_dict,
    save_report,
    save_step_response,
)
from .pipeline import LoopShapeConfig, run_loopshaping
from .plant import PlantOracle, SubprocessPlant, TfPlant, probe_relative_order
from .reduction import balanced_reduce, save_reduction
from .signals import l2_norm, save_fir, save_sequence, delta

EXIT_OK = 0
EXIT_SPEC_FAIL = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4


@dataclass
class PipelineSettings:
    sample_rate_hz: float
    plant_num: list | None
    plant_den: list | None
    plant_command: list | None
    desired_num: list
    desired_den: list
    shape: LoopShapeConfig
    reduction_order: int | None
    reduction_energy_fraction: float | None
    design: DesignSpec
    validate_horizon_s: float
    output_dir: Path


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def load_settings(config_path: str | Path, out_override=None, horizon_override=None) -> PipelineSettings:
    path = Path(config_path)
    _require(path.is_file(), f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc

    try:
        fs = float(raw["sample_rate_hz"])
        plant = raw["plant"]
        has_tf = "num" in plant and "den" in plant
        has_cmd = "command" in plant
        _require(has_tf != has_cmd, "plant must give exactly one of num/den or command")
        desired = raw["desired_loop_gain"]
        horizon = int(horizon_override if horizon_override is not None else raw["horizon"])

        inv = raw.get("inverse_learn", {})
        shaping = inv.get("reference_shaping")
        inverse_cfg = InverseLearnConfig(
            filter_half_length=int(inv.get("filter_half_length", horizon // 2)),
            total_iterations=int(inv.get("total_iterations", 100)),
            cross_update_period=int(inv.get("cross_update_period", 10)),
            initial_gain_alpha=float(inv.get("initial_gain_alpha", 0.5)),
            reference_shaping=(
                ReferenceShaping(
                    float(shaping["cutoff_normalized"]), int(shaping["half_length"])
                )
                if shaping
                else None
            ),
        )
        ilc_raw = raw.get("ilc", {})
        ilc_cfg = IlcConfig(
            max_iterations=int(ilc_raw.get("max_iterations", 10)),
            stop_error_db=float(ilc_raw.get("stop_error_db", -300.0)),
        )
        shape_cfg = LoopShapeConfig(
            horizon_length=horizon,
            inverse_learn=inverse_cfg,
            ilc=ilc_cfg,
            truncation_threshold=float(raw.get("truncation_threshold", 1e-10)),
            slow_pole_radius=float(raw.get("slow_pole_radius", 0.995)),
            anticausal_margin=int(raw.get("anticausal_margin", 32)),
            settle_pad=int(raw.get("settle_pad", 64)),
        )
        red = raw.get("reduction", {"energy_fraction": 0.96})
        _require(
            ("order" in red) != ("energy_fraction" in red),
            "reduction must give exactly one of order / energy_fraction",
        )
        spec_raw = raw["design_spec"]
        design = DesignSpec(
            rise_time_max_s=float(spec_raw["rise_time_max_s"]),
            settling_time_max_s=float(spec_raw["settling_time_max_s"]),
            overshoot_max_fraction=float(spec_raw["overshoot_max_fraction"]),
            phase_margin_min_deg=float(spec_raw["phase_margin_min_deg"]),
            steady_state_error_max_fraction=float(
                spec_raw["steady_state_error_max_fraction"]
            ),
            settling_band_fraction=float(spec_raw.get("settling_band_fraction", 0.02)),
        )
        out_dir = Path(out_override if out_override is not None else raw.get("output_dir", "out"))
        return PipelineSettings(
            sample_rate_hz=fs,
            plant_num=plant.get("num"),
            plant_den=plant.get("den"),
            plant_command=plant.get("command"),
            desired_num=list(desired["num"]),
            desired_den=list(desired["den"]),
            shape=shape_cfg,
            reduction_order=int(red["order"]) if "order" in red else None,
            reduction_energy_fraction=(
                float(red["energy_fraction"]) if "energy_fraction" in red else None
            ),
            design=design,
            validate_horizon_s=float(raw.get("validate_horizon_s", 2.0)),
            output_dir=out_dir,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config field: {exc}") from exc


def make_oracle(settings: PipelineSettings) -> PlantOracle:
    if settings.plant_command is not None:
        return SubprocessPlant(list(settings.plant_command), settings.sample_rate_hz)
    tf = RationalTf(
        np.array(settings.plant_num, dtype=float),
        np.array(settings.plant_den, dtype=float),
        settings.sample_rate_hz,
    )
    return TfPlant(tf)


def desired_tf(settings: PipelineSettings) -> RationalTf:
    return RationalTf(
        np.array(settings.desired_num, dtype=float),
        np.array(settings.desired_den, dtype=float),
        settings.sample_rate_hz,
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, config_path, parameters: dict, outputs) -> None:
    manifest = {
        "command": command,
        "config": str(config_path),
        "config_sha256": _sha256(Path(config_path)),
        "parameters": parameters,
        "outputs": {name: _sha256(out_dir / name) for name in sorted(outputs)},
    }
    (out_dir / f"{command}_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def cmd_probe(settings: PipelineSettings, config_path) -> int:
    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    oracle = make_oracle(settings)
    try:
        order = probe_relative_order(oracle, settings.shape.probe_length)
        impulse = oracle(delta(settings.shape.probe_length, 0, oracle.sample_rate_hz))
    finally:
        _close(oracle)
    save_sequence(out / "probe_impulse.csv", impulse)
    (out / "probe.json").write_text(
        json.dumps({"relative_order": order, "trials": oracle.trials}, indent=2) + "\n"
    )
    write_manifest(
        out, "probe", config_path,
        {"probe_length": settings.shape.probe_length},
        ["probe_impulse.csv", "probe.json"],
    )
    print(f"plant relative order: {order}")
    return EXIT_OK


def cmd_learn_inverse(settings: PipelineSettings, config_path) -> int:
    from .inverse_filter import learn_inverse

    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    oracle = make_oracle(settings)
    try:
        fir, result = learn_inverse(oracle, settings.shape.inverse_learn)
    finally:
        _close(oracle)
    save_fir(out / "inverse_fir.csv", fir, settings.sample_rate_hz)
    ref_norm = 1.0  # impulse reference has unit norm
    save_learning_curve(out / "inverse_learning_curve.csv", result.error_l2_history, ref_norm)
    write_manifest(
        out, "learn_inverse", config_path,
        {
            "filter_half_length": settings.shape.inverse_learn.filter_half_length,
            "total_iterations": settings.shape.inverse_learn.total_iterations,
            "cross_update_period": settings.shape.inverse_learn.cross_update_period,
        },
        ["inverse_fir.csv", "inverse_learning_curve.csv"],
    )
    final_rms = result.error_l2_history[-1] / np.sqrt(len(result.learned_input))
    print(f"inverse learned: final RMS tracking error {final_rms:.3e}")
    return EXIT_OK


def _run_shape(settings: PipelineSettings):
    oracle = make_oracle(settings)
    try:
        result = run_loopshaping(oracle, desired_tf(settings), settings.shape)
    finally:
        _close(oracle)
    return result


def _write_shape_artifacts(settings: PipelineSettings, result) -> list[str]:
    out = settings.output_dir
    save_fir(out / "controller_fir.csv", result.controller_fir, settings.sample_rate_hz)
    save_tf(out / "weight.json", result.weight)
    # at convergence the final output is the tracked reference up to the
    # residual error, so its norm serves for curve normalization
    norm = l2_norm(result.tracking.final_output)
    save_learning_curve(
        out / "tracking_curve.csv", result.tracking.error_l2_history, max(norm, 1e-300)
    )
    save_sequence(out / "tracked_output.csv", result.tracking.final_output)
    return [
        "controller_fir.csv",
        "weight.json",
        "tracking_curve.csv",
        "tracked_output.csv",
    ]


def cmd_shape(settings: PipelineSettings, config_path) -> int:
    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    result = _run_shape(settings)
    outputs = _write_shape_artifacts(settings, result)
    write_manifest(
        out, "shape", config_path,
        {
            "horizon": settings.shape.horizon_length,
            "slow_pole_radius": settings.shape.slow_pole_radius,
            "truncation_threshold": settings.shape.truncation_threshold,
        },
        outputs,
    )
    err = result.tracking.error_l2_history[-1]
    print(
        f"controller learned: {len(result.controller_fir)} taps, "
        f"final l2 tracking error {err:.3e}"
    )
    return EXIT_OK


def _reduce_from_result(settings: PipelineSettings, shape_result):
    return balanced_reduce(
        shape_result.controller_fir,
        order=settings.reduction_order,
        energy_fraction=settings.reduction_energy_fraction,
        sample_rate_hz=settings.sample_rate_hz,
    )


def _loop_iir(settings: PipelineSettings, shape_result, reduction_result) -> Cascade:
    plant = RationalTf(
        np.array(settings.plant_num, dtype=float),
        np.array(settings.plant_den, dtype=float),
        settings.sample_rate_hz,
    )
    return Cascade((reduction_result.reduced, shape_result.weight, plant))


def _write_bode_compare(settings: PipelineSettings, loop_iir: Cascade) -> str:
    grid = np.pi * np.arange(1, 4097) / 4096
    ld = desired_tf(settings).freq_response(grid)
    li = loop_iir.freq_response(grid)
    lines = ["omega_rad,f_hz,abs_Ld,abs_LIIR,abs_err"]
    fs = settings.sample_rate_hz
    for w, a, b in zip(grid, ld, li):
        lines.append(
            f"{w:.17g},{w * fs / (2 * np.pi):.17g},{abs(a):.17g},{abs(b):.17g},{abs(a - b):.17g}"
        )
    (settings.output_dir / "bode_compare.csv").write_text("\n".join(lines) + "\n")
    return "bode_compare.csv"


def cmd_reduce(settings: PipelineSettings, config_path) -> int:
    _require(
        settings.plant_num is not None,
        "reduce/validate need an inline plant to form the reduced loop gain",
    )
    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    shape_result = _run_shape(settings)
    reduction = _reduce_from_result(settings, shape_result)
    save_reduction(out / "reduction.json", reduction)
    loop_iir = _loop_iir(settings, shape_result, reduction)
    bode = _write_bode_compare(settings, loop_iir)
    outputs = _write_shape_artifacts(settings, shape_result) + ["reduction.json", bode]
    write_manifest(
        out, "reduce", config_path,
        {
            "order": settings.reduction_order,
            "energy_fraction": settings.reduction_energy_fraction,
        },
        outputs,
    )
    print(
        f"reduced to order {reduction.selected_order}; "
        f"bound {reduction.error_bound:.4g}, measured {reduction.measured_grid_error:.4g}"
    )
    return EXIT_OK


def _validate(settings: PipelineSettings, shape_result, reduction) -> tuple[int, dict]:
    loop_iir = _loop_iir(settings, shape_result, reduction)
    horizon = settings.validate_horizon_s
    band = settings.design.settling_band_fraction
    desired = desired_tf(settings)
    metrics_d = loop_step_metrics(desired, horizon, band)
    metrics_i = loop_step_metrics(loop_iir, horizon, band)
    report_d = check_specs(metrics_d, settings.design)
    report_i = check_specs(metrics_i, settings.design)
    out = settings.output_dir
    save_step_response(out / "step_desired.csv", closed_loop(desired), horizon)
    save_step_response(out / "step_reduced.csv", closed_loop(loop_iir), horizon)
    payload = {
        "desired": {
            "metrics": metrics_as_dict(metrics_d),
            "spec_check": report_as_dict(report_d),
        },
        "reduced": {
            "metrics": metrics_as_dict(metrics_i),
            "spec_check": report_as_dict(report_i),
        },
    }
    save_report(out / "validation_report.json", payload)
    ok = report_d.all_passed and report_i.all_passed
    return (EXIT_OK if ok else EXIT_SPEC_FAIL), payload


def cmd_validate(settings: PipelineSettings, config_path) -> int:
    _require(
        settings.plant_num is not None,
        "reduce/validate need an inline plant to form the reduced loop gain",
    )
    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    shape_result = _run_shape(settings)
    reduction = _reduce_from_result(settings, shape_result)
    code, payload = _validate(settings, shape_result, reduction)
    write_manifest(
        out, "validate", config_path,
        {"validate_horizon_s": settings.validate_horizon_s},
        ["step_desired.csv", "step_reduced.csv", "validation_report.json"],
    )
    for name in ("desired", "reduced"):
        checks = payload[name]["spec_check"]
        print(f"{name}: {'PASS' if checks['all_passed'] else 'FAIL'}")
    return code


def cmd_full(settings: PipelineSettings, config_path) -> int:
    _require(
        settings.plant_num is not None or settings.plant_command is not None,
        "plant missing",
    )
    out = settings.output_dir
    out.mkdir(parents=True, exist_ok=True)
    oracle = make_oracle(settings)
    try:
        order = probe_relative_order(oracle, settings.shape.probe_length)
        impulse = oracle(delta(settings.shape.probe_length, 0, oracle.sample_rate_hz))
        shape_result = run_loopshaping(oracle, desired_tf(settings), settings.shape)
    finally:
        _close(oracle)
    save_sequence(out / "probe_impulse.csv", impulse)
    (out / "probe.json").write_text(
        json.dumps({"relative_order": order, "trials": oracle.trials}, indent=2) + "\n"
    )
    save_fir(out / "inverse_fir.csv", shape_result.learning_filter, settings.sample_rate_hz)
    save_learning_curve(
        out / "inverse_learning_curve.csv",
        shape_result.inverse_tracking.error_l2_history,
        1.0,
    )
    outputs = ["probe_impulse.csv", "probe.json", "inverse_fir.csv", "inverse_learning_curve.csv"]
    outputs += _write_shape_artifacts(settings, shape_result)

    code = EXIT_OK
    if settings.plant_num is not None:
        reduction = _reduce_from_result(settings, shape_result)
        save_reduction(out / "reduction.json", reduction)
        loop_iir = _loop_iir(settings, shape_result, reduction)
        outputs.append(_write_bode_compare(settings, loop_iir))
        outputs.append("reduction.json")
        code, _payload = _validate(settings, shape_result, reduction)
        outputs += ["step_desired.csv", "step_reduced.csv", "validation_report.json"]
    write_manifest(
        out, "full", config_path,
        {"horizon": settings.shape.horizon_length},
        outputs,
    )
    print("full pipeline complete" + ("" if code == EXIT_OK else " (spec FAILED)"))
    return code


def _close(oracle: PlantOracle) -> None:
    if isinstance(oracle, SubprocessPlant):
        oracle.close()


COMMANDS = {
    "probe": cmd_probe,
    "learn-inverse": cmd_learn_inverse,
    "shape": cmd_shape,
    "reduce": cmd_reduce,
    "validate": cmd_validate,
    "full": cmd_full,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="loopshaper", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="pipeline JSON config")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--horizon", type=int, help="tracking horizon override")
    parser.add_argument(
        "--seedless",
        action="store_true",
        help="reserved; the pipeline uses no randomness anywhere",
    )
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.config, args.out, args.horizon)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](settings, args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LoopShaperError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
