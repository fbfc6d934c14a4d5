"""
Command-line front end: delay curves, JSI export, pump optimization and the
umbrella `reproduce` command that compares computed values with published ones.

Outputs (tab-separated, UTF-8, 12 significant digits):
    <out>/delay.tsv       detuning/kappa_p and relative delays at 0.9, 1.0, 1.1 g_opt
    <out>/jsi.tsv         idler detuning, signal detuning, normalized intensity
    <out>/jsi.meta.json   Schmidt number, purity, grids, parameters
    <out>/optimize.tsv    optimized pump width per kappa_p/kappa_is ratio
    <out>/report.json     reproduce: per-check pass/fail
"""

import argparse
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from biphoton import jsa, jsi, jsi_correlation
from config import RunConfig, load_config, serialize_config
from core import Channel, PumpSpec, default_mode_grid, make_grid
from exceptions import ConfigError, NoConvergence, ParseError, SourceDesignError
from heatmap import write_heatmap
from optimize import OptimizationRecord, optimize_ratio, sweep_ratio
from reproduction import CheckCollector, create_published_checks
from schmidt import converged_schmidt, schmidt_at_resolution
from transfer import (
    coupled_params,
    delay_function,
    flatness,
    optimal_coupling,
    phase_derivative_at_center,
    phase_slope_at_center,
    plateau_halfwidth,
    relative_delay,
    third_derivative_bracket,
    trace,
)
from utils import format_runtime, truncate_text, write_json, write_table

logger = logging.getLogger(__name__)

DELAY_FACTORS = (0.9, 1.0, 1.1)
PUBLISHED_RATIOS = (1.0, 6.6, 10.0)
CONVERGENCE_LIMIT = 1e-5


@dataclass
class CommandResult:
    """Files written by a command plus the headline numbers behind them"""
    files: Dict[str, Path] = field(default_factory=dict)
    metrics: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


# ============================================================================
# DELAY
# ============================================================================

def delay_traces(config: RunConfig):
    """Pump traces at 0.9, 1.0 and 1.1 g_opt over +/- delay_halfwidth kappa_p"""
    base = config.params
    grid = make_grid(base.omega0_p, config.delay_halfwidth * base.kappa_p, config.grid_n)
    g_opt = optimal_coupling(base.kappa_p)
    return grid, {f: trace(base.with_couplings(f * g_opt, base.g_is), grid, Channel.PUMP)
                  for f in DELAY_FACTORS}


def cmd_delay(config: RunConfig, out_dir: Path) -> CommandResult:
    """Relative delay T(omega)/T(omega0) for three pump couplings"""
    grid, traces = delay_traces(config)
    kappa_p = config.params.kappa_p
    curves = [relative_delay(traces[f]) for f in DELAY_FACTORS]
    rows = ([grid.offsets[j] / kappa_p] + [c[j] for c in curves] for j in range(grid.n_points))
    header = ["detuning_over_kappa_p"] + [f"rel_delay_{f:g}g_opt" for f in DELAY_FACTORS]
    path = write_table(Path(out_dir) / "delay.tsv", header, rows)

    window = config.flatness_window * kappa_p
    metrics = {
        "flatness_window_over_kappa_p": config.flatness_window,
        "max_deviation": {f"{f:g}": flatness(traces[f], window) for f in DELAY_FACTORS},
        "plateau_halfwidth_over_kappa_p": {
            f"{f:g}": plateau_halfwidth(traces[f]) / kappa_p for f in DELAY_FACTORS
        },
        "center_delay": float(delay_function(traces[1.0])[grid.middle]),
    }
    logger.info("✅ delay curves written to %s", path)
    return CommandResult(files={"delay": path}, metrics=metrics)


# ============================================================================
# JSA / JSI
# ============================================================================

def pump_for_record(record: OptimizationRecord, omega0_p: float) -> Optional[PumpSpec]:
    """Pump at an optimization outcome; None for a broadband-limit plateau"""
    if record.is_plateau:
        return None
    if not math.isfinite(record.sigma_opt):
        raise SourceDesignError(f"pump optimization failed: {record.status}")
    return PumpSpec(sigma=record.sigma_opt, omega0=omega0_p)


def resolve_pump(config: RunConfig) -> Optional[PumpSpec]:
    """Configured pump, or the Schmidt-number optimum for this ratio"""
    if config.pump is not None:
        return config.pump
    logger.info("No pump width configured; optimizing for ratio %g", config.kappa_p_ratio)
    record = optimize_ratio(config.kappa_p_ratio, config.tol_k, config.g_p_over_opt,
                            config.g_is_over_opt, config.grid_n, config.grid_halfwidth_factor,
                            config.max_n)
    if record.is_plateau:
        logger.info("ratio %g: using the broadband limit (%s)", config.kappa_p_ratio, record.status)
    return pump_for_record(record, config.omega0_p)


def describe_pump(pump: Optional[PumpSpec], kappa_p: float) -> dict:
    if pump is None:
        return {"broadband": True, "sigma": math.inf, "fwhm": math.inf, "fwhm_over_kappa_p": math.inf}
    return {
        "broadband": False,
        "sigma": pump.sigma,
        "fwhm": pump.fwhm,
        "fwhm_over_kappa_p": pump.fwhm / kappa_p,
    }


def cmd_jsa(config: RunConfig, out_dir: Path, heatmap: Optional[bool] = None,
            record: Optional[OptimizationRecord] = None) -> CommandResult:
    """
    JSI grid table, JSON sidecar with K and purity, optional SVG heatmap.
    `record` supplies the pump from an earlier optimization.
    """
    params = config.params
    pump = pump_for_record(record, config.omega0_p) if record is not None else resolve_pump(config)
    grid_i = default_mode_grid(params, Channel.IDLER, config.grid_n, config.grid_halfwidth_factor)
    grid_s = default_mode_grid(params, Channel.SIGNAL, config.grid_n, config.grid_halfwidth_factor)
    amplitude = jsa(params, pump, grid_i, grid_s)
    intensity = jsi(amplitude)

    result = CommandResult()
    try:
        schmidt, error = converged_schmidt(params, pump, config.grid_n, config.tol_k,
                                           halfwidth_factor=config.grid_halfwidth_factor,
                                           max_n=config.max_n)
        converged = True
    except NoConvergence as exc:
        schmidt, error, converged = exc.best, exc.error, False
        result.warnings.append(f"ratio {config.kappa_p_ratio:g}: {exc}")

    out_dir = Path(out_dir)
    offsets_i, offsets_s = grid_i.offsets, grid_s.offsets
    rows = ((offsets_i[j], offsets_s[k], intensity[j, k])
            for j in range(grid_i.n_points) for k in range(grid_s.n_points))
    result.files["jsi"] = write_table(out_dir / "jsi.tsv",
                                      ["idler_detuning", "signal_detuning", "jsi"], rows)

    meta = {
        "schmidt_number": schmidt.schmidt_number,
        "purity": schmidt.purity,
        "achieved_error": error,
        "converged": converged,
        "schmidt": schmidt.summary(),
        "jsi_correlation": jsi_correlation(amplitude),
        "grid_i": grid_i.describe(),
        "grid_s": grid_s.describe(),
        "params": params.to_dict(),
        "pump": describe_pump(pump, params.kappa_p),
        "config": config.model_dump(mode="json"),
    }
    result.files["meta"] = write_json(out_dir / "jsi.meta.json", meta)
    result.metrics = meta

    if config.heatmap if heatmap is None else heatmap:
        title = f"κp/κis = {config.kappa_p_ratio:g}, K = {schmidt.schmidt_number:.5f}"
        result.files["heatmap"] = write_heatmap(out_dir / "jsi.svg", intensity, grid_i, grid_s, title)

    logger.info("✅ JSI written to %s (K=%.6f, purity=%.6f)",
                out_dir, schmidt.schmidt_number, schmidt.purity)
    return result


# ============================================================================
# OPTIMIZE
# ============================================================================

def cmd_optimize(config: RunConfig, out_dir: Path, max_workers: int = 1) -> CommandResult:
    """Optimized pump width and minimal K for every configured ratio"""
    if not config.ratios:
        raise ConfigError("ratio list is empty")
    records = sweep_ratio(config.ratios, config.tol_k, config.g_p_over_opt, config.g_is_over_opt,
                          config.grid_n, config.grid_halfwidth_factor, config.max_n, max_workers)
    header = ["ratio", "fwhm_over_kappa_p", "k", "purity", "evals", "converged", "status"]
    rows = ([r.ratio, r.fwhm_over_kappa_p, r.k_min, r.purity, r.n_evals, r.converged,
             truncate_text(r.status, 200)] for r in records)
    path = write_table(Path(out_dir) / "optimize.tsv", header, rows)
    logger.info("✅ optimization table written to %s", path)
    return CommandResult(files={"optimize": path}, metrics={"records": records})


# ============================================================================
# REPRODUCE
# ============================================================================

def _ratio_config(config: RunConfig, ratio: float, fwhm_over_kappa_p: Optional[float]) -> RunConfig:
    return config.model_copy(update={
        "kappa_p_ratio": ratio,
        "g_p_over_opt": 1.0,
        "g_is_over_opt": 1.0,
        "pump_fwhm_over_kappa_p": fwhm_over_kappa_p,
    })


def _record_for(records: Sequence[OptimizationRecord], ratio: float) -> OptimizationRecord:
    for record in records:
        if record.ratio == ratio:
            return record
    raise SourceDesignError(f"no optimization record for ratio {ratio:g}")


def _converged_k(config: RunConfig) -> float:
    result, _ = converged_schmidt(config.params, config.pump, config.grid_n, config.tol_k / 10.0,
                                  halfwidth_factor=config.grid_halfwidth_factor, max_n=config.max_n)
    return result.schmidt_number


def cmd_reproduce(config: RunConfig, out_dir: Path, max_workers: int = 1) -> int:
    """Run every reproduction step; returns 0 iff all comparisons pass"""
    out_dir = Path(out_dir)
    start_time = time.time()
    checks = create_published_checks()
    collector = CheckCollector()
    artifacts: Dict[str, str] = {}

    # optimal coupling
    unit = coupled_params(1.0)
    collector.run(checks["third_derivative_at_g_opt"],
                  lambda: abs(phase_derivative_at_center(unit, Channel.PUMP, 3)))
    collector.run(checks["third_derivative_off_optimum"],
                  lambda: min(abs(v) for v in third_derivative_bracket(1.0)))

    # delay curves
    delay = {}

    def delay_ratio() -> float:
        delay.update(cmd_delay(config, out_dir).metrics)
        deviation = delay["max_deviation"]
        return min(deviation["0.9"], deviation["1.1"]) / deviation["1"]

    def center_delay_error() -> float:
        base = config.params
        params = base.with_couplings(optimal_coupling(base.kappa_p), base.g_is)
        slope = phase_slope_at_center(params, Channel.PUMP)
        return abs(delay["center_delay"] - slope) / slope

    collector.run(checks["delay_flatness_ratio"], delay_ratio)
    collector.run(checks["delay_center_matches_slope"], center_delay_error)
    artifacts["delay"] = str(out_dir / "delay.tsv")

    # pump-width optimization for the published ratios
    records: List[OptimizationRecord] = []
    try:
        sweep_config = config.model_copy(update={"ratios": PUBLISHED_RATIOS, "g_p_over_opt": 1.0,
                                                 "g_is_over_opt": 1.0})
        records = cmd_optimize(sweep_config, out_dir, max_workers).metrics["records"]
        artifacts["optimize"] = str(out_dir / "optimize.tsv")
    except (SourceDesignError, OSError) as e:
        collector.add_warning(f"optimization sweep failed: {e}")

    collector.run(checks["k_ratio_1"], lambda: _record_for(records, 1.0).k_min)
    collector.run(checks["purity_ratio_1"], lambda: _record_for(records, 1.0).purity)
    collector.run(checks["k_ratio_6.6"], lambda: _record_for(records, 6.6).k_min)
    collector.run(checks["k_minus_1_ratio_10"], lambda: _record_for(records, 10.0).k_min - 1.0)
    collector.run(checks["purity_ratio_10"], lambda: _record_for(records, 10.0).purity)
    for record in records:
        if not record.converged:
            collector.add_warning(f"ratio {record.ratio:g}: optimization not converged ({record.status})")

    fixed_width = {}

    def fixed_width_k() -> float:
        fixed_width["k"] = _converged_k(_ratio_config(config, 6.6, 0.45))
        return fixed_width["k"]

    collector.run(checks["k_ratio_6.6_fixed_fwhm"], fixed_width_k)
    collector.run(checks["k_excess_ratio_6.6_fixed_fwhm"],
                  lambda: fixed_width["k"] - _record_for(records, 6.6).k_min)

    # JSI exports at the optimized widths
    jsi_metrics: Dict[float, dict] = {}

    def jsi_value(ratio: float, key: str) -> float:
        if ratio not in jsi_metrics:
            record = _record_for(records, ratio)
            sub = _ratio_config(config, ratio, None)
            result = cmd_jsa(sub, out_dir / f"ratio_{ratio:g}", record=record)
            for warning in result.warnings:
                collector.add_warning(warning)
            jsi_metrics[ratio] = result.metrics
            artifacts[f"jsi_ratio_{ratio:g}"] = str(result.files["jsi"])
        return jsi_metrics[ratio][key]

    collector.run(checks["jsi_k_ratio_1"], lambda: jsi_value(1.0, "schmidt_number"))
    collector.run(checks["jsi_purity_ratio_10"], lambda: jsi_value(10.0, "purity"))

    # grid-convergence contract at the configured resolution
    convergence = {}
    for record in records:
        if not (record.is_plateau or math.isfinite(record.sigma_opt)):
            continue
        sub = _ratio_config(config, record.ratio, None)
        pump = pump_for_record(record, sub.omega0_p)
        try:
            coarse = schmidt_at_resolution(sub.params, pump, config.grid_n, config.grid_halfwidth_factor)
            fine = schmidt_at_resolution(sub.params, pump, 2 * config.grid_n - 1,
                                         config.grid_halfwidth_factor)
            change = abs(fine.schmidt_number - coarse.schmidt_number)
        except SourceDesignError as e:
            collector.add_warning(f"ratio {record.ratio:g}: convergence check failed: {e}")
            continue
        convergence[f"{record.ratio:g}"] = change
        if change >= CONVERGENCE_LIMIT:
            collector.add_warning(
                f"ratio {record.ratio:g}: |K({config.grid_n}) - K({2 * config.grid_n - 1})| = "
                f"{change:.3e} exceeds {CONVERGENCE_LIMIT:g}"
            )

    report = collector.export_report(out_dir / "report.json", extra={
        "artifacts": artifacts,
        "delay": delay,
        "optimization": [r.to_dict() for r in records],
        "convergence": convergence,
        "config": serialize_config(config).splitlines(),
        "runtime": format_runtime(time.time() - start_time),
    })
    summary = collector.get_summary()
    mark = "✅" if collector.all_passed() else "❌"
    logger.info("%s reproduce: %d/%d checks passed, %d warnings (report %s)",
                mark, summary["passed"], summary["total_checks"], summary["warnings"], report)
    return 0 if collector.all_passed() else 1


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringsource",
        description="Design a coupled-microring heralded single-photon source",
    )
    parser.add_argument("command", choices=["delay", "jsa", "optimize", "reproduce"])
    parser.add_argument("--config", type=Path, default=None, help="key=value configuration file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--heatmap", action="store_true", help="also write jsi.svg")
    parser.add_argument("--ratios", type=str, default=None, help="comma list of kappa_p/kappa_is")
    parser.add_argument("--grid-n", type=int, default=None, help="override grid_n")
    parser.add_argument("--workers", type=int, default=1, help="parallel ratio sweeps")
    parser.add_argument("--log-level", default=None, help="logging level (default INFO)")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    update = {}
    if args.ratios is not None:
        update["ratios"] = args.ratios
    if args.heatmap:
        update["heatmap"] = True
    if args.grid_n is not None:
        update["grid_n"] = args.grid_n
    if not update:
        return config
    try:
        overridden = RunConfig(**{**config.model_dump(), **update})
    except ValidationError as exc:
        raise ParseError(f"invalid command-line override: {exc}") from exc
    return overridden.validate_values()


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    level = (args.log_level or os.getenv("RINGSOURCE_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = apply_overrides(load_config(args.config), args)
        if args.command == "delay":
            cmd_delay(config, args.out)
        elif args.command == "jsa":
            cmd_jsa(config, args.out)
        elif args.command == "optimize":
            cmd_optimize(config, args.out, args.workers)
        else:
            return cmd_reproduce(config, args.out, args.workers)
    except (SourceDesignError, OSError) as e:
        logger.error("❌ %s failed: %s: %s", args.command, type(e).__name__, e)
        return 2
    return 0
