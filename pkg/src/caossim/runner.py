"""Scenario execution: synth -> encode -> channel -> decode -> metrics.

Slots are processed one at a time (encode, impair, decode, discard) so
long acquisitions never hold every stream in memory.  The counter-based
noise keying makes the result independent of processing order, and all
output files are written with stable formatting, so a rerun of the same
scenario is byte-identical.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio, metrics
from .channel import add_noise, quantize
from .decoder import (
    DecodedImage,
    assemble_image,
    decode_cdma,
    decode_slot,
    decode_slot_free,
    fft_radix2,
)
from .encoder import (
    CdmaConfig,
    WalshAssignment,
    encode_cdma,
    encode_slot,
    schedule_fdma_tdma,
)
from .freq_plan import (
    FrequencyPlan,
    ValidationReport,
    design_plan,
    plan_from_frequencies,
    validate_plan,
)
from .scenario import Scenario, ScenarioError, TargetSpec
from .scene_optics import (
    CaosGrid,
    OpticsConfig,
    Scene,
    SpectralAnchor,
    angular_dispersion,
    check_lens_constraints,
    grating_beta,
    hdr_patch_masks,
    make_hdr_patch_target,
    make_spectral_line_scene,
    spectral_width_per_column,
)

__all__ = ["PlanRejectedError", "StripeReport", "RunReport", "run"]

OUTDIR_ENV = "CAOSSIM_OUTDIR"
FULL_SCALE_HEADROOM = 1.25


class PlanRejectedError(ScenarioError):
    """Strict-mode abort: the carrier set failed validation."""

    def __init__(self, report: ValidationReport):
        super().__init__("frequency plan failed validation:\n" + report.summary())
        self.report = report


@dataclass(frozen=True)
class StripeReport:
    center_nm: float
    bandwidth_nm: float
    row: int
    col_first: int
    col_last: int


@dataclass(eq=False)
class RunReport:
    scenario: Scenario
    outdir: Path | None = None
    scenes: list[Scene] = field(default_factory=list)
    images: list[DecodedImage] = field(default_factory=list)
    patch: metrics.PatchReport | None = None
    stripes: list[StripeReport] = field(default_factory=list)
    validation: ValidationReport | None = None
    encoding_time_s: float | None = None
    speedup_vs_single_channel: float | None = None
    clip_count: int = 0
    spectra: np.ndarray | None = None
    metrics_text: str = ""

    @property
    def scene(self) -> Scene:
        return self.scenes[0]

    @property
    def image(self) -> DecodedImage:
        return self.images[0]


def resolve_outdir(scenario: Scenario, outdir: str | Path | None) -> Path | None:
    if outdir is not None:
        return Path(outdir)
    env = os.environ.get(OUTDIR_ENV)
    if env:
        return Path(env)
    if scenario.output_dir is not None:
        return Path(scenario.output_dir)
    return None


def build_scene(target: TargetSpec, grid: CaosGrid) -> Scene:
    if target.kind == "uniform":
        return Scene(np.full((grid.rows, grid.cols), target.level))
    if target.kind == "explicit":
        arr = np.array(target.values, dtype=np.float64)
        if arr.shape != (grid.rows, grid.cols):
            raise ScenarioError(
                f"explicit target shape {arr.shape} does not match grid "
                f"{(grid.rows, grid.cols)}"
            )
        return Scene(arr)
    if target.kind == "hdr-patches":
        return make_hdr_patch_target(
            grid,
            target.attenuations_db,
            target.layout,
            target.patch_radius,
            target.background,
        )
    if target.kind == "image-file":
        path = Path(target.path)
        if path.suffix == ".pgm":
            return Scene(fileio.read_pgm16(path))
        return Scene(fileio.read_matrix_csv(path))
    raise ScenarioError(f"target kind {target.kind!r} has no direct scene form")


def _build_plan(scenario: Scenario) -> FrequencyPlan:
    spec = scenario.plan
    if spec.frequencies:
        return plan_from_frequencies(spec.frequencies, spec.T, spec.p)
    return design_plan(spec.T, spec.p, spec.m, spec.P)


def _stream_peak(scene: Scene, schedule) -> float:
    """Noiseless peak over slots: carriers share phase, so the first sample
    of a slot is the sum of its pixel irradiances."""
    flat = scene.irradiance.ravel()
    return max(sum(flat[p] for p, _ in slot) for slot in schedule.slots)


def _attach_patch_report(run: RunReport, grid: CaosGrid) -> None:
    target = run.scenario.target
    masks = hdr_patch_masks(
        grid, target.layout, len(target.attenuations_db), target.patch_radius
    )
    dark = run.scene.irradiance == 0.0
    designed = [10.0 ** (-a / 20.0) for a in target.attenuations_db]
    run.patch = metrics.patch_report(run.image.estimates, masks, designed, dark)


def _run_tdma(scenario: Scenario, grid: CaosGrid, scene: Scene) -> RunReport:
    plan = _build_plan(scenario)
    report = validate_plan(plan.channels, plan.delta_f, plan.fs)
    if not report.passed and not scenario.permissive:
        raise PlanRejectedError(report)

    window = plan.window()
    schedule = schedule_fdma_tdma(grid.num_pixels, plan)
    noise_cfg = scenario.noise_config()
    adc_cfg = scenario.adc_config(
        auto_full_scale=FULL_SCALE_HEADROOM * max(_stream_peak(scene, schedule), 1e-12)
    )
    strict = not scenario.permissive

    estimates = []
    spectra_mags = [] if scenario.write_spectra else None
    clip_total = 0
    for i, slot in enumerate(schedule.slots):
        stream = encode_slot(scene, slot, window, strict=strict)
        stream = add_noise(stream, noise_cfg, slot_index=i)
        stream, clipped = quantize(stream, adc_cfg)
        clip_total += clipped
        if spectra_mags is not None:
            spec = fft_radix2(stream)
            spectra_mags.append(np.abs(spec.coeffs[: window.Q // 2 + 1]))
        if strict:
            estimates.append(decode_slot(stream, slot, plan))
        else:
            estimates.append(decode_slot_free(stream, slot))

    image = assemble_image(estimates, schedule, grid, mode=scenario.mode)
    if scenario.intermode_scale != 1.0:
        image.estimates = image.estimates * scenario.intermode_scale

    t_this = metrics.encoding_time(grid.num_pixels, plan.num_channels, plan.T)
    t_single = metrics.encoding_time(grid.num_pixels, 1, plan.T)
    run_report = RunReport(
        scenario=scenario,
        scenes=[scene],
        images=[image],
        validation=report,
        encoding_time_s=t_this,
        speedup_vs_single_channel=metrics.speedup(t_single, t_this),
        clip_count=clip_total,
    )
    if spectra_mags is not None:
        run_report.spectra = np.column_stack(spectra_mags)
    if scenario.target.kind == "hdr-patches":
        _attach_patch_report(run_report, grid)
    run_report.metrics_text = _tdma_metrics_text(run_report, plan, adc_cfg)
    return run_report


def _spectral_line_scenes(
    scenario: Scenario, grid: CaosGrid
) -> list[tuple[tuple[float, float] | None, Scene]]:
    target = scenario.target
    config = OpticsConfig()
    anchors = [SpectralAnchor(w, c) for w, c in scenario.anchors]
    out = []
    for i, (center, bw) in enumerate(target.bands):
        row = target.start_row + i * target.row_step
        scene = make_spectral_line_scene(
            grid, row, center, bw, config, anchors, target.source_temp_k
        )
        out.append(((center, bw), scene))
    return out


def _run_cdma(scenario: Scenario, grid: CaosGrid) -> RunReport:
    spec = scenario.cdma
    cfg = CdmaConfig(bit_rate=spec.bit_rate, samples_per_bit=spec.samples_per_bit)
    assignment = WalshAssignment.sequential(grid.num_pixels, spec.code_length)
    noise_cfg = scenario.noise_config()

    if scenario.target.kind == "spectral-line":
        band_scenes = _spectral_line_scenes(scenario, grid)
    else:
        band_scenes = [(None, build_scene(scenario.target, grid))]

    run_report = RunReport(scenario=scenario)
    for i, (band, scene) in enumerate(band_scenes):
        stream = encode_cdma(scene, assignment, cfg)
        stream = add_noise(stream, noise_cfg, slot_index=i)
        adc_cfg = scenario.adc_config(
            auto_full_scale=FULL_SCALE_HEADROOM * max(float(stream.samples.max()), 1e-12)
        )
        stream, clipped = quantize(stream, adc_cfg)
        run_report.clip_count += clipped
        image = decode_cdma(stream, assignment, cfg, grid)
        if scenario.intermode_scale != 1.0:
            image.estimates = image.estimates * scenario.intermode_scale
        run_report.scenes.append(scene)
        run_report.images.append(image)
        if band is not None:
            run_report.stripes.append(_extract_stripe(image, band))

    run_report.encoding_time_s = spec.code_length / spec.bit_rate
    if scenario.target.kind == "hdr-patches":
        _attach_patch_report(run_report, grid)
    run_report.metrics_text = _cdma_metrics_text(run_report)
    return run_report


def _extract_stripe(image: DecodedImage, band: tuple[float, float]) -> StripeReport:
    est = image.estimates
    peak = float(est.max())
    mask = est > max(peak * 1e-6, 1e-12)
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size:
        row = int(rows[np.argmax([est[r][mask[r]].sum() for r in rows])])
        cols = np.flatnonzero(mask[row])
        return StripeReport(band[0], band[1], row, int(cols[0]), int(cols[-1]))
    return StripeReport(band[0], band[1], -1, -1, -1)


def _recovered_dr_line(run_report: RunReport) -> list[str]:
    designed = run_report.scene.irradiance.ravel()
    rec = run_report.image.estimates.ravel()[designed > 0]
    if rec.size < 2 or rec.min() <= 0:
        return []
    dr = metrics.dynamic_range_db(float(rec.max()), float(rec.min()))
    return [f"recovered dynamic range: {dr:.4f} dB"]


def _pixel_table(run_report: RunReport) -> list[str]:
    designed = run_report.scene.irradiance.ravel()
    img = run_report.image
    rec = img.estimates.ravel()
    if rec.size > 64:
        return []
    lines = [f"{'pixel':>6} {'slot':>5} {'channel':>10} {'designed':>13} {'recovered':>13}"]
    for i in range(rec.size):
        lines.append(
            f"{i:>6} {img.slot_map.ravel()[i]:>5} {img.channel_map.ravel()[i]:>10.6g} "
            f"{designed[i]:>13.6g} {rec[i]:>13.6g}"
        )
    return lines


def _tdma_metrics_text(run_report: RunReport, plan: FrequencyPlan, adc_cfg) -> str:
    s = run_report.scenario
    lines = [
        f"mode: {s.mode}",
        f"grid: {s.rows} x {s.cols} ({s.rows * s.cols} pixels)",
        f"window: T={plan.T:g} s, fs={plan.fs:g} Sps, Q={plan.Q}, delta_f={plan.delta_f:g} Hz",
        "channels (Hz): " + ", ".join(f"{f:g}" for f in plan.channels),
        f"slots: {math.ceil(s.rows * s.cols / plan.num_channels)}",
        f"plan validation: {'pass' if run_report.validation.passed else 'FAIL (permissive run)'}",
    ]
    if not run_report.validation.passed:
        lines.append(run_report.validation.summary())
    lines += metrics.processing_gain_notes(plan.Q)
    lines.append(f"encoding time: {run_report.encoding_time_s:g} s")
    lines.append(
        f"single-channel reference: {metrics.encoding_time(s.rows * s.cols, 1, plan.T):g} s,"
        f" speedup {run_report.speedup_vs_single_channel:.4g}x"
    )
    if adc_cfg.enabled:
        lines.append(
            f"adc: {adc_cfg.bits}-bit, full_scale={float(adc_cfg.full_scale)!r},"
            f" clipped {run_report.clip_count} samples"
        )
    else:
        lines.append("adc: disabled")
    lines += _recovered_dr_line(run_report)
    lines += _pixel_table(run_report)
    if run_report.patch is not None:
        lines.append("patch report:")
        lines.append(run_report.patch.format_table())
    return "\n".join(lines) + "\n"


def _cdma_metrics_text(run_report: RunReport) -> str:
    s = run_report.scenario
    spec = s.cdma
    lines = [
        "mode: cdma",
        f"grid: {s.rows} x {s.cols} ({s.rows * s.cols} pixels)",
        f"walsh code length: {spec.code_length} bits at {spec.bit_rate:g} bit/s"
        f" ({spec.samples_per_bit} samples/bit, fs={spec.bit_rate * spec.samples_per_bit:g} Sps)",
        f"encoding time: {run_report.encoding_time_s:g} s per frame",
    ]
    for st in run_report.stripes:
        lines.append(
            f"band {st.center_nm:g} nm (bw {st.bandwidth_nm:g} nm): row {st.row},"
            f" columns {st.col_first}..{st.col_last}"
        )
    if run_report.patch is not None:
        lines.append("patch report:")
        lines.append(run_report.patch.format_table())
    return "\n".join(lines) + "\n"


def run_optics_check(scenario: Scenario) -> RunReport:
    config = OpticsConfig()
    anchors = [SpectralAnchor(w, c) for w, c in scenario.anchors]
    lo, hi = scenario.span_nm
    disp = angular_dispersion(750.0, config)
    width = spectral_width_per_column(lo, hi, scenario.n_columns)
    violations = check_lens_constraints(config)
    lines = [
        "optics check",
        f"grating: {config.grating_freq:g} lines/mm at {config.incidence_deg:g} deg"
        f" incidence, order {config.diffraction_order}",
        f"beta(750 nm): {grating_beta(750.0, config):.6f} rad",
        f"angular dispersion at 750 nm: {disp:.4f} nm/mrad",
        "anchors: " + ", ".join(f"{a.wavelength:g} nm -> column {a.column:g}" for a in anchors),
        f"mean spectral width per column over {lo:g}-{hi:g} nm across "
        f"{scenario.n_columns} columns: {width:.4f} nm",
        f"lens constraints (CF1={config.cyl_focal_1:g}, CF2={config.cyl_focal_2:g},"
        f" CF3={config.cyl_focal_3:g} cm): "
        + ("pass" if not violations else "; ".join(violations)),
    ]
    report = RunReport(scenario=scenario)
    report.metrics_text = "\n".join(lines) + "\n"
    return report


def run(scenario: Scenario, outdir: str | Path | None = None) -> RunReport:
    """Execute a scenario and write its artifact files if an output
    directory is configured (argument, CAOSSIM_OUTDIR, or scenario)."""
    if scenario.mode == "optics-check":
        report = run_optics_check(scenario)
    else:
        grid = CaosGrid(
            rows=scenario.rows,
            cols=scenario.cols,
            pixel_mirrors=scenario.pixel_mirrors,
            mirror_pitch_um=scenario.mirror_pitch_um,
        )
        if scenario.mode == "cdma":
            report = _run_cdma(scenario, grid)
        else:
            scene = build_scene(scenario.target, grid)
            report = _run_tdma(scenario, grid, scene)

    report.outdir = resolve_outdir(scenario, outdir)
    if report.outdir is not None:
        _write_outputs(report)
    return report


def _write_outputs(run_report: RunReport) -> None:
    out = run_report.outdir
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(
        run_report.scenario.to_json(), encoding="utf-8"
    )
    (out / "metrics.txt").write_text(run_report.metrics_text, encoding="utf-8")
    multi = len(run_report.images) > 1
    for i, (scene, image) in enumerate(zip(run_report.scenes, run_report.images)):
        tag = f"_{i}" if multi else ""
        fileio.write_matrix_csv(out / f"scene{tag}.csv", scene.irradiance)
        fileio.write_matrix_csv(out / f"decoded{tag}.csv", image.estimates)
        display = np.clip(image.estimates, 0.0, None)
        fileio.write_pgm16(out / f"decoded{tag}.pgm", display)
        if run_report.scenario.log_display:
            fileio.write_pgm16(
                out / f"decoded{tag}_log.pgm", fileio.log_display(display)
            )
    if run_report.spectra is not None:
        with open(out / "spectra.csv", "w", encoding="ascii") as fh:
            fh.write(
                ",".join(f"slot_{i}" for i in range(run_report.spectra.shape[1])) + "\n"
            )
            for row in run_report.spectra:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    if run_report.patch is not None:
        (out / "patch_report.csv").write_text(run_report.patch.to_csv(), encoding="ascii")
