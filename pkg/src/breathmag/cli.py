"""Command-line front end: ``breathmag {estimate,synth,eval,roi}``.

Exit codes: 0 success, 1 input/config error, 2 no valid window.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import errors
from .amp_path import write_level_csv
from .config import METHODS, PROFILES, parse_config_text, resolve
from .estimator import (MotionMatrix, WindowingConfig, estimate_windows, read_results_csv,
                        window_slicer, write_results_csv)
from .evaluation import evaluate, read_reference_csv, write_plot_data, write_report_csv
from .frameio import load_sequence, save_y8, write_pgm
from .phase_path import write_phase_csv
from .pipeline import amplitude_signals, calibrate_eta_for_run, estimate_with_rois, phase_signals
from .roi import select_rois, write_manifest
from .synth import Distractor, SynthSpec, generate, noise_sigma_for_snr, write_truth_csv

EXIT_OK, EXIT_INPUT, EXIT_NO_WINDOW = 0, 1, 2

_MODULE_OF = {
    "frame-io": (errors.EmptySequence, errors.MixedDimensions, errors.UnreadableFrame,
                 errors.ChannelMismatch),
    "pyramid": (errors.TooSmall, errors.DimMismatch, errors.TooManyLevels),
    "temporal": (errors.InvalidBand,),
    "estimator": (errors.FrequencyAtEdge, errors.WindowTooLong),
    "roi": (errors.FrameTooSmall, errors.InsufficientFrames, errors.AllRoisGated),
    "synth": (errors.SpecInvalid,),
    "eval": (errors.LengthMismatch, errors.ZeroReference),
}


def _qualified(exc: Exception) -> str:
    for module, classes in _MODULE_OF.items():
        if isinstance(exc, classes):
            return f"{module}: {type(exc).__name__}: {exc}"
    return f"{type(exc).__name__}: {exc}"


def _run_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="flat key=value file")
    g.add_argument("--profile", choices=sorted(PROFILES))
    g.add_argument("--method", choices=METHODS)
    g.add_argument("--levels", type=int)
    g.add_argument("--window-s", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--rois", type=int)
    g.add_argument("--roi-size", type=int)
    g.add_argument("--downsample", type=int)
    g.add_argument("--calib-frames", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--gamma-th", type=float)
    g.add_argument("--gamma-bin", type=float)
    g.add_argument("--motion-th", type=float)
    g.add_argument("--eta", type=float, help="periodicity threshold; negative calibrates on noise")
    g.add_argument("--noise-floor", type=float)
    g.add_argument("--grid-step", type=float)
    g.add_argument("--fps", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--use-rois", action="store_true", default=None)
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key")


_RUN_KEYS = ("profile", "method", "levels", "window_s", "rho", "rois", "roi_size", "downsample",
             "calib_frames", "alpha", "gamma_th", "gamma_bin", "motion_th", "eta", "noise_floor", "grid_step",
             "fps", "seed", "use_rois")


def _resolve_config(args):
    file_values = parse_config_text(args.config.read_text()) if args.config else {}
    overrides = {k: getattr(args, k) for k in _RUN_KEYS}
    overrides.update(parse_config_text("\n".join(args.set)))
    return resolve(file_values=file_values, **overrides)


def _load(args, cfg):
    return load_sequence(args.input, cfg.fps or None)


def _with_eta(cfg, dims, fs_hz, design, amp_cfg=None):
    if cfg.eta >= 0:
        return cfg
    eta = calibrate_eta_for_run(dims, fs_hz, cfg.method, design, cfg.levels, cfg.alpha,
                                cfg.windowing(), cfg.estimator(), cfg.noise_floor, amp_cfg,
                                seed=cfg.seed)
    return replace(cfg, eta=eta)


def cmd_estimate(args) -> int:
    cfg = _resolve_config(args)
    seq = _load(args, cfg)
    design = cfg.design(seq.fs_hz)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if cfg.use_rois:
        rois = select_rois(seq, cfg.roi_config(seq.fs_hz), cfg.estimator())
        cfg = _with_eta(cfg, (cfg.roi_size, cfg.roi_size), seq.fs_hz, design)
        Path(str(out) + ".config").write_text(cfg.to_text())
        run = estimate_with_rois(seq, rois, cfg.method, design, cfg.levels, cfg.alpha,
                                 cfg.windowing(), cfg.estimator(), cfg.gamma_bin, cfg.motion_th)
        write_results_csv(run.estimates, out)
        if not any(e.valid for e in run.estimates):
            print("roi: AllRoisGated: no window has an admitted ROI", file=sys.stderr)
            return EXIT_NO_WINDOW
        return EXIT_OK
    if cfg.method == "phase":
        sig = phase_signals(seq, design, cfg.levels, cfg.alpha)
        if args.dump_signals:
            write_phase_csv(sig, args.dump_signals, seq.fs_hz)
        cfg = _with_eta(cfg, (seq.height, seq.width), seq.fs_hz, design)
    else:
        sig, used = amplitude_signals(seq, design, cfg.levels, cfg.amp_config())
        if args.dump_signals:
            write_level_csv(sig, args.dump_signals, seq.fs_hz)
        cfg = replace(cfg, gamma_th=used.gamma_th)
        cfg = _with_eta(cfg, (seq.height, seq.width), seq.fs_hz, design, used)
    Path(str(out) + ".config").write_text(cfg.to_text())
    estimates = estimate_windows(MotionMatrix(sig.as_motion(), seq.fs_hz), cfg.windowing(),
                                 cfg.estimator())
    write_results_csv(estimates, out)
    return EXIT_OK


_SPEC_KEYS = {
    "width": int, "height": int, "fps": float, "duration_s": float, "f0_hz": float,
    "displacement_px": float, "pattern": str, "noise_sigma": float, "snr_db": float,
    "wavelength_px": float, "direction_deg": float, "contrast": float,
    "distractor_onset_s": float, "distractor_duration_s": float, "distractor_px": float,
    "window_s": float, "rho": float,
}


def parse_synth_spec(text: str) -> tuple[SynthSpec, dict]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _SPEC_KEYS:
            raise errors.SpecInvalid(f"line {lineno}: unknown or malformed entry {raw!r}")
        try:
            values[key] = _SPEC_KEYS[key](value.strip())
        except ValueError as exc:
            raise errors.SpecInvalid(f"line {lineno}: {exc}") from exc
    distractor = None
    if "distractor_onset_s" in values:
        distractor = Distractor(values["distractor_onset_s"],
                                values.get("distractor_duration_s", 2.0),
                                values.get("distractor_px", 8.0))
    spec = SynthSpec(
        dims=(values.get("height", 64), values.get("width", 64)),
        fs_hz=values.get("fps", 30.0), duration_s=values.get("duration_s", 60.0),
        f0_hz=values.get("f0_hz", 0.25), displacement_px=values.get("displacement_px", 1.0),
        pattern=values.get("pattern", "gabor"), noise_sigma=values.get("noise_sigma", 0.0),
        distractor=distractor, wavelength_px=values.get("wavelength_px", 12.0),
        direction_deg=values.get("direction_deg", 0.0), contrast=values.get("contrast", 0.4))
    if "snr_db" in values:
        spec = replace(spec, noise_sigma=noise_sigma_for_snr(spec, values["snr_db"]))
    windowing = {"window_s": values.get("window_s", 20.0), "rho": values.get("rho", 0.5)}
    return spec, windowing


def cmd_synth(args) -> int:
    spec, windowing = parse_synth_spec(Path(args.spec).read_text())
    seq, truth = generate(spec, args.seed)
    out = save_y8(seq, args.out)
    windows = window_slicer(seq.n_frames, WindowingConfig(**windowing), seq.fs_hz)
    write_truth_csv(truth.window_truth(windows), str(out) + ".truth.csv")
    return EXIT_OK


def cmd_eval(args) -> int:
    results = read_results_csv(args.results)
    ref = read_reference_csv(args.reference, args.offset)
    missing = [r["window"] for r in results if r["window"] not in ref]
    if missing:
        raise errors.LengthMismatch(f"no reference for windows {missing[:5]}")
    est = np.array([r["f0_hz"] for r in results])
    f_ref = np.array([ref[r["window"]] for r in results])
    warm = None if args.include_warmup else np.array([r["warmup"] for r in results])
    report = evaluate(est, f_ref, warmup=warm, genie=args.genie, db_factor=args.db_factor)
    if args.note:
        report.notes.append(args.note)
    text = report.summary()
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_report_csv(report, out)
        Path(str(out) + ".txt").write_text(text)
        t = [0.5 * (r["t_start_s"] + r["t_end_s"]) for r in results]
        write_plot_data(str(out) + ".plot.csv", t, est, f_ref)
    return EXIT_OK


def cmd_roi(args) -> int:
    cfg = _resolve_config(args)
    seq = _load(args, cfg)
    rois = select_rois(seq, cfg.roi_config(seq.fs_hz), cfg.estimator())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(rois, out)
    amp = rois.amplitude_map
    peak = amp.max()
    write_pgm(amp / peak if peak > 0 else amp, args.heatmap or str(out) + ".pgm")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="breathmag",
                                     description="Respiratory rate from video.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="per-window respiratory rate")
    p.add_argument("input", help="frame directory or .y8 file")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--dump-signals", help="CSV of the extracted motion signals")
    _run_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synth", help="render a synthetic breathing video")
    p.add_argument("spec", help="key=value synthetic video description")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synth.y8")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score results against a reference")
    p.add_argument("results")
    p.add_argument("reference", help="CSV with columns window,f0_hz")
    p.add_argument("--genie", action="store_true", help="halve doubled estimates")
    p.add_argument("--offset", type=int, default=0, help="shift reference window indices")
    p.add_argument("--include-warmup", action="store_true")
    p.add_argument("--db-factor", type=float, default=20.0)
    p.add_argument("--note", help="line appended to the text summary")
    p.add_argument("--out", help="report CSV (summary and plot data written alongside)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roi", help="select ROIs and dump the amplitude map")
    p.add_argument("input")
    p.add_argument("--out", default="rois.txt")
    p.add_argument("--heatmap", help="PGM path for the amplitude map")
    _run_options(p)
    p.set_defaults(func=cmd_roi)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (errors.BreathmagError, ValueError, OSError) as exc:
        print(_qualified(exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
