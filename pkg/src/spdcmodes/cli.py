"""Command-line front end.

Six subcommands cover the standard workflows:

    simulate     correlation kernel, intensity and coherence at one setting
    decompose    mode spectrum and profiles of the simulated kernel
    generate     synthesize a pseudothermal frame stack and store it
    reconstruct  recover kernel and spectrum from a stored stack
    sweep        mode width and mode count across pump amplitudes
    bench        symmetric estimator vs full 4D baseline, timed

Each run writes delimited tables (and PNG figures unless --no-figures)
into the output directory. Failures print a single `ErrorClass: message`
line on stderr and exit with a class-specific code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import compare_methods
from .bundles import write_settings_echo, write_table
from .config import (
    build_config,
    build_grid,
    build_quadrature,
    echo_settings,
    load_settings,
)
from .errors import DataError, SpdcError, exit_code_for
from .recon import estimate_from_stack
from .schmidt import (
    diagonalize_1d,
    mode_fwhm,
    profile_fwhm,
    schmidt_number,
    tensor_mode,
    tensor_spectrum,
)
from .simulate import coherence_degree, g1_slice
from .stackio import read_stack, write_stack
from .synth import SynthesisSpec, synthesize_stack

__all__ = ["main", "run_command"]

_SPECTRUM_ROWS = 1024


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value settings file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one setting (repeatable)",
    )
    parser.add_argument("--out", default="out", metavar="DIR", help="output directory")
    parser.add_argument(
        "--no-figures", action="store_true", help="skip PNG rendering"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdcmodes",
        description="Spatial mode characterization of high-gain down-conversion",
    )
    parser.add_argument("--version", action="version", version=f"spdcmodes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("simulate", help="correlation kernel and intensity"))
    _add_common(sub.add_parser("decompose", help="mode spectrum of the kernel"))
    _add_common(sub.add_parser("generate", help="synthesize a frame stack"))
    p_rec = sub.add_parser("reconstruct", help="kernel and spectrum from a stack")
    _add_common(p_rec)
    p_rec.add_argument("--stack", required=True, metavar="FILE", help="stack container")
    _add_common(sub.add_parser("sweep", help="mode width and count vs pump amplitude"))
    _add_common(sub.add_parser("bench", help="compare against the full 4D baseline"))
    return parser


def _settings_from_args(args) -> dict:
    text = None
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise DataError(f"cannot read settings file {args.config}: {exc}") from exc
    overrides: dict[str, str] = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise DataError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return load_settings(text, overrides)


def _prepare_out(args, settings) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_settings_echo(out, echo_settings(settings))
    return out


def _spectrum_rows(result, limit=_SPECTRUM_ROWS):
    m = min(limit, result.lambdas.size)
    return [
        (k, int(result.index_pairs[k, 0]), int(result.index_pairs[k, 1]),
         result.lambdas[k])
        for k in range(m)
    ]


def _cmd_simulate(args) -> int:
    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    config = build_config(settings)
    grid = build_grid(settings)
    corr = g1_slice(config, grid, build_quadrature(settings))
    inten = corr.diagonal_intensity()
    coh = coherence_degree(corr)

    angles = grid.angles_mrad()
    write_table(
        out / "correlation.tsv",
        ["q_mrad"] + [f"c{k}" for k in range(grid.n_points)],
        [(angles[i], *corr.matrix[i]) for i in range(grid.n_points)],
        kind="correlation-matrix",
        provenance={"provenance": corr.provenance, **corr.metadata},
    )
    write_table(
        out / "intensity.tsv",
        ["angle_mrad", "intensity"],
        list(zip(angles, inten.values)),
        kind="intensity-profile",
        provenance=inten.metadata,
    )
    write_table(
        out / "coherence.tsv",
        ["offset_mrad", "degree", "spread", "pairs"],
        list(zip(coh.offsets_mrad, coh.degree, coh.spread, coh.pair_counts)),
        kind="coherence-curve",
        provenance={"residual": coh.residual},
    )
    write_table(
        out / "metrics.tsv",
        ["name", "value"],
        [
            ("total_intensity", inten.total()),
            ("coherence_residual", coh.residual),
            ("quad_nodes", corr.metadata["quad_nodes"]),
        ],
        kind="metrics",
    )
    if not args.no_figures:
        from . import figures

        figures.save_intensity_figure(out / "intensity.png", angles, inten.values)
        figures.save_correlation_figure(out / "correlation.png", angles, corr.matrix)
    return 0


def _cmd_decompose(args) -> int:
    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    config = build_config(settings)
    grid = build_grid(settings)
    corr = g1_slice(config, grid, build_quadrature(settings))
    one_d = diagonalize_1d(corr)
    result = tensor_spectrum(one_d)
    k2 = schmidt_number(result)
    fwhm0 = mode_fwhm(tensor_mode(result, 0), grid)

    angles = grid.angles_mrad()
    n_modes = max(1, settings["n_modes"])
    write_table(
        out / "spectrum.tsv",
        ["k", "i", "j", "lambda"],
        _spectrum_rows(result),
        kind="mode-spectrum",
        provenance={"normalized": "full untruncated sum"},
    )
    write_table(
        out / "mu.tsv",
        ["i", "mu"],
        list(enumerate(one_d.eigenvalues)),
        kind="mode-weights-1d",
        provenance={"negative_mass": one_d.negative_mass},
    )
    write_table(
        out / "modes_1d.tsv",
        ["angle_mrad"] + [f"mode_{i}" for i in range(n_modes)],
        [(angles[r], *one_d.modes[r, :n_modes]) for r in range(grid.n_points)],
        kind="mode-profiles-1d",
    )
    mu = one_d.eigenvalues
    k1 = float((mu.sum() ** 2) / np.sum(mu * mu)) if np.any(mu > 0) else float("nan")
    write_table(
        out / "metrics.tsv",
        ["name", "value"],
        [
            ("schmidt_number_2d", k2),
            ("schmidt_number_1d", k1),
            ("fwhm_mode0_mrad", fwhm0),
        ],
        kind="metrics",
    )
    if not args.no_figures:
        from . import figures

        figures.save_spectrum_figure(out / "spectrum.png", result.lambdas)
        figures.save_modes_figure(out / "modes.png", angles, one_d.modes, n_modes)
    return 0


def _cmd_generate(args) -> int:
    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    config = build_config(settings)
    grid = build_grid(settings)
    corr = g1_slice(config, grid, build_quadrature(settings))
    one_d = diagonalize_1d(corr)
    spec = SynthesisSpec(
        one_d=one_d,
        n_frames=settings["n_frames"],
        seed=settings["seed"],
        noise_sigma=settings["noise_sigma"],
        offset=settings["offset"],
        quantize=settings["quantize"],
    )
    stack = synthesize_stack(spec, metadata={"gain": config.g})
    stack_path = out / "stack.qstk"
    write_stack(stack_path, stack)

    write_table(
        out / "mu.tsv",
        ["i", "mu"],
        list(enumerate(one_d.eigenvalues)),
        kind="mode-weights-1d",
        provenance={"seed": settings["seed"], "n_frames": settings["n_frames"]},
    )
    write_table(
        out / "metrics.tsv",
        ["name", "value"],
        [
            ("n_frames", stack.n_frames),
            ("seed", settings["seed"]),
            ("mean_intensity", float(stack.frames.mean())),
        ],
        kind="metrics",
    )
    if not args.no_figures:
        from . import figures

        figures.save_correlation_figure(
            out / "mean_frame.png", grid.angles_mrad(), stack.mean_frame(),
            title="mean frame",
        )
    return 0


def _cmd_reconstruct(args) -> int:
    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    stack = read_stack(args.stack)
    est = estimate_from_stack(
        stack, n_angles=settings["n_angles"], variant=settings["variant"]
    )
    one_d = diagonalize_1d(est)
    result = tensor_spectrum(one_d)
    k2 = schmidt_number(result)

    side = est.grid.n_points
    angles = est.grid.angles_mrad()
    write_table(
        out / "recon_correlation.tsv",
        ["q_mrad"] + [f"c{k}" for k in range(side)],
        [(angles[i], *est.matrix[i]) for i in range(side)],
        kind="correlation-matrix",
        provenance={"provenance": est.provenance, **est.metadata},
    )
    write_table(
        out / "spectrum.tsv",
        ["k", "i", "j", "lambda"],
        _spectrum_rows(result),
        kind="mode-spectrum",
        provenance={"variant": settings["variant"]},
    )
    write_table(
        out / "metrics.tsv",
        ["name", "value"],
        [
            ("schmidt_number_2d", k2),
            ("clamped_mass", est.metadata["clamped_mass"]),
            ("acc_to_true_ratio", est.metadata["acc_to_true_ratio"]),
            ("center_row", est.metadata["center_row"]),
            ("center_col", est.metadata["center_col"]),
            ("n_frames", stack.n_frames),
        ],
        kind="metrics",
    )
    if not args.no_figures:
        from . import figures

        figures.save_correlation_figure(
            out / "correlation.png", angles, est.matrix, title="reconstructed"
        )
        figures.save_spectrum_figure(out / "spectrum.png", result.lambdas)
    return 0


def _cmd_sweep(args) -> int:
    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    grid = build_grid(settings)
    quad = build_quadrature(settings)
    base = build_config(settings)

    rows = []
    for g in settings["gains"]:
        config = base.with_gain(g)
        corr = g1_slice(config, grid, quad)
        result = tensor_spectrum(diagonalize_1d(corr))
        inten = corr.diagonal_intensity()
        rows.append(
            (
                g,
                mode_fwhm(tensor_mode(result, 0), grid),
                profile_fwhm(inten.values, grid.pitch_mrad),
                schmidt_number(result),
                inten.total(),
            )
        )
    write_table(
        out / "sweep.tsv",
        ["gain", "fwhm_mode0_mrad", "fwhm_intensity_mrad", "schmidt_number_2d",
         "total_intensity"],
        rows,
        kind="gain-sweep",
    )
    fw = np.array([r[1] for r in rows])
    kk = np.array([r[3] for r in rows])
    tot = np.array([r[4] for r in rows])
    log_tot = np.log(tot)
    metrics = [
        ("fwhm_growth_percent", 100.0 * (fw[-1] - fw[0]) / fw[0]),
        ("fwhm_monotone_increasing", bool(np.all(np.diff(fw) > 0.0))),
        ("mode_count_decreasing", bool(np.all(np.diff(kk) < 0.0))),
        ("total_intensity_increasing", bool(np.all(np.diff(tot) > 0.0))),
        ("log_intensity_convex", bool(np.all(np.diff(log_tot, 2) > 0.0))
         if len(rows) >= 3 else False),
    ]
    write_table(out / "metrics.tsv", ["name", "value"], metrics, kind="metrics")
    if not args.no_figures:
        from . import figures

        figures.save_sweep_figure(out / "sweep.png", [r[0] for r in rows], fw, kk)
    return 0


def _cmd_bench(args) -> int:
    from .simulate import WavevectorGrid, gaussian_schell_correlation

    settings = _settings_from_args(args)
    out = _prepare_out(args, settings)
    rows = []
    for n in settings["bench_sizes"]:
        grid = WavevectorGrid(n_points=n, pitch_mrad=settings["pitch_mrad"])
        span = n * settings["pitch_mrad"]
        kernel = gaussian_schell_correlation(
            grid, sigma_intensity_mrad=0.15 * span, sigma_coherence_mrad=0.1 * span
        )
        one_d = diagonalize_1d(kernel)
        stack = synthesize_stack(
            SynthesisSpec(
                one_d=one_d,
                n_frames=settings["bench_frames"],
                seed=settings["seed"] + n,
            )
        )
        report = compare_methods(
            stack,
            top_m=settings["bench_top"],
            n_angles=settings["n_angles"],
            repeats=settings["bench_repeats"],
        )
        rows.append(
            (
                n,
                report.symmetric_total_s,
                report.full4d_total_s,
                report.speedup,
                report.l1_top,
                report.subspace,
                report.compared_m,
            )
        )
    write_table(
        out / "bench.tsv",
        ["n", "t_symmetric_s", "t_full4d_s", "speedup", "l1_top", "subspace",
         "compared_m"],
        rows,
        kind="bench-report",
        provenance={
            "n_frames": settings["bench_frames"],
            "repeats": settings["bench_repeats"],
        },
    )
    if not args.no_figures:
        from . import figures

        figures.save_bench_figure(
            out / "bench.png", [r[0] for r in rows], [r[3] for r in rows]
        )
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "decompose": _cmd_decompose,
    "generate": _cmd_generate,
    "reconstruct": _cmd_reconstruct,
    "sweep": _cmd_sweep,
    "bench": _cmd_bench,
}


def run_command(argv: list[str]) -> int:
    """Parse and run one command; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SpdcError as exc:
        message = str(exc).replace("\n", " ")
        print(f"{type(exc).__name__}: {message}", file=sys.stderr)
        return exit_code_for(exc)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
