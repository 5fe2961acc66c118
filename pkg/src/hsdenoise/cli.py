"""Command line interface.

Subcommands: simulate (draw a mixed-noise realization), denoise (solve
one recovery problem), evaluate (metrics and band exports), experiment
(the full cases-times-methods sweep with a CSV summary).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import numpy as np

from .cube import HSCube
from .cubeio import export_band_pgm, read_cube, write_cube
from .degrade import NOISE_CASES, NoiseSpec, calibrate_radii, simulate
from .metrics import metric_report
from .regularizer import BlockGeometry
from .solver import DenoiseProblem, StoppingRule, solve

CSV_HEADER = "dataset,case,method,mpsnr,mssim"
_METHOD_ORDER = {"noisy": 0, "s3ttv": 1, "sstv": 2}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_block(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def _parse_name_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _csv_row(dataset: str, case, method: str, report) -> str:
    return ",".join(
        [dataset, str(case), method, repr(float(report.mpsnr_db)), repr(float(report.mssim))]
    )


def _spec_from_args(args) -> NoiseSpec:
    explicit = [
        name
        for name, value in (
            ("--sigma", args.sigma),
            ("--sparse-rate", args.sparse_rate),
            ("--stripe-rate", args.stripe_rate),
        )
        if value is not None
    ]
    if args.case is not None:
        if explicit:
            raise ValueError(f"--case conflicts with {', '.join(explicit)}")
        return NoiseSpec.from_case(args.case, seed=args.seed, rho=args.rho)
    return NoiseSpec(
        gaussian_sigma=args.sigma or 0.0,
        sparse_rate=args.sparse_rate or 0.0,
        stripe_rate=args.stripe_rate or 0.0,
        rho=args.rho,
        seed=args.seed,
    )


def cmd_simulate(args) -> int:
    clean = read_cube(args.input)
    if clean.data.min() < 0.0 or clean.data.max() > 1.0:
        return _fail(
            f"input range [{clean.data.min():.4g}, {clean.data.max():.4g}] "
            "is not normalized; rescale the cube to [0, 1] first"
        )
    try:
        spec = _spec_from_args(args)
    except ValueError as exc:
        return _fail(str(exc))

    result = simulate(clean, spec)
    alpha, beta, epsilon = calibrate_radii(spec, clean.size)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_cube(result.observed, out / "observed.hsc")
    write_cube(result.sparse, out / "sparse_true.hsc")
    write_cube(result.stripe, out / "stripe_true.hsc")
    write_cube(result.gaussian, out / "gaussian_true.hsc")
    dataset = args.dataset or Path(args.input).stem
    _write_json(
        out / "manifest.json",
        {
            "dataset": dataset,
            "case": args.case,
            "noise": spec.as_dict(),
            "radii": {"alpha": alpha, "beta": beta, "epsilon": epsilon},
            "shape": list(clean.shape),
            "source": Path(args.input).name,
        },
    )
    print(f"simulated {dataset}: wrote 4 cubes and manifest.json to {out}")
    return 0


def _resolve_radii(args, observed_size: int) -> tuple[float, float, float]:
    alpha = beta = epsilon = None

    manifest_path = None
    if args.manifest is not None:
        manifest_path = Path(args.manifest)
        if not manifest_path.is_file():
            raise ValueError(f"manifest not found: {manifest_path}")
    else:
        sibling = Path(args.input).parent / "manifest.json"
        if sibling.is_file():
            manifest_path = sibling
    if manifest_path is not None:
        radii = json.loads(manifest_path.read_text()).get("radii", {})
        alpha = radii.get("alpha")
        beta = radii.get("beta")
        epsilon = radii.get("epsilon")

    noise_flags = [args.sigma, args.sparse_rate, args.stripe_rate]
    if any(value is not None for value in noise_flags):
        spec = NoiseSpec(
            gaussian_sigma=args.sigma or 0.0,
            sparse_rate=args.sparse_rate or 0.0,
            stripe_rate=args.stripe_rate or 0.0,
            rho=args.rho,
        )
        alpha, beta, epsilon = calibrate_radii(spec, observed_size)

    if args.alpha is not None:
        alpha = args.alpha
    if args.beta is not None:
        beta = args.beta
    if args.epsilon is not None:
        epsilon = args.epsilon

    missing = [
        name
        for name, value in (("alpha", alpha), ("beta", beta), ("epsilon", epsilon))
        if value is None
    ]
    if missing:
        raise ValueError(
            f"no value for {', '.join(missing)}; pass --alpha/--beta/--epsilon, "
            "provide a manifest, or give the noise levels for calibration"
        )
    return float(alpha), float(beta), float(epsilon)


def cmd_denoise(args) -> int:
    observed = read_cube(args.input)
    try:
        alpha, beta, epsilon = _resolve_radii(args, observed.size)
        block_h, block_w = args.block
        geometry = BlockGeometry(
            n1=observed.n1,
            n2=observed.n2,
            block_h=block_h,
            block_w=block_w,
            stride_h=args.stride,
            stride_w=args.stride,
        )
        problem = DenoiseProblem(
            observed=observed,
            alpha=alpha,
            beta=beta,
            epsilon=epsilon,
            geometry=geometry,
            mu_lower=args.mu_lower,
            mu_upper=args.mu_upper,
            regularizer=args.regularizer,
        )
    except ValueError as exc:
        return _fail(str(exc))

    stopping = StoppingRule(relative_change=args.tol, max_iterations=args.max_iters)
    result = solve(problem, stopping)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_cube(result.u, out / "denoised.hsc")
    write_cube(result.s, out / "sparse_est.hsc")
    write_cube(result.t, out / "stripe_est.hsc")
    (out / "report.json").write_text(result.report.to_json() + "\n")
    status = "converged" if result.report.converged else "NOT converged"
    print(
        f"{args.regularizer}: {status} after {result.report.iterations} iterations "
        f"(relative change {result.report.relative_change:.3e})"
    )
    return 0 if result.report.converged else 3


def cmd_evaluate(args) -> int:
    estimate = read_cube(args.input)
    reference = read_cube(args.reference)
    dataset = args.dataset or Path(args.reference).stem
    case = args.case if args.case is not None else "-"

    report = metric_report(estimate, reference)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    if args.noisy is not None:
        noisy_report = metric_report(read_cube(args.noisy), reference)
        rows.append(_csv_row(dataset, case, "noisy", noisy_report))
    rows.append(_csv_row(dataset, case, args.method, report))
    (out / "metrics.csv").write_text(CSV_HEADER + "\n" + "\n".join(rows) + "\n")
    _write_json(
        out / "metrics.json",
        {
            "dataset": dataset,
            "case": args.case,
            "method": args.method,
            **report.as_dict(),
        },
    )

    for band in args.export_bands or []:
        export_band_pgm(estimate, band, out / f"estimate_band{band:03d}.pgm")
        export_band_pgm(reference, band, out / f"reference_band{band:03d}.pgm")
        diff = np.abs(estimate.data - reference.data)
        export_band_pgm(diff, band, out / f"absdiff_band{band:03d}.pgm", scale=args.scale)

    print(f"{args.method}: mpsnr {report.mpsnr_db:.2f} dB, mssim {report.mssim:.4f}")
    return 0


def _run_cell(payload) -> tuple:
    (case, method, observed, radii, geom_args, mu, tol, max_iters) = payload
    geometry = BlockGeometry(**geom_args)
    problem = DenoiseProblem(
        observed=HSCube(observed),
        alpha=radii[0],
        beta=radii[1],
        epsilon=radii[2],
        geometry=geometry,
        mu_lower=mu[0],
        mu_upper=mu[1],
        regularizer=method,
    )
    result = solve(problem, StoppingRule(relative_change=tol, max_iterations=max_iters))
    return (
        case,
        method,
        result.u.data,
        result.s.data,
        result.t.data,
        result.report.as_dict(),
    )


def cmd_experiment(args) -> int:
    clean = read_cube(args.input)
    if clean.data.min() < 0.0 or clean.data.max() > 1.0:
        return _fail("input cube must be normalized to [0, 1]")
    cases = args.cases
    bad = [c for c in cases if c not in NOISE_CASES]
    if bad:
        return _fail(f"unknown cases {bad}; choose from {sorted(NOISE_CASES)}")
    methods = args.regularizers
    bad = [m for m in methods if m not in ("s3ttv", "sstv")]
    if bad:
        return _fail(f"unknown regularizers {bad}")
    dataset = args.dataset or Path(args.input).stem

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    block_h, block_w = args.block

    sims = {}
    jobs_payload = []
    for case in cases:
        spec = NoiseSpec.from_case(case, seed=args.seed + case, rho=args.rho)
        sim = simulate(clean, spec)
        radii = calibrate_radii(spec, clean.size)
        case_dir = out / f"case{case}"
        case_dir.mkdir(parents=True, exist_ok=True)
        write_cube(sim.observed, case_dir / "observed.hsc")
        write_cube(sim.sparse, case_dir / "sparse_true.hsc")
        write_cube(sim.stripe, case_dir / "stripe_true.hsc")
        write_cube(sim.gaussian, case_dir / "gaussian_true.hsc")
        _write_json(
            case_dir / "manifest.json",
            {
                "dataset": dataset,
                "case": case,
                "noise": spec.as_dict(),
                "radii": {"alpha": radii[0], "beta": radii[1], "epsilon": radii[2]},
                "shape": list(clean.shape),
                "source": Path(args.input).name,
            },
        )
        sims[case] = sim
        geom_args = {
            "n1": clean.n1,
            "n2": clean.n2,
            "block_h": block_h,
            "block_w": block_w,
            "stride_h": args.stride,
            "stride_w": args.stride,
        }
        for method in methods:
            jobs_payload.append(
                (
                    case,
                    method,
                    sim.observed.data,
                    radii,
                    geom_args,
                    (0.0, 1.0),
                    args.tol,
                    args.max_iters,
                )
            )

    cells = {}
    failures = []
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {
                pool.submit(_run_cell, payload): payload[:2] for payload in jobs_payload
            }
            for future in concurrent.futures.as_completed(futures):
                case, method = futures[future]
                try:
                    cells[(case, method)] = future.result()
                except Exception as exc:
                    failures.append((case, method, str(exc)))
    else:
        for payload in jobs_payload:
            case, method = payload[:2]
            try:
                cells[(case, method)] = _run_cell(payload)
            except Exception as exc:
                failures.append((case, method, str(exc)))

    rows = []
    detail = []
    all_converged = True
    for case in cases:
        noisy_metrics = metric_report(sims[case].observed, clean)
        rows.append((case, "noisy", _csv_row(dataset, case, "noisy", noisy_metrics)))
        detail.append(
            {
                "case": case,
                "method": "noisy",
                "status": "ok",
                "mpsnr_db": noisy_metrics.mpsnr_db,
                "mssim": noisy_metrics.mssim,
            }
        )
        for method in methods:
            if (case, method) not in cells:
                continue
            _, _, u_hat, s_hat, t_hat, report = cells[(case, method)]
            cell_dir = out / f"case{case}" / method
            cell_dir.mkdir(parents=True, exist_ok=True)
            write_cube(HSCube(u_hat), cell_dir / "denoised.hsc")
            write_cube(HSCube(s_hat), cell_dir / "sparse_est.hsc")
            write_cube(HSCube(t_hat), cell_dir / "stripe_est.hsc")
            _write_json(cell_dir / "report.json", report)
            cell_metrics = metric_report(u_hat, clean)
            _write_json(
                cell_dir / "metrics.json",
                {
                    "dataset": dataset,
                    "case": case,
                    "method": method,
                    **cell_metrics.as_dict(),
                },
            )
            rows.append((case, method, _csv_row(dataset, case, method, cell_metrics)))
            detail.append(
                {
                    "case": case,
                    "method": method,
                    "status": "ok",
                    "converged": report["converged"],
                    "iterations": report["iterations"],
                    "mpsnr_db": cell_metrics.mpsnr_db,
                    "mssim": cell_metrics.mssim,
                }
            )
            if not report["converged"]:
                all_converged = False
            print(
                f"case {case} {method}: {report['iterations']} iterations, "
                f"mpsnr {cell_metrics.mpsnr_db:.2f} dB"
            )

    for case, method, message in failures:
        detail.append({"case": case, "method": method, "status": f"failed: {message}"})
        print(f"case {case} {method}: FAILED ({message})", file=sys.stderr)

    rows.sort(key=lambda r: (r[0], _METHOD_ORDER.get(r[1], 99)))
    (out / "results.csv").write_text(
        CSV_HEADER + "\n" + "\n".join(r[2] for r in rows) + "\n"
    )
    _write_json(out / "results.json", {"dataset": dataset, "cells": detail})
    print(f"wrote {out / 'results.csv'}")
    return 0 if not failures and all_converged else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsdenoise",
        description="Mixed-noise removal for hyperspectral cubes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a mixed-noise realization")
    sim.add_argument("--input", required=True, help="clean cube (.hsc, values in [0,1])")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--case", type=int, help=f"noise preset {sorted(NOISE_CASES)}")
    sim.add_argument("--sigma", type=float, help="gaussian noise level")
    sim.add_argument("--sparse-rate", type=float, help="fraction of voxels set to 0/1")
    sim.add_argument("--stripe-rate", type=float, help="fraction of striped (column, band) lines")
    sim.add_argument("--rho", type=float, default=0.95, help="radius safety factor")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--dataset", help="dataset label (default: input stem)")
    sim.set_defaults(func=cmd_simulate)

    den = sub.add_parser("denoise", help="solve one recovery problem")
    den.add_argument("--input", required=True, help="observed cube (.hsc)")
    den.add_argument("--out", required=True, help="output directory")
    den.add_argument("--manifest", help="manifest.json with radii (default: sibling of input)")
    den.add_argument("--alpha", type=float, help="l1 budget for the sparse component")
    den.add_argument("--beta", type=float, help="l1 budget for the stripe component")
    den.add_argument("--epsilon", type=float, help="l2 fidelity radius")
    den.add_argument("--sigma", type=float, help="gaussian level for radius calibration")
    den.add_argument("--sparse-rate", type=float, help="sparse rate for radius calibration")
    den.add_argument("--stripe-rate", type=float, help="stripe rate for radius calibration")
    den.add_argument("--rho", type=float, default=0.95, help="radius safety factor")
    den.add_argument("--block", type=_parse_block, default=(10, 10), metavar="HxW")
    den.add_argument("--stride", type=int, default=None, help="block stride (default: block size)")
    den.add_argument("--regularizer", choices=("s3ttv", "sstv"), default="s3ttv")
    den.add_argument("--tol", type=float, default=1e-5, help="relative-change stopping threshold")
    den.add_argument("--max-iters", type=int, default=20000)
    den.add_argument("--mu-lower", type=float, default=0.0)
    den.add_argument("--mu-upper", type=float, default=1.0)
    den.set_defaults(func=cmd_denoise)

    ev = sub.add_parser("evaluate", help="metrics and band exports")
    ev.add_argument("--input", required=True, help="estimate cube (.hsc)")
    ev.add_argument("--reference", required=True, help="reference cube (.hsc)")
    ev.add_argument("--out", required=True, help="output directory")
    ev.add_argument("--noisy", help="observed cube for a baseline row")
    ev.add_argument("--dataset", help="dataset label (default: reference stem)")
    ev.add_argument("--case", type=int, help="case label for the CSV")
    ev.add_argument("--method", default="s3ttv", help="method label for the CSV")
    ev.add_argument(
        "--export-bands",
        type=_parse_int_list,
        metavar="K1,K2,...",
        help="zero-based bands to export as 16-bit PGM",
    )
    ev.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="intensity multiplier for the absolute-difference export",
    )
    ev.set_defaults(func=cmd_evaluate)

    exp = sub.add_parser("experiment", help="cases x methods sweep with CSV summary")
    exp.add_argument("--input", required=True, help="clean cube (.hsc, values in [0,1])")
    exp.add_argument("--out", required=True, help="output directory")
    exp.add_argument(
        "--cases",
        type=_parse_int_list,
        default=sorted(NOISE_CASES),
        metavar="N1,N2,...",
    )
    exp.add_argument(
        "--regularizers",
        type=_parse_name_list,
        default=["s3ttv", "sstv"],
        metavar="NAME1,NAME2",
    )
    exp.add_argument("--block", type=_parse_block, default=(10, 10), metavar="HxW")
    exp.add_argument("--stride", type=int, default=None)
    exp.add_argument("--tol", type=float, default=1e-5)
    exp.add_argument("--max-iters", type=int, default=20000)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--rho", type=float, default=0.95)
    exp.add_argument("--jobs", type=int, default=1, help="parallel solver processes")
    exp.add_argument("--dataset", help="dataset label (default: input stem)")
    exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
