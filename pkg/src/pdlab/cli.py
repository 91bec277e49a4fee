"""Command-line surface: noise synthesis, estimation, stride adaptation,
PD-refined denoising, toy training, batch evaluation and the HTTP service."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .denoise import DctThreshold, LearnedToy, PdConfig, denoise_nonblind, pd_refine
from .estimate import DEFAULT_S_MAX, DEFAULT_TAU, adapt_stride, estimate_map_classical, estimate_map_learned
from .image import ImageError, Image, load_image, make_rng, save_image
from .metrics import psnr, ssim
from .noise import NoiseSpec, save_map_visualization, save_noise_map


def _unit_interval(text: str) -> float:
    try:
        k = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc
    if not 0.0 <= k <= 1.0:
        raise argparse.ArgumentTypeError("k must be in [0,1]")
    return k


def _sigma(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 75.0:
        raise argparse.ArgumentTypeError("sigma must be in [0,75]")
    return v


def _ratio(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 0.3:
        raise argparse.ArgumentTypeError("ratio must be in [0,0.3]")
    return v


def _stride(text: str):
    if text == "auto":
        return None
    try:
        s = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"stride must be 'auto' or an integer: {text}") from exc
    if s < 1:
        raise argparse.ArgumentTypeError("stride must be >= 1")
    return s


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="corrupt a clean image with synthetic noise")
    p.add_argument("--kind", choices=NoiseSpec.KINDS, default="awgn")
    p.add_argument("--sigma", type=_sigma, default=25.0)
    p.add_argument("--ratio", type=_ratio, default=0.0)
    p.add_argument("--sigma-s", type=float, default=0.0)
    p.add_argument("--sigma-c", type=float, default=0.0)
    p.add_argument("--upscale", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--map", dest="map_path", help="write the ground-truth noise map")
    p.add_argument("--map-png", dest="map_png", help="write a false-colour map preview")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("estimate", help="estimate a pixel-wise noise map")
    p.add_argument("--estimator", choices=("classical", "learned"), default="classical")
    p.add_argument("--model", help="checkpoint for the learned estimator")
    p.add_argument("--block", type=int, default=32)
    p.add_argument("--png", help="also write a false-colour preview")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("adapt", help="print the stride adaptation result as JSON")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--smax", type=int, default=DEFAULT_S_MAX)
    p.add_argument("input")

    p = sub.add_parser("denoise", help="PD-refined denoising")
    p.add_argument("--k", type=_unit_interval, default=0.0)
    p.add_argument("--stride", type=_stride, default=None, help="'auto' or an integer")
    p.add_argument("--denoiser", choices=("dct", "learned"), default="dct")
    p.add_argument("--model", help="checkpoint for the learned denoiser/estimator")
    p.add_argument("--mode", choices=("full", "i-only", "di-only"), default="full")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--smax", type=int, default=DEFAULT_S_MAX)
    p.add_argument("--ref", help="clean reference; adds PSNR to the report")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("train", help="train the toy estimator/denoiser pair")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--patch", type=int, default=25)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--est-layers", type=int, default=3)
    p.add_argument("--den-layers", type=int, default=6)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--mix", choices=("paper", "awgn"), default="paper")
    p.add_argument("--out", required=True, help="checkpoint path")

    p = sub.add_parser("eval", help="batch PSNR/SSIM over a parameter grid")
    p.add_argument("--ref", required=True, help="clean reference image")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--k", default="0", help="comma-separated blend factors")
    p.add_argument("--stride", default="auto", help="comma-separated strides or 'auto'")
    p.add_argument("--denoiser", choices=("dct", "learned"), default="dct")
    p.add_argument("--model")
    p.add_argument("--mode", choices=("full", "i-only", "di-only"), default="full")
    p.add_argument("inputs", nargs="+")

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--port", type=int, default=8650)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--model", help="checkpoint enabling the learned denoiser")
    p.add_argument("--data-dir", help="image store (defaults to PDLAB_DATA_DIR)")
    p.add_argument("--webui", help="static frontend directory (default: ./frontend/dist)")

    return parser


def _load_model(path):
    from .nn.checkpoint import load_checkpoint

    model, _ = load_checkpoint(path)
    return model


def _make_config(args, model) -> PdConfig:
    if args.denoiser == "learned":
        if model is None:
            raise ImageError("--denoiser learned requires --model")
        denoiser = LearnedToy(model)
        estimator = "learned"
    else:
        denoiser = DctThreshold()
        estimator = "classical"
        model = None
    return PdConfig(
        tau=getattr(args, "tau", DEFAULT_TAU),
        s_max=getattr(args, "smax", DEFAULT_S_MAX),
        stride_override=args.stride,
        k=args.k,
        denoiser=denoiser,
        estimator=estimator,
        model=model,
        mode=args.mode,
    )


def _cmd_synth(args) -> int:
    img = load_image(args.input)
    spec = NoiseSpec(
        kind=args.kind,
        sigma=args.sigma,
        ratio=args.ratio,
        sigma_s=args.sigma_s,
        sigma_c=args.sigma_c,
        upscale=args.upscale,
    )
    noisy, nmap = spec.apply(img, make_rng(args.seed))
    save_image(noisy, args.output)
    if args.map_path:
        save_noise_map(nmap, args.map_path)
    if args.map_png:
        save_map_visualization(nmap, args.map_png)
    print(json.dumps({"kind": args.kind, "sigma": spec.sigma, "ratio": spec.ratio, "output": args.output}))
    return 0


def _cmd_estimate(args) -> int:
    img = load_image(args.input)
    if args.estimator == "learned":
        if not args.model:
            raise ImageError("--estimator learned requires --model")
        nmap = estimate_map_learned(img, _load_model(args.model))
    else:
        nmap = estimate_map_classical(img, block=args.block)
    save_noise_map(nmap, args.output)
    if args.png:
        save_map_visualization(nmap, args.png)
    stats = {
        "awgn_mean": [round(float(c.mean()), 5) for c in nmap.awgn],
        "rvin_mean": [round(float(c.mean()), 5) for c in nmap.rvin],
    }
    print(json.dumps(stats))
    return 0


def _cmd_adapt(args) -> int:
    img = load_image(args.input)
    result = adapt_stride(img, tau=args.tau, s_max=args.smax)
    print(json.dumps(result.to_json()))
    return 0


def _cmd_denoise(args) -> int:
    img = load_image(args.input)
    model = _load_model(args.model) if args.model else None
    cfg = _make_config(args, model)
    reference = load_image(args.ref) if args.ref else None
    out, report = pd_refine(img, cfg, reference=reference)
    save_image(out, args.output)
    print(json.dumps(report))
    return 0


def _cmd_train(args) -> int:
    from .nn.model import ModelConfig
    from .nn.train import TrainConfig, train

    cfg = TrainConfig(
        steps=args.steps,
        batch=args.batch,
        patch=args.patch,
        lr=args.lr,
        seed=args.seed,
        noise_mix=args.mix,
        model=ModelConfig(
            est_layers=args.est_layers, den_layers=args.den_layers, channels=args.channels
        ),
    )
    result = train(cfg, checkpoint_path=args.out)
    print(
        json.dumps(
            {
                "steps": args.steps,
                "initial_loss": round(result.smoothed[min(len(result.smoothed), cfg.smooth_window) - 1], 5),
                "final_loss": round(result.smoothed[-1], 5),
                "checkpoint": args.out,
            }
        )
    )
    return 0


def _cmd_eval(args) -> int:
    reference = load_image(args.ref)
    model = _load_model(args.model) if args.model else None
    ks = [_unit_interval(v) for v in args.k.split(",")]
    strides = [_stride(v) for v in args.stride.split(",")]
    rows = []
    for path in args.inputs:
        img = load_image(path)
        for stride in strides:
            for k in ks:
                ns = argparse.Namespace(
                    denoiser=args.denoiser, stride=stride, k=k, mode=args.mode
                )
                out, report = pd_refine(img, _make_config(ns, model))
                rows.append(
                    {
                        "file": path,
                        "psnr_db": round(psnr(out, reference), 4),
                        "ssim": round(ssim(out, reference), 5),
                        "stride": report["stride"],
                        "k": k,
                    }
                )
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["file", "psnr_db", "ssim", "stride", "k"])
        writer.writeheader()
        writer.writerows(rows)
    print(json.dumps({"rows": len(rows), "out": args.out}))
    return 0


def _cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    webui = args.webui
    if webui is None and os.path.isdir("frontend/dist"):
        webui = "frontend/dist"
    app = create_app(data_dir=args.data_dir, model_path=args.model, static_dir=webui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "estimate": _cmd_estimate,
    "adapt": _cmd_adapt,
    "denoise": _cmd_denoise,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ImageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
