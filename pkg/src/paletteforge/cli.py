"""Command-line interface.

Exit codes: 0 success, 1 usage or input-validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .colorspace import Palette
from .data import load_pat, save_pat, synthetic_records, write_fixture_embeddings
from .errors import InputError, PaletteForgeError
from .metrics import evaluate
from .tpn import sample_palettes
from .training import TrainConfig, load_pcn, load_tpn, train_pcn, train_tpn

DEFAULT_PORT = 8000


def _require_path(value: str | None, env_var: str, what: str) -> str:
    resolved = value or os.environ.get(env_var)
    if not resolved:
        raise InputError(f"no {what} given: pass --checkpoint or set {env_var}")
    return resolved


def _load_palette_file(path: str) -> Palette:
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read palette file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"palette file is not valid JSON: {exc.msg}") from exc
    try:
        return Palette.from_json_payload(payload)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid palette: {exc}") from exc


def _train_config_from_args(args: argparse.Namespace, defaults: TrainConfig) -> TrainConfig:
    overrides = {
        name: getattr(args, name)
        for name in (
            "epochs",
            "batch_size",
            "lr",
            "seed",
            "checkpoint_interval",
            "embed_dim",
            "enc_hidden",
            "cond_dim",
            "dec_hidden",
            "base_width",
            "image_size",
        )
        if getattr(args, name, None) is not None
    }
    return TrainConfig.from_dict({**defaults.to_dict(), **overrides})


def _progress(total: int):
    def report(stats):
        print(
            f"epoch {stats.epoch + 1}/{total}  d={stats.d_loss:.4f}  "
            f"g={stats.g_loss:.4f}  huber={stats.huber:.4f}  kl={stats.kl:.4f}",
            file=sys.stderr,
        )

    return report


# --- subcommand handlers -----------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    records = load_pat(args.data)
    from .data import Vocabulary

    vocab = Vocabulary.from_records(records)
    print(f"{len(records)} records, {len(vocab) - 1} distinct tokens")
    return 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    records = synthetic_records(args.count, seed=args.seed)
    save_pat(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    if args.embeddings_out:
        write_fixture_embeddings(records, args.embeddings_out, seed=args.seed)
        print(f"wrote embeddings to {args.embeddings_out}")
    if args.images_out:
        _write_fixture_images(Path(args.images_out), args.image_count, args.seed)
        print(f"wrote {args.image_count} images to {args.images_out}")
    return 0


def _write_fixture_images(folder: Path, count: int, seed: int) -> None:
    """Deterministic five-block toy images for colorization smoke training."""
    rng = np.random.default_rng(seed)
    folder.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        colors = rng.integers(0, 256, size=(5, 3), dtype=np.uint8)
        blocks = [np.full((64, 13 if j < 4 else 12, 3), colors[j], dtype=np.uint8) for j in range(5)]
        Image.fromarray(np.concatenate(blocks, axis=1), "RGB").save(folder / f"fixture{i:03d}.png")


def cmd_train_tpn(args: argparse.Namespace) -> int:
    records = load_pat(args.data)
    config = _train_config_from_args(args, TrainConfig.tpn_default())
    _, history = train_tpn(
        records,
        config,
        embeddings_path=args.embeddings,
        out_dir=args.out,
        on_epoch=_progress(config.epochs) if args.verbose else None,
    )
    print(f"trained {config.epochs} epochs; checkpoint at {Path(args.out) / 'tpn.pt'}")
    if history:
        print(f"final g_loss {history[-1].g_loss:.4f}, huber {history[-1].huber:.4f}")
    return 0


def cmd_train_pcn(args: argparse.Namespace) -> int:
    config = _train_config_from_args(args, TrainConfig.pcn_default())
    _, history = train_pcn(
        args.images,
        config,
        out_dir=args.out,
        on_epoch=_progress(config.epochs) if args.verbose else None,
    )
    print(f"trained {config.epochs} epochs; checkpoint at {Path(args.out) / 'pcn.pt'}")
    if history:
        print(f"final g_loss {history[-1].g_loss:.4f}, huber {history[-1].huber:.4f}")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    bundle = load_tpn(_require_path(args.checkpoint, "PF_TPN_CKPT", "palette checkpoint"))
    result = sample_palettes(
        bundle.model,
        bundle.vocab,
        args.text,
        count=args.n,
        seed=args.seed,
        deterministic=args.deterministic,
    )
    payload = {
        "text": args.text,
        "tokens": list(result.tokens),
        "seed": args.seed,
        "all_tokens_unknown": result.all_tokens_unknown,
        "palettes": [
            {"lab": palette.to_json(), "hex": palette.hex_codes()}
            for palette in result.palettes
        ],
        "attention": result.attention.tolist(),
    }
    rendered = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(rendered + "\n")
    else:
        print(rendered)
    return 0


def cmd_colorize(args: argparse.Namespace) -> int:
    from .pcn import colorize_full

    bundle = load_pcn(_require_path(args.checkpoint, "PF_PCN_CKPT", "colorization checkpoint"))
    palette = _load_palette_file(args.palette)
    try:
        with Image.open(args.image) as img:
            img.load()
            source = img.convert("RGB")
    except FileNotFoundError as exc:
        raise InputError(f"cannot read image: {exc}") from exc
    except OSError as exc:
        raise InputError(f"cannot decode image: {exc}") from exc
    result = colorize_full(bundle.model, source, palette, working_size=bundle.config.image_size)
    result.save(args.out, format="PNG")
    print(f"wrote {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    bundle = load_tpn(_require_path(args.checkpoint, "PF_TPN_CKPT", "palette checkpoint"))
    records = load_pat(args.data)
    if args.limit is not None:
        records = records[: args.limit]
    report = evaluate(bundle, records, samples_per_text=args.samples_per_text, seed=args.seed)
    if args.out:
        report.write(args.out)
        print(f"wrote {args.out}")
    else:
        print(report.to_json())
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else int(os.environ.get("PF_PORT", DEFAULT_PORT))
    app = create_app(
        tpn_path=args.tpn,
        pcn_path=args.pcn,
        gallery_path=args.gallery,
        ui_dir=args.ui_dir,
        max_upload_bytes=args.max_upload_bytes,
    )
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paletteforge",
        description="Text-conditioned palette generation and palette-guided colorization.",
    )
    parser.add_argument("--version", action="version", version=f"paletteforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a text/palette dataset file")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fixtures", help="emit a synthetic dataset for smoke tests")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embeddings-out", default=None)
    p.add_argument("--images-out", default=None)
    p.add_argument("--image-count", type=int, default=8)
    p.set_defaults(func=cmd_fixtures)

    def add_train_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch-size", type=int, dest="batch_size", default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--checkpoint-interval", type=int, dest="checkpoint_interval", default=None)
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("train-tpn", help="train the text-to-palette model")
    p.add_argument("--data", required=True)
    p.add_argument("--embeddings", default=None)
    add_train_args(p)
    for name in ("embed-dim", "enc-hidden", "cond-dim", "dec-hidden"):
        p.add_argument(f"--{name}", type=int, dest=name.replace("-", "_"), default=None)
    p.set_defaults(func=cmd_train_tpn)

    p = sub.add_parser("train-pcn", help="train the colorization model")
    p.add_argument("--images", required=True)
    add_train_args(p)
    p.add_argument("--base-width", type=int, dest="base_width", default=None)
    p.add_argument("--image-size", type=int, dest="image_size", default=None)
    p.set_defaults(func=cmd_train_pcn)

    p = sub.add_parser("sample", help="sample palettes for a text prompt")
    p.add_argument("--text", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("colorize", help="colorize an image with a palette file")
    p.add_argument("--image", required=True)
    p.add_argument("--palette", required=True, help="JSON file with 5 [L, a, b] colors")
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", default=None)
    p.set_defaults(func=cmd_colorize)

    p = sub.add_parser("evaluate", help="score a palette checkpoint on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--samples-per-text", type=int, dest="samples_per_text", default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="start the HTTP inference service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--tpn", default=None)
    p.add_argument("--pcn", default=None)
    p.add_argument("--gallery", default=None)
    p.add_argument("--ui-dir", dest="ui_dir", default=None)
    p.add_argument("--max-upload-bytes", type=int, dest="max_upload_bytes", default=5 * 1024 * 1024)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems and 0 for --help/--version;
        # our contract reports usage errors as 1.
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PaletteForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
