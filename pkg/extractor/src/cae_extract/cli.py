"""Command-line interface: ``cae-extract images|nouns|captions``.

Writes EMB1 embedding files the clustering package consumes directly.
"""

from __future__ import annotations

import argparse
import sys

from .extract import DEFAULT_TEMPLATE, ExtractionJob, run_job

_SOURCES = {
    "images": "image_folder",
    "nouns": "class_name_list",
    "captions": "caption_text_file",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cae-extract", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("images", "encode a folder of images (filename-sorted rows)"),
        ("nouns", "encode a term list through the prompt template"),
        ("captions", "encode a caption file, one row per line"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--input", required=True, help="image folder or text file")
        cmd.add_argument("--out", required=True, help="output EMB1 file")
        cmd.add_argument("--model", default=None, help="model id (default: ViT-B/32 CLIP)")
        cmd.add_argument("--batch", type=int, default=256)
        if name == "nouns":
            cmd.add_argument("--template", default=DEFAULT_TEMPLATE)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    kwargs = dict(
        source=_SOURCES[args.command],
        input_path=args.input,
        output_path=args.out,
        batch_size=args.batch,
    )
    if args.model is not None:
        kwargs["model"] = args.model
    if getattr(args, "template", None) is not None:
        kwargs["template"] = args.template
    try:
        out = run_job(ExtractionJob(**kwargs))
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
