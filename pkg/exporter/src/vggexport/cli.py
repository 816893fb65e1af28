"""Command line: `export` writes a container, `probe` writes reference JSON."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, export
from .probe import PROBE_SIZE, write_reference


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vggexport",
        description=(
            "Export a truncated pretrained VGG-19 (through conv4_1) into the "
            "stylesym weights-container format and emit reference activations."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    exp = sub.add_parser("export", help="write header.json + weights.bin")
    exp.add_argument("--model", choices=("vgg19",), default="vgg19")
    exp.add_argument("--out", required=True, help="output container directory")
    exp.add_argument(
        "--checkpoint",
        default=None,
        help="local .pth state dict (skips the torchvision download)",
    )
    exp.add_argument(
        "--single-file",
        action="store_true",
        help="write one weights.container file instead of a directory",
    )

    probe = sub.add_parser("probe", help="write reference activations JSON")
    probe.add_argument("--container", required=True, help="container dir or file")
    probe.add_argument("--out", required=True, help="reference JSON path")
    probe.add_argument("--size", type=int, default=PROBE_SIZE)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            container = export(
                args.model,
                args.out,
                checkpoint=args.checkpoint,
                single_file=args.single_file,
            )
            print(f"container at {container}")
        else:
            out = write_reference(args.container, args.out, size=args.size)
            print(f"reference activations at {out}")
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
