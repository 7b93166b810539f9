"""Command-line entry point: `bridge embed|translate`.

Exit status 0 on success; known failures print one machine-parsable line
`bridge: error: <Type>: <message>` to standard error and exit 2.  Logs go
to standard error; data goes only to the output files.
"""

from __future__ import annotations

import argparse
import logging
import sys

from tricorpus_bridge.errors import BridgeError
from tricorpus_bridge.jobs import BridgeJob, run_job

log = logging.getLogger("bridge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="produce embedding (EMB1) and back-translation (JSONL) files",
    )
    parser.add_argument("--version", action="version", version="bridge 0.1.0")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("embed", help="encode one sentence per line into EMB1")
    p.add_argument("--model", required=True, help="encoder id, e.g. debug-hash:32")
    p.add_argument("--in", dest="input", required=True, help="UTF-8 sentence file")
    p.add_argument("--out", dest="output", required=True, help="EMB1 output path")
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--device", default="cpu")
    p.add_argument("--id-prefix", default="", help="prefix for 1-based row ids")

    p = sub.add_parser("translate", help="add back-translated members to units")
    p.add_argument("--model", required=True, help="translator id, e.g. debug-translit")
    p.add_argument("--in", dest="input", required=True, help="corpus JSONL")
    p.add_argument("--out", dest="output", required=True, help="corpus JSONL output")
    p.add_argument("--src", required=True, help="source language tag, e.g. azj_Latn")
    p.add_argument("--tgt", required=True, help="target language tag, e.g. rus_Cyrl")
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--device", default="cpu")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(logging.INFO if args.verbose else logging.WARNING)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    job = dict(
        mode=args.command if args.command == "embed" else "translate",
        input_path=args.input,
        output_path=args.output,
        model_id=args.model,
        batch_size=args.batch,
        device=args.device,
    )
    if args.command == "embed":
        job["id_prefix"] = args.id_prefix
    else:
        job["src_lang"] = args.src
        job["tgt_lang"] = args.tgt
    try:
        count = run_job(BridgeJob(**job))
    except (BridgeError, OSError, ValueError) as exc:
        print(f"bridge: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    log.info("%s: wrote %d records to %s", args.command, count, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
