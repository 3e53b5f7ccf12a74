"""Command-line entry point implementing the harness engine protocol.

Usage: atc-asr-adapter --model openai/whisper-small --manifest wire.jsonl
The special model id "null" selects the diagnostic backend that emits
empty transcripts (protocol checks without model weights).
"""

import argparse
import sys

from .backends import make_backend
from .config import AdapterConfig
from .runner import transcribe_manifest


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(prog="atc-asr-adapter")
    ap.add_argument("--manifest", required=True, help="wire manifest (id + audio path)")
    ap.add_argument("--model", default="openai/whisper-small")
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--batch-size", type=int, default=8)
    args = ap.parse_args(argv)
    config = AdapterConfig(model_id=args.model, device=args.device, batch_size=args.batch_size)
    try:
        backend = make_backend(config)
    except Exception as exc:  # model load is the one global failure mode
        print(f"asr-adapter: cannot load model {config.model_id!r}: {exc}", file=sys.stderr)
        sys.exit(1)
    sys.exit(transcribe_manifest(args.manifest, backend))


if __name__ == "__main__":
    main()
