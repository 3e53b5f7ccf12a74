"""Test-double engine: echoes the ground-truth transcript for every id.

Usage: echo_engine.py (--ref <manifest> | --ref-dir <dir>) --manifest <wire>
"""
import argparse
import json
from pathlib import Path


def load_texts(paths):
    texts = {}
    for path in paths:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    obj = json.loads(line)
                    texts[obj["id"]] = obj["text"]
    return texts


def main():
    ap = argparse.ArgumentParser()
    group = ap.add_mutually_exclusive_group(required=True)
    group.add_argument("--ref", help="one ground-truth manifest")
    group.add_argument("--ref-dir", help="directory of ground-truth manifests")
    ap.add_argument("--manifest", required=True)
    args = ap.parse_args()
    refs = [args.ref] if args.ref else sorted(Path(args.ref_dir).glob("*.jsonl"))
    texts = load_texts(refs)
    with open(args.manifest, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                print(json.dumps({"id": obj["id"], "text": texts.get(obj["id"], "")}))


if __name__ == "__main__":
    main()
