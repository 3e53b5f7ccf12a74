"""Test-double engine that produces no output at all."""
import argparse

ap = argparse.ArgumentParser()
ap.add_argument("--manifest", required=True)
ap.parse_args()
