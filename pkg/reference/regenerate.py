"""Rewrite the reference CSVs in this directory from the pinned manifest.

    python3 reference/regenerate.py
"""

from pathlib import Path

from phasemollow.cli import run_manifest

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    for name, code in run_manifest(HERE / "manifest.json", HERE):
        print(f"{code}  {name}")
