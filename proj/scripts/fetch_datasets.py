#!/usr/bin/env python3
"""Fetch and convert benchmark datasets into data/<name>.csv.

Pendigits (UCI "Pen-Based Recognition of Handwritten Digits", train+test,
10992 x 16, 10 classes) is taken from the KEEL mirror bundled in the
`keel-ds` wheel on PyPI, so only a package index is needed.
The converted CSV has 16 feature columns followed by the class label and no header.
"""
import argparse
import hashlib
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile

PENDIGITS_MEMBER = "keel_ds/data/balanced/raw/penbased.dat"
PENDIGITS_SHA256 = "9ac9d8f2eb12f8717e9f580e27d5f790bd5405273af276a8a231912c255c276b"


def fetch_wheel(package: str, workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(workdir), package],
        check=True,
    )
    wheels = sorted(workdir.glob("*.whl"))
    if not wheels:
        raise RuntimeError(f"pip download produced no wheel for {package}")
    return wheels[-1]


def convert_keel(raw: str) -> str:
    rows = []
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append(",".join(cell.strip() for cell in line.split(",")))
    return "\n".join(rows) + "\n"


def pendigits(out_dir: pathlib.Path, check: bool) -> pathlib.Path:
    target = out_dir / "pendigits.csv"
    with tempfile.TemporaryDirectory() as tmp:
        wheel = fetch_wheel("keel-ds==0.2.5", pathlib.Path(tmp))
        with zipfile.ZipFile(wheel) as zf:
            raw = zf.read(PENDIGITS_MEMBER).decode("utf-8")
    text = convert_keel(raw)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if check and digest != PENDIGITS_SHA256:
        raise RuntimeError(f"pendigits checksum mismatch: {digest}")
    n_rows = text.count("\n")
    if n_rows != 10992:
        raise RuntimeError(f"pendigits: expected 10992 rows, got {n_rows}")
    target.write_text(text, encoding="utf-8")
    print(f"wrote {target} ({n_rows} rows, sha256 {digest})")
    return target


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--no-checksum", action="store_true")
    parser.add_argument("--if-missing", action="store_true", help="do nothing when the CSV already exists")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.if_missing and (out / "pendigits.csv").exists():
        print(f"{out / 'pendigits.csv'} present")
        return 0
    pendigits(out, check=not args.no_checksum)
    return 0


if __name__ == "__main__":
    sys.exit(main())
