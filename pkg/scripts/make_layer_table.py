"""Regenerate the packaged standard-atmosphere refractive-index table."""

import argparse
import json
from pathlib import Path

from fsoqkd.satellite import standard_atmosphere_layers

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wavelength-nm", type=float, default=800.0)
    ap.add_argument("--out", type=Path, default=ROOT / "src/fsoqkd/data/standard_atmosphere_800nm.json")
    args = ap.parse_args()
    table = standard_atmosphere_layers(args.wavelength_nm * 1e-9)
    data = {"wavelength_nm": args.wavelength_nm, **table.to_json()}
    args.out.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
