"""Write the CSV series of every figure preset and, if matplotlib is present, quick PNG plots."""

import argparse
import csv
from pathlib import Path

from fsoqkd.cli import write_table
from fsoqkd.figures import FIGURES


def plot(path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with path.open() as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    numeric = [i for i, name in enumerate(header) if all(_isfloat(r[i]) for r in data)]
    if len(numeric) < 2:
        return
    x = numeric[0]
    fig, ax = plt.subplots()
    for i in numeric[1:]:
        ax.plot([float(r[x]) for r in data], [float(r[i]) for r in data], ".", ms=2, label=header[i])
    ax.set_xlabel(header[x])
    ax.legend(fontsize=6)
    fig.savefig(path.with_suffix(".png"), dpi=120)
    plt.close(fig)


def _isfloat(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="figures")
    parser.add_argument("--no-plots", action="store_true")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for make in FIGURES.values():
        for name, (header, rows) in make().items():
            path = out / name
            write_table(path, header, rows)
            print(path)
            if not args.no_plots:
                try:
                    plot(path)
                except ImportError:
                    pass


if __name__ == "__main__":
    main()
