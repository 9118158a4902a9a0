"""Write the bundled benchmark CSVs and their registry.

Sources that are reachable from the package index are used, so the script
runs without access to the UCI or KEEL web sites:

* balance      -- regenerated: the UCI balance-scale data is the full 5^4
                  grid of weights/distances, labelled by comparing torques.
* iono, wine   -- the ``keel-ds`` wheel (KEEL copies of the UCI files).
* spectfheart  -- the ``imbalanced-databases`` wheel (UCI SPECTF train+test).

Usage::

    pip install --no-deps keel-ds imbalanced-databases
    python scripts/prepare_datasets.py src/iml/data
"""
import csv
import importlib.util
import itertools
import json
import sys
from pathlib import Path


def _package_dir(name):
    spec = importlib.util.find_spec(name)
    if spec is None or not spec.submodule_search_locations:
        sys.exit(f"package {name!r} is not installed")
    return Path(list(spec.submodule_search_locations)[0])


def _keel_rows(path):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


def balance_rows():
    rows = []
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        label = "L" if left > right else ("R" if right > left else "B")
        rows.append([str(lw), str(ld), str(rw), str(rd), label])
    return rows


def spectf_rows(root):
    rows = []
    for part in ("SPECTF.train.txt", "SPECTF.test.txt"):
        for line in (root / part).read_text().splitlines():
            if line.strip():
                cells = [c.strip() for c in line.split(",")]
                # label is the first column in the UCI layout; move it last
                rows.append(cells[1:] + cells[:1])
    return rows


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keel = _package_dir("keel_ds") / "data" / "balanced" / "raw"
    imbdb = _package_dir("imbalanced_databases") / "data" / "spect_f"

    tables = {
        "balance": (balance_rows(), ["L"]),
        "iono": (_keel_rows(keel / "ionosphere.dat"), ["b"]),
        "wine": (_keel_rows(keel / "wine.dat"), ["1"]),
        "spectfheart": (spectf_rows(imbdb), ["0"]),
    }
    registry = {"datasets": {}}
    for name, (rows, positive) in tables.items():
        write_csv(out / f"{name}.csv", rows)
        registry["datasets"][name] = {
            "path": f"{name}.csv",
            "label_column": -1,
            "positive_labels": positive,
        }
        print(f"{name}: n={len(rows)} d={len(rows[0]) - 1}")
    (out / "registry.json").write_text(json.dumps(registry, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/iml/data")
