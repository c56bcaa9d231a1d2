#!/usr/bin/env python3
"""Fetch the German Credit, Compas and Adult datasets and write raw CSVs.

The files come from the `responsibly` wheel on PyPI, which bundles copies of
the UCI and ProPublica releases. Outputs go to data/raw/ as header-first CSVs
ready for `dprl prepare` with the recipes in recipes/.

Usage: python3 scripts/fetch_datasets.py [--out data/raw] [--wheel PATH]
"""

import argparse
import csv
import glob
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

GERMAN_COLUMNS = (
    "status duration credit_history purpose credit_amount savings present_employment "
    "installment_rate status_sex other_debtors present_residence property age "
    "installment_plans housing number_of_credits job people_liable telephone "
    "foreign_worker credit"
).split()

ADULT_COLUMNS = (
    "age workclass fnlwgt education education_num marital_status occupation "
    "relationship race sex capital_gain capital_loss hours_per_week native_country income"
).split()

COMPAS_COLUMNS = [
    "sex",
    "age",
    "race",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "c_charge_degree",
    "two_year_recid",
]


def find_member(zf, suffix):
    for name in zf.namelist():
        if name.endswith(suffix):
            return zf.read(name).decode("utf-8")
    raise SystemExit(f"{suffix} not found in wheel")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def german(zf, out):
    rows = [line.split() for line in find_member(zf, "german/german.data").splitlines() if line.strip()]
    write_csv(out / "german.csv", GERMAN_COLUMNS, rows)


def adult(zf, out):
    rows = []
    for member in ("adult/adult.data", "adult/adult.test"):
        for line in find_member(zf, member).splitlines():
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(ADULT_COLUMNS):
                continue  # blank lines and the test file's banner
            cells[-1] = cells[-1].rstrip(".")
            rows.append(cells)
    write_csv(out / "adult.csv", ADULT_COLUMNS, rows)


def compas(zf, out):
    reader = csv.DictReader(io.StringIO(find_member(zf, "compas/compas-scores-two-years.csv")))
    rows = []
    for r in reader:
        # the usual screening filters of the public release
        days = r["days_b_screening_arrest"]
        if days == "" or not -30 <= float(days) <= 30:
            continue
        if r["is_recid"] == "-1" or r["c_charge_degree"] == "O" or r["score_text"] == "N/A":
            continue
        rows.append([r[c] for c in COMPAS_COLUMNS])
    write_csv(out / "compas.csv", COMPAS_COLUMNS, rows)


def download_wheel(dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:", "-d", dest, "responsibly==0.1.2"],
        check=True,
    )
    wheels = glob.glob(str(Path(dest) / "responsibly-*.whl"))
    if not wheels:
        raise SystemExit("pip did not produce a responsibly wheel")
    return wheels[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "raw"))
    ap.add_argument("--wheel", help="use an already downloaded responsibly wheel")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or download_wheel(tmp)
        with zipfile.ZipFile(wheel) as zf:
            german(zf, out)
            compas(zf, out)
            adult(zf, out)


if __name__ == "__main__":
    main()
