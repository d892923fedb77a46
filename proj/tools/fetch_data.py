#!/usr/bin/env python3
"""Fetch the UCI benchmark datasets and convert them to the canonical CSV
layout the manifests in data/ expect.

Each dataset gets its conventional preprocessing:
  pima            768 -> 532 rows: serum insulin dropped as a column, then
                  zero-coded glucose / blood pressure / skin fold / BMI
                  treated as missing (blank cells; the loader drops the rows)
  german          numerical (Strathclyde) version, 24 attributes, bad = 1
  ionosphere      34 attributes kept verbatim (the all-zero attribute 2 is
                  dropped by the loader), good = 1
  wbc_original    id column dropped, '?' kept as missing, malignant = 1
  wbc_diagnostic  taken from scikit-learn when available, else UCI; malignant = 1
  shuttle         shuttle.trn + shuttle.tst concatenated in order; the target
                  marks everything outside class 1 (prevalence ~21%)

Usage: python3 tools/fetch_data.py [dataset ...]   (default: all missing ones)
"""

import csv
import io
import os
import subprocess
import sys
import urllib.request

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

MIRRORS = {
    "pima": [
        f"{UCI}/pima-indians-diabetes/pima-indians-diabetes.data",
        "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.csv",
    ],
    "german": [f"{UCI}/statlog/german/german.data-numeric"],
    "ionosphere": [f"{UCI}/ionosphere/ionosphere.data"],
    "wbc_original": [f"{UCI}/breast-cancer-wisconsin/breast-cancer-wisconsin.data"],
    "wbc_diagnostic": [f"{UCI}/breast-cancer-wisconsin/wdbc.data"],
    "shuttle_train": [f"{UCI}/statlog/shuttle/shuttle.trn.Z"],
    "shuttle_test": [f"{UCI}/statlog/shuttle/shuttle.tst"],
}


def download(key):
    last = None
    for url in MIRRORS[key]:
        try:
            print(f"  {url}")
            with urllib.request.urlopen(url, timeout=60) as response:
                payload = response.read()
            if url.endswith(".Z"):
                payload = subprocess.run(
                    ["zcat"], input=payload, capture_output=True, check=True
                ).stdout
            return payload.decode("utf-8", errors="strict")
        except Exception as exc:  # try the next mirror
            last = exc
    raise RuntimeError(f"could not fetch {key}: {last}")


def write_rows(name, header, rows):
    path = os.path.join(DATA_DIR, f"{name}.csv")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"  wrote {path} ({len(rows)} rows)")


def fetch_pima():
    text = download("pima")
    rows = []
    for line in text.strip().splitlines():
        if not line or line[0].isalpha():  # skip a header line if present
            continue
        c = line.split(",")
        pregnancies, glucose, bp, tsf, _insulin, bmi, dpf, age, label = c[:9]
        # zero codes missingness in these four columns
        cleaned = [
            pregnancies,
            glucose if float(glucose) != 0 else "",
            bp if float(bp) != 0 else "",
            tsf if float(tsf) != 0 else "",
            bmi if float(bmi) != 0 else "",
            dpf,
            age,
            label,
        ]
        rows.append(cleaned)
    write_rows("pima", ["pregnancies", "glucose", "bp", "tsf", "bmi", "dpf", "age",
                        "diabetic"], rows)


def fetch_german():
    text = download("german")
    rows = []
    for line in text.strip().splitlines():
        c = line.split()
        if len(c) < 25:
            continue
        rows.append(c[:24] + ["1" if c[24] == "2" else "0"])
    write_rows("german", [f"a{k:02d}" for k in range(1, 25)] + ["bad"], rows)


def fetch_ionosphere():
    text = download("ionosphere")
    rows = []
    for line in text.strip().splitlines():
        c = line.split(",")
        rows.append(c[:34] + ["1" if c[34] == "g" else "0"])
    write_rows("ionosphere", [f"a{k:02d}" for k in range(1, 35)] + ["good"], rows)


def fetch_wbc_original():
    text = download("wbc_original")
    names = ["clump_thickness", "uniformity_cell_size", "uniformity_cell_shape",
             "marginal_adhesion", "single_epithelial_cell_size", "bare_nuclei",
             "bland_chromatin", "normal_nucleoli", "mitoses"]
    rows = []
    for line in text.strip().splitlines():
        c = line.split(",")
        values = ["" if v == "?" else v for v in c[1:10]]  # drop the id column
        rows.append(values + ["1" if c[10] == "4" else "0"])
    write_rows("wbc_original", names + ["malignant"], rows)


def fetch_wbc_diagnostic():
    try:
        from sklearn.datasets import load_breast_cancer

        d = load_breast_cancer()
        names = [n.replace(" ", "_") for n in d.feature_names]
        rows = [[repr(float(v)) for v in row] + ["1" if t == 0 else "0"]
                for row, t in zip(d.data, d.target)]
        write_rows("wbc_diagnostic", names + ["malignant"], rows)
        return
    except ImportError:
        pass
    text = download("wbc_diagnostic")
    names = [f"f{k:02d}" for k in range(1, 31)]
    rows = []
    for line in text.strip().splitlines():
        c = line.split(",")
        rows.append(c[2:32] + ["1" if c[1] == "M" else "0"])
    write_rows("wbc_diagnostic", names + ["malignant"], rows)


def fetch_shuttle():
    train = download("shuttle_train")
    test = download("shuttle_test")
    rows = []
    for text in (train, test):
        for line in text.strip().splitlines():
            c = line.split()
            if len(c) < 10:
                continue
            rows.append(c[:9] + ["0" if c[9] == "1" else "1"])
    write_rows("shuttle", [f"x{k}" for k in range(1, 10)] + ["minority"], rows)


FETCHERS = {
    "pima": fetch_pima,
    "german": fetch_german,
    "ionosphere": fetch_ionosphere,
    "wbc_original": fetch_wbc_original,
    "wbc_diagnostic": fetch_wbc_diagnostic,
    "shuttle": fetch_shuttle,
}


def main():
    wanted = sys.argv[1:] or [
        name for name in FETCHERS
        if not os.path.exists(os.path.join(DATA_DIR, f"{name}.csv"))
    ]
    if not wanted:
        print("all dataset CSVs already present")
        return 0
    failures = []
    for name in wanted:
        if name not in FETCHERS:
            print(f"unknown dataset '{name}'; choices: {', '.join(FETCHERS)}")
            return 2
        print(f"fetching {name} ...")
        try:
            FETCHERS[name]()
        except Exception as exc:
            print(f"  FAILED: {exc}")
            failures.append(name)
    if failures:
        print(f"failed: {', '.join(failures)} (network access to UCI required)")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
