# Copyright 2026 The HHE-FL Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes data/digits.csv: 64 pixel features scaled to [0, 1], then the label."""
import csv
import pathlib

from sklearn.datasets import load_digits

out = pathlib.Path(__file__).resolve().parent.parent / "data" / "digits.csv"
digits = load_digits()
with out.open("w", newline="") as f:
    w = csv.writer(f)
    w.writerow([f"p{i}" for i in range(64)] + ["label"])
    for x, y in zip(digits.data, digits.target):
        w.writerow([repr(float(v) / 16.0) if v else "0" for v in x] + [int(y)])
print(f"wrote {len(digits.target)} rows to {out}")
