#!/usr/bin/env python3
"""Rebuild the LIBSVM-format dataset files shipped under data/.

a9a / a9a.t: the UCI Adult train/test splits binarized into 123 indicator
features (continuous columns quantized into quintiles, capital gain/loss into
zero/nonzero, one indicator per categorical value, missing values left unset).
The raw Adult files are taken from the `responsibly` wheel on PyPI.

spambase: UCI spambase (KEEL copy, 4597 rows) from the `keel-ds` wheel, label
+1 for spam and -1 otherwise.

Usage: python3 tools/make_datasets.py <responsibly.whl> <keel_ds.whl> <outdir>
"""
import csv
import io
import sys
import zipfile

import numpy as np

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}
COLUMNS = [
    ("age", "q5"), ("workclass", "cat"), ("fnlwgt", "q5"), ("education", "cat"),
    ("education-num", "q5"), ("marital-status", "cat"), ("occupation", "cat"),
    ("relationship", "cat"), ("race", "cat"), ("sex", "cat"),
    ("capital-gain", "nz"), ("capital-loss", "nz"), ("hours-per-week", "q5"),
    ("native-country", "cat"),
]


def read_adult(text):
    rows = []
    for r in csv.reader(io.StringIO(text)):
        if len(r) < 15:
            continue
        rows.append([c.strip() for c in r])
    return rows


def binarize(rows, thresholds):
    out = []
    for r in rows:
        feats = []
        offset = 0
        for col, (name, kind) in enumerate(COLUMNS):
            v = r[col]
            if kind == "cat":
                cats = [c.strip() for c in CATEGORIES[name].split(",")]
                if v in cats:
                    feats.append(offset + cats.index(v) + 1)
                offset += len(cats)
            elif kind == "q5":
                b = int(np.searchsorted(thresholds[name], float(v), side="right"))
                feats.append(offset + b + 1)
                offset += 5
            else:
                feats.append(offset + (1 if float(v) > 0 else 0) + 1)
                offset += 2
        label = "+1" if r[14].startswith(">50K") else "-1"
        out.append(label + " " + " ".join(f"{i}:1" for i in feats))
    return out


def main():
    resp, keel, outdir = sys.argv[1:4]
    z = zipfile.ZipFile(resp)
    train = read_adult(z.read("responsibly/dataset/adult/adult.data").decode())
    test = read_adult(z.read("responsibly/dataset/adult/adult.test").decode())
    thresholds = {}
    for col, (name, kind) in enumerate(COLUMNS):
        if kind == "q5":
            vals = np.array([float(r[col]) for r in train])
            thresholds[name] = np.unique(np.quantile(vals, [0.2, 0.4, 0.6, 0.8]))
    for fname, rows in (("a9a", train), ("a9a.t", test)):
        with open(f"{outdir}/{fname}", "w") as f:
            f.write("\n".join(binarize(rows, thresholds)) + "\n")

    k = zipfile.ZipFile(keel)
    lines = k.read("keel_ds/data/balanced/raw/spambase.dat").decode().splitlines()
    with open(f"{outdir}/spambase", "w") as f:
        for line in lines:
            if not line.strip() or line.startswith("@"):
                continue
            vals = [float(t) for t in line.split(",")]
            label = "+1" if int(vals[-1]) == 1 else "-1"
            feats = " ".join(f"{i + 1}:{v:g}" for i, v in enumerate(vals[:-1]) if v != 0.0)
            f.write(f"{label} {feats}\n")


if __name__ == "__main__":
    main()
