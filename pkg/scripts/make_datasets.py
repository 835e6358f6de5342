"""Regenerates the CSVs under data/.

iris comes from scikit-learn's bundled copy. The diabetes-style set is a
seeded synthetic stand-in with the classic eight-feature schema and a mildly
nonlinear label rule, so the engine has a desk-scale binary problem with
curvature in the boundary. Run from the repository root:

    python scripts/make_datasets.py
"""
import csv
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def write_iris():
    from sklearn.datasets import load_iris

    data = load_iris()
    names = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
    with open(OUT / "iris.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["species"])
        for row, label in zip(data.data, data.target):
            w.writerow([f"{v:g}" for v in row] + [data.target_names[label]])
    (OUT / "iris.schema").write_text(
        "".join(f"numeric {n}\n" for n in names)
        + "label species classes=setosa,versicolor,virginica\n",
        encoding="utf-8",
    )


def write_diabetes(n=800, seed=20240913):
    rng = np.random.default_rng(seed)
    pregnancies = rng.poisson(3.0, n).astype(float)
    glucose = rng.normal(120.0, 30.0, n).clip(50, 220)
    blood_pressure = rng.normal(70.0, 12.0, n).clip(35, 110)
    skin_thickness = rng.normal(28.0, 9.0, n).clip(5, 70)
    insulin = rng.gamma(2.2, 55.0, n).clip(10, 600)
    bmi = rng.normal(32.0, 6.5, n).clip(16, 60)
    pedigree = rng.gamma(2.0, 0.25, n).clip(0.05, 2.5)
    age = (21.0 + rng.gamma(2.0, 8.0, n)).clip(21, 80)

    # standardized working copies for the label rule
    def z(v):
        return (v - v.mean()) / v.std()

    logit = (
        -0.4
        + 1.6 * z(glucose)
        + 0.9 * z(bmi)
        + 0.55 * z(age)
        + 0.35 * z(pedigree)
        + 0.25 * z(pregnancies)
        + 0.45 * z(glucose) * z(bmi)
        - 0.5 * np.square(z(blood_pressure))
        + 0.2 * z(insulin)
    )
    p = 1.0 / (1.0 + np.exp(-logit))
    labels = rng.random(n) < p

    names = [
        "Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
        "Insulin", "BMI", "DiabetesPedigree", "Age",
    ]
    cols = [pregnancies, glucose, blood_pressure, skin_thickness,
            insulin, bmi, pedigree, age]
    with open(OUT / "diabetes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["outcome"])
        for i in range(n):
            w.writerow([f"{c[i]:.4f}" for c in cols] + ["pos" if labels[i] else "neg"])
    (OUT / "diabetes.schema").write_text(
        "".join(f"numeric {nm}\n" for nm in names) + "label outcome classes=neg,pos\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    write_iris()
    write_diabetes()
    print(f"wrote iris.csv, iris.schema, diabetes.csv, diabetes.schema to {OUT}")
