"""Example external model speaking the line protocol on stdin/stdout.

Trains a scikit-learn logistic regression on the given CSV, then answers
batches: one comma-separated feature line per observation, blank line ends
the batch; it replies one comma-separated probability line per observation
plus a blank line. Wire it up with:

    bcx explain --data data/iris.csv --schema data/iris.schema \
        --model "external:python scripts/external_model_example.py data/iris.csv data/iris.schema" \
        --classes 3 --obs 0
"""
import sys

from sklearn.linear_model import LogisticRegression

from bcx.dataset import load_csv, load_schema


def main():
    csv_path, schema_path = sys.argv[1], sys.argv[2]
    schema, label, classes = load_schema(schema_path)
    ds = load_csv(csv_path, schema, label, class_names=classes)

    # one-hot encode categoricals the same way the engine sends them back
    import numpy as np

    def encode(num, cat):
        blocks = [num]
        for j, fi in enumerate(ds.categorical_indices):
            spec = ds.features[fi]
            onehot = np.zeros((num.shape[0], len(spec.levels)))
            onehot[np.arange(num.shape[0]), cat[:, j]] = 1.0
            blocks.append(onehot)
        return np.hstack(blocks)

    num = np.column_stack([ds.column(i) for i in ds.numeric_indices])
    cat = np.column_stack([ds.column(i) for i in ds.categorical_indices]).astype(int) \
        if ds.categorical_indices else np.zeros((len(ds), 0), dtype=int)
    model = LogisticRegression(max_iter=2000).fit(encode(num, cat), ds.labels)

    batch = []
    for line in sys.stdin:
        line = line.rstrip("\n")
        if line != "":
            batch.append(tuple(
                cell if not spec.is_numeric else float(cell)
                for spec, cell in zip(ds.features, line.split(","))
            ))
            continue
        if batch:
            bnum, bcat = ds.encode_batch(batch)
            probs = model.predict_proba(encode(bnum, bcat))
            for row in probs:
                sys.stdout.write(",".join(repr(float(p)) for p in row) + "\n")
        sys.stdout.write("\n")
        sys.stdout.flush()
        batch = []


if __name__ == "__main__":
    main()
