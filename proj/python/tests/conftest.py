import json
import os
import pathlib

import numpy as np
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def schema_dir():
    return pathlib.Path(os.environ.get("SQSK_SCHEMA_DIR", ROOT / "schemas"))


@pytest.fixture(scope="session")
def validate(schema_dir):
    jsonschema = pytest.importorskip("jsonschema")

    def check(report):
        schema = json.loads((schema_dir / f"{report['kind']}.schema.json").read_text())
        jsonschema.validate(report, schema)

    return check


@pytest.fixture
def regression():
    """Features x observations data with a planted 3-sparse model."""
    rng = np.random.default_rng(4)
    n, m = 15, 80
    X = rng.standard_normal((n, m))
    w = np.zeros(n)
    w[:3] = [1.0, -2.0, 1.5]
    y = X.T @ w + 0.05 * rng.standard_normal(m)
    return X, y, w


@pytest.fixture
def libsvm_file(tmp_path, regression):
    X, y, _ = regression
    path = tmp_path / "data.svm"
    with path.open("w") as f:
        for i in range(X.shape[1]):
            feats = " ".join(f"{j + 1}:{X[j, i]:.17g}" for j in range(X.shape[0]))
            f.write(f"{y[i]:.17g} {feats}\n")
    return path
