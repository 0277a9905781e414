"""Instance ingestion: LIBSVM and CSV files, seeded synthetic instances."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
import scipy.sparse as sp

from models.errors import InstanceParseError
from models.experiment import InstanceSource, SyntheticSpec
from utils.linalg import DesignMatrix, column_norms

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Instance:
    """Loaded data: design matrix and response (or +/-1 labels)."""
    name: str
    A: DesignMatrix
    y: np.ndarray

    @property
    def shape(self):
        return self.A.shape


def load_instance(src: InstanceSource) -> Instance:
    if src.kind == 'synthetic':
        A, y = generate_synthetic(src.synthetic)
    elif src.kind == 'csv':
        A, y = read_csv_instance(src.path)
    else:
        A, y = read_libsvm(src.path, n_features=src.n_features)

    if src.normalize:
        A = normalize_columns(A)
    logger.info("loaded %s: %d x %d (%s)", src.name, A.shape[0], A.shape[1],
                'sparse' if sp.issparse(A) else 'dense')
    return Instance(src.name, A, y)


def read_libsvm(path, n_features: Optional[int] = None) -> tuple:
    """Parse LIBSVM text: `label idx:value ...` with 1-based indices.

    Returns:
        (A, labels) with A a CSC matrix of shape (rows, n_features); the
        width is the largest index seen when n_features is None.
    """
    path = Path(path)
    rows, cols, vals, labels = [], [], [], []
    max_index = 0

    with path.open('r') as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise InstanceParseError(str(path), lineno, f"bad label '{tokens[0]}'") from None
            row = len(labels)
            labels.append(label)

            for token in tokens[1:]:
                idx, sep, value = token.partition(':')
                if not sep:
                    raise InstanceParseError(str(path), lineno, f"expected index:value, got '{token}'")
                try:
                    j = int(idx)
                    v = float(value)
                except ValueError:
                    raise InstanceParseError(str(path), lineno, f"bad feature '{token}'") from None
                if j < 1:
                    raise InstanceParseError(str(path), lineno, f"feature index {j} is not 1-based")
                if n_features is not None and j > n_features:
                    raise InstanceParseError(str(path), lineno, f"feature index {j} exceeds {n_features}")
                max_index = max(max_index, j)
                rows.append(row)
                cols.append(j - 1)
                vals.append(v)

    if not labels:
        raise InstanceParseError(str(path), 0, "no data rows")
    width = n_features if n_features is not None else max_index
    if width == 0:
        raise InstanceParseError(str(path), 0, "no features")

    A = sp.csc_matrix((vals, (rows, cols)), shape=(len(labels), width), dtype=float)
    return A, np.asarray(labels, dtype=float)


def read_csv_instance(path) -> tuple:
    """Dense CSV with a header row; the last column is the response."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InstanceParseError(str(path), 0, str(e)) from None
    if frame.shape[1] < 2:
        raise InstanceParseError(str(path), 1, "need at least one feature column and a response")
    if frame.shape[0] == 0:
        raise InstanceParseError(str(path), 1, "no data rows")

    numeric = frame.apply(pd.to_numeric, errors='coerce')
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        # header is line 1
        raise InstanceParseError(str(path), int(np.flatnonzero(bad)[0]) + 2, "non-numeric or missing value")

    values = numeric.to_numpy(dtype=float)
    return np.asfortranarray(values[:, :-1]), values[:, -1].copy()


def generate_synthetic(spec: SyntheticSpec) -> tuple:
    """Gaussian design and a sparse ground truth; the seed fixes everything."""
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.m, spec.n))
    if spec.normalize:
        A = normalize_columns(A)

    k = int(round(spec.support_density * spec.n))
    if spec.support_density > 0:
        k = max(k, 1)
    x_true = np.zeros(spec.n)
    support = rng.choice(spec.n, size=k, replace=False)
    x_true[support] = rng.standard_normal(k)

    y = A @ x_true + spec.noise * rng.standard_normal(spec.m)
    if spec.labels:
        y = np.where(y >= 0.0, 1.0, -1.0)
    return A, y


def normalize_columns(A: DesignMatrix) -> DesignMatrix:
    """Scale every nonzero column to unit Euclidean norm."""
    norms = column_norms(A)
    scale = np.divide(1.0, norms, out=np.ones_like(norms), where=norms > 0)
    if sp.issparse(A):
        return sp.csc_matrix(A @ sp.diags(scale))
    return np.asfortranarray(A * scale)


def fold_labels(A: DesignMatrix, labels: np.ndarray) -> DesignMatrix:
    """Rows a_i -> b_i a_i for labels b_i in {-1, +1} ({0, 1} is mapped first)."""
    labels = np.asarray(labels, dtype=float).ravel()
    if labels.size != A.shape[0]:
        raise ValueError(f"expected {A.shape[0]} labels, got {labels.size}")
    values = set(np.unique(labels).tolist())
    if values <= {0.0, 1.0}:
        labels = 2.0 * labels - 1.0
    elif not values <= {-1.0, 1.0}:
        raise ValueError(f"labels must be in {{-1, +1}} or {{0, 1}}, got {sorted(values)[:5]}")
    if sp.issparse(A):
        return sp.csc_matrix(sp.diags(labels) @ A)
    return np.asfortranarray(labels[:, None] * A)


def write_instance(path, A: DesignMatrix, y: np.ndarray, fmt: str = 'csv'):
    """Write an instance as dense CSV (features then y) or LIBSVM text."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'csv':
        dense = A.toarray() if sp.issparse(A) else np.asarray(A)
        frame = pd.DataFrame(dense, columns=[f'x{j + 1}' for j in range(dense.shape[1])])
        frame['y'] = y
        frame.to_csv(path, index=False, float_format='%.17g')
    elif fmt == 'libsvm':
        rows = sp.csr_matrix(A)
        with path.open('w') as fh:
            for i in range(rows.shape[0]):
                start, end = rows.indptr[i], rows.indptr[i + 1]
                features = ' '.join(
                    f'{j + 1}:{v:.17g}' for j, v in zip(rows.indices[start:end], rows.data[start:end])
                )
                fh.write(f'{y[i]:.17g} {features}'.rstrip() + '\n')
    else:
        raise ValueError(f"unknown instance format '{fmt}', expected csv or libsvm")
    logger.info("wrote %s instance to %s", fmt, path)
