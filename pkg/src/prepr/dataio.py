"""Real-data ingestion and the random-partition calibration check."""

import csv
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import bs_test, cq_test, sd_test
from .core import run_test
from .errors import ValidationError
from .moments import as_sample_matrix
from .simgen import replicate_rng

TESTS = ("PREPR", "BS", "SD", "CQ")


@dataclass
class LabeledDataset:
    data: np.ndarray
    labels: np.ndarray
    variable_names: list = None

    def __post_init__(self):
        self.data = as_sample_matrix(self.data)
        self.labels = np.asarray(self.labels).astype(str)
        if self.labels.shape != (self.data.shape[0],):
            raise ValidationError(
                f"{self.labels.shape[0]} labels for {self.data.shape[0]} samples"
            )
        groups, counts = np.unique(self.labels, return_counts=True)
        if groups.size != 2:
            raise ValidationError(f"expected exactly 2 group labels, found {groups.size}: {list(groups)}")
        if counts.min() < 2:
            raise ValidationError(f"group {groups[counts.argmin()]!r} has fewer than 2 samples")

    @property
    def groups(self):
        """The two labels in order of first appearance."""
        _, first = np.unique(self.labels, return_index=True)
        return tuple(self.labels[np.sort(first)])

    def split(self):
        a, b = self.groups
        return self.data[self.labels == a], self.data[self.labels == b]


def _sniff_delimiter(first_line):
    return "\t" if "\t" in first_line else ","


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_table(path):
    """Rows of a comma- or tab-delimited file (delimiter taken from the first line)."""
    with open(path, newline="") as fh:
        first = fh.readline()
        fh.seek(0)
        rows = [r for r in csv.reader(fh, delimiter=_sniff_delimiter(first)) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    return [[c.strip() for c in r] for r in rows]


def _parse_numeric(rows, path, row_offset, col_offset):
    try:
        return np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError:
        for i, r in enumerate(rows):
            for j, c in enumerate(r):
                if not _is_number(c):
                    raise ValidationError(
                        f"{path}: non-numeric cell {c!r} at row {i + row_offset}, column {j + col_offset}"
                    ) from None
        raise


def _read_matrix(path, orientation, log_transform, label_column=None):
    if orientation not in ("rows_are_samples", "rows_are_genes"):
        raise ValidationError(f"unknown orientation {orientation!r}")
    rows = read_table(path)
    width = max(len(r) for r in rows)
    if any(len(r) != width for r in rows):
        raise ValidationError(f"{path}: ragged rows")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = rows[0], rows[1:]

    label_col = None
    if label_column is not None:
        if orientation != "rows_are_samples":
            raise ValidationError("a label column is only meaningful with rows_are_samples")
        if header is not None and str(label_column) in header:
            label_col = header.index(str(label_column))
        elif str(label_column).lstrip("-").isdigit():
            label_col = int(label_column) % width
        else:
            raise ValidationError(f"{path}: no label column {label_column!r}")
    label_values = [r[label_col] for r in rows] if label_col is not None else None

    keep_cols = [j for j in range(width) if j != label_col]
    rows = [[r[j] for j in keep_cols] for r in rows]
    if header is not None:
        header = [header[j] for j in keep_cols]
    row_names = None
    if rows and not any(_is_number(r[0]) for r in rows):
        row_names = [r[0] for r in rows]
        rows = [r[1:] for r in rows]
        if header is not None:
            header = header[1:]

    values = _parse_numeric(rows, path, 1 if header is not None else 0, 1 if row_names else 0)
    if orientation == "rows_are_genes":
        values = values.T
        variable_names = row_names
    else:
        variable_names = header

    if log_transform:
        bad = np.argwhere(~(values > 0))
        if bad.size:
            i, j = bad[0]
            raise ValidationError(
                f"{path}: cannot log-transform nonpositive value {values[i, j]!r} at sample {i}, variable {j}"
            )
        values = np.log(values)
    return values, variable_names, label_values


def load_matrix(path, orientation="rows_are_samples", log_transform=False, labels=None):
    """Load a delimited expression matrix as a :class:`LabeledDataset`.

    Parameters
    ----------
    path : str
        Comma- or tab-separated text.  A first row containing any
        non-numeric cell is a header; a first column that is non-numeric
        holds row names.
    orientation : {"rows_are_samples", "rows_are_genes"}
    log_transform : bool
        Apply the natural log entrywise; every value must be positive.
    labels : str, int, path or sequence
        Group labels.  An existing file path is read as one label per line
        (or a single delimited row); a sequence is used as is; otherwise the
        value names (or indexes) a column of a samples-as-rows file, which
        is removed from the data.
    """
    if labels is None:
        raise ValidationError("labels are required: a column name/index, a label file, or a sequence")
    if _is_label_file(labels):
        values, names, _ = _read_matrix(path, orientation, log_transform)
        label_values = _read_labels(labels)
    elif isinstance(labels, (str, int)):
        values, names, label_values = _read_matrix(path, orientation, log_transform, labels)
    else:
        values, names, _ = _read_matrix(path, orientation, log_transform)
        label_values = list(labels)
    return LabeledDataset(values, np.asarray(label_values), names)


def _is_label_file(labels):
    return isinstance(labels, (str, os.PathLike)) and os.path.isfile(labels)


def _read_labels(path):
    rows = read_table(path)
    if len(rows) == 1:
        return rows[0]
    return [r[0] for r in rows]


def load_group(path, orientation="rows_are_samples", log_transform=False, labels=None, group=None):
    """Load one homogeneous sample, optionally selecting ``group`` from a labeled file."""
    if labels is None:
        return _read_matrix(path, orientation, log_transform)[0]
    ds = load_matrix(path, orientation, log_transform, labels)
    if group is None:
        raise ValidationError("choose a group when the file is labeled")
    mask = ds.labels == str(group)
    if not mask.any():
        raise ValidationError(f"no samples labelled {group!r}; labels are {ds.groups}")
    return ds.data[mask]


def write_matrix(dataset: LabeledDataset, path, label_name="group"):
    """Write samples as rows with a header and a leading label column (17 significant digits)."""
    p = dataset.data.shape[1]
    names = dataset.variable_names or [f"v{j}" for j in range(p)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([label_name, *names])
        for lab, row in zip(dataset.labels, dataset.data):
            w.writerow([lab, *(format(v, ".17g") for v in row)])


def _run_one(test, x, y, alpha, permissive):
    if test == "PREPR":
        return run_test(x, y, alpha, permissive=permissive)
    if test == "SD":
        return sd_test(x, y, alpha, permissive=permissive)
    if test == "BS":
        return bs_test(x, y, alpha)
    if test == "CQ":
        return cq_test(x, y, alpha)
    raise ValidationError(f"unknown test {test!r}; choose from {TESTS}")


def two_sample_run(dataset: LabeledDataset, tests=TESTS, alpha=0.05, permissive=True):
    """Run each requested test on the dataset's two groups.

    Returns a dict with the group labels and sizes and one entry per test
    (a :class:`~prepr.core.TestResult` or :class:`~prepr.baselines.BaselineResult`).
    """
    x, y = dataset.split()
    out = {"groups": dataset.groups, "sizes": (x.shape[0], y.shape[0]), "results": {}}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for t in tests:
            out["results"][t.upper()] = _run_one(t.upper(), x, y, alpha, permissive)
    return out


def balanced_split(rng, n):
    """Random split of ``range(n)`` into sizes ``n // 2`` and ``n - n // 2``."""
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):  # Fisher-Yates
        j = int(rng.integers(0, i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    half = n // 2
    return idx[:half], idx[half:]


def _partition_chunk(data, tests, alpha, seed, start, stop, permissive):
    rejects = {t: 0 for t in tests}
    failures = {t: 0 for t in tests}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for rep in range(start, stop):
            a, b = balanced_split(replicate_rng(seed, rep), data.shape[0])
            x, y = data[a], data[b]
            for t in tests:
                try:
                    res = _run_one(t, x, y, alpha, permissive)
                except ValidationError:
                    failures[t] += 1
                else:
                    rejects[t] += int(res.reject)
    return rejects, failures


def partition_check(group_data, repetitions=1000, tests=TESTS, alpha=0.05, seed=0,
                    permissive=True, workers=1):
    """Empirical type I error from repeated random balanced splits of one group.

    Returns ``{test: {"rate", "rejections", "repetitions", "failures"}}`` plus
    ``"constant_variables"``, the number of columns constant over the whole
    group (dropped by the permissive policy in every split).
    """
    data = as_sample_matrix(group_data, "group_data", min_rows=4)
    if repetitions < 1:
        raise ValidationError("repetitions must be >= 1")
    tests = tuple(t.upper() for t in tests)
    unknown = set(tests) - set(TESTS)
    if unknown or not tests:
        raise ValidationError(f"tests must be a nonempty subset of {TESTS}")
    edges = np.linspace(0, repetitions, max(1, min(repetitions, workers * 4)) + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if workers <= 1:
        parts = [_partition_chunk(data, tests, alpha, seed, a, b, permissive) for a, b in spans]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_partition_chunk, *zip(*[(data, tests, alpha, seed, a, b, permissive)
                                                            for a, b in spans])))
    out = {}
    for t in tests:
        rej = sum(part[0][t] for part in parts)
        fail = sum(part[1][t] for part in parts)
        valid = repetitions - fail
        out[t] = {
            "rate": rej / valid if valid else float("nan"),
            "rejections": rej,
            "repetitions": valid,
            "failures": fail,
        }
    out["constant_variables"] = int(np.sum(np.ptp(data, axis=0) == 0))
    return out
