"""CSV/JSON input and atomic, deterministic output."""

import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .errors import DomainViolation

SCHEMA = 1


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_points(path):
    """Load a CSV with one point per row; a single non-numeric header row is skipped."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise DomainViolation(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DomainViolation(f"{path}: ragged rows")
    try:
        return np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DomainViolation(f"{path}: {exc}") from None


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename; ``-`` is stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, data):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``inf``/``-inf``/``nan``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def report_text(payload, config):
    body = {"schema": SCHEMA, "config": config, **payload}
    return json.dumps(jsonable(body), sort_keys=True, indent=2) + "\n"


def write_report(path, payload, config):
    atomic_write_text(path, report_text(payload, config))


def load_config(path):
    """Defaults from a JSON file; a previously written report contributes its ``config``."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "schema" in data and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise DomainViolation(f"{path}: config must be a JSON object")
    return data
