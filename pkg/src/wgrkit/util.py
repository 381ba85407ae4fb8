"""Shared numeric and I/O helpers.

Summations that feed ratios and report values use ``math.fsum`` over a
fixed ascending point-index order, so every result is independent of the
worker count and reproducible bit for bit. JSON and CSV emitters format
reals with 17 significant digits, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def fsum(values) -> float:
    """Compensated sum of an iterable or array (exact rounding)."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    return math.fsum(values)


def weighted_sum(values: np.ndarray, mass: np.ndarray) -> float:
    """Compensated sum of values*mass, elementwise products rounded once."""
    return math.fsum((np.asarray(values, dtype=float) * mass).tolist())


def parallel_map(fn, items, threads: int = 1) -> list:
    """Order-preserving map; identical output for any thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def format_real(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"non-finite real in output: {x!r}")
    return format(float(x), ".17g")


def _emit_json(obj, out: list[str]) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_real(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit_json(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, item in enumerate(seq):
            if i:
                out.append(", ")
            _emit_json(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON: sorted keys, 17-digit reals, no whitespace drift."""
    out: list[str] = []
    _emit_json(obj, out)
    return "".join(out)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_canonical(obj))
        fh.write("\n")


def write_csv(path, header: list[str], rows) -> None:
    """RFC 4180 CSV with a header row; reals at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_real(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def philox_generator(seed: int) -> np.random.Generator:
    """Counter-based RNG stream (Philox4x64-10) keyed by the seed."""
    return np.random.Generator(np.random.Philox(key=int(seed)))
