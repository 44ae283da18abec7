"""Number formatting and atomic file output shared by the exporters."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def num(x: float) -> float:
    """Round to 12 significant digits; negative zero becomes zero."""
    x = float(f"{float(x):.{SIG_DIGITS}g}")
    return 0.0 if x == 0 else x


def complex_list(a) -> list:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        return [num(arr.real), num(arr.imag)]
    return [complex_list(x) for x in arr]


def real_list(a) -> list:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        return num(arr)
    return [real_list(x) for x in arr]


def real_or_complex(a):
    """Plain numbers when the imaginary part vanishes, ``[re, im]`` pairs otherwise."""
    arr = np.asarray(a)
    if np.iscomplexobj(arr) and np.max(np.abs(arr.imag), initial=0.0) > 1e-12:
        return complex_list(arr)
    return real_list(np.real(arr))


def in_pi(x: float) -> float:
    return num(float(x) / np.pi)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
