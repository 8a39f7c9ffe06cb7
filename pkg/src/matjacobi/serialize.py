"""JSON helpers shared by the measure / chain serializers.

Complex matrices travel as separate real and imaginary row-major arrays so
the files stay valid plain JSON.  Floats are emitted with Python's shortest
round-trip repr, which preserves full double precision.
"""

from __future__ import annotations

import json

import numpy as np


def complex_to_pair(a):
    """Complex matrix -> (real rows, imag rows) as nested lists."""
    a = np.asarray(a, dtype=complex)
    return a.real.tolist(), a.imag.tolist()


def pair_to_complex(re, im):
    return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)


def complex_list_to_json(mats):
    """Stack of complex matrices -> list of {"re": ..., "im": ...} objects."""
    out = []
    for m in mats:
        re, im = complex_to_pair(m)
        out.append({"re": re, "im": im})
    return out


def json_to_complex_list(items):
    return np.array([pair_to_complex(d["re"], d["im"]) for d in items], dtype=complex)


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
