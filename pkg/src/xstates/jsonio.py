"""JSON encodings of states, group elements and reports.

Complex numbers travel as ``[re, im]`` pairs. Floats are written with
Python's shortest round-trip repr, so decode(encode(x)) is bit-exact and
identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .bloch import BlochState, DensityMatrix
from .errors import MalformedState
from .geometry import SectionPoint2
from .group import LocalRotation, WeylElement


def _real(x) -> float:
    x = float(x)
    # normalise -0.0 so sign-of-zero noise never changes the output bytes
    return 0.0 if x == 0 else x


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [_real(z.real), _real(z.imag)]


def decode_complex(obj) -> complex:
    if isinstance(obj, bool):
        raise MalformedState(f"expected [re, im], got {obj!r}")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
        raise MalformedState(f"expected [re, im], got {obj!r}")
    try:
        z = complex(float(obj[0]), float(obj[1]))
    except (TypeError, ValueError) as exc:
        raise MalformedState(f"non-numeric complex entry {obj!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise MalformedState("non-finite complex entry")
    return z


def encode_array(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(x) for x in a]


def decode_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise MalformedState("matrix must be a non-empty list of rows")
    return np.array([[decode_complex(z) for z in row] for row in obj], dtype=complex)


def encode_bloch(b: BlochState) -> dict:
    return {"n": b.n, "components": {w: encode_complex(c) for w, c in b.components.items()}}


def encode_density(d: DensityMatrix) -> dict:
    return {"n": d.n, "matrix": encode_array(d.matrix)}


def encode_section(s: SectionPoint2) -> dict:
    return {"x": encode_complex(s.x), "y": encode_complex(s.y), "lambda": [encode_complex(v) for v in s.lam]}


def encode_rotation(g: LocalRotation) -> dict:
    return {"n": g.n, "blocks": [encode_array(b) for b in g.blocks]}


def encode_weyl(w: WeylElement) -> dict:
    return {"n": w.n, "planar": [encode_array(a) for a in w.planar]}


def _n_field(obj: dict) -> int:
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MalformedState("field 'n' must be a positive integer")
    return n


def decode_state(obj) -> BlochState | DensityMatrix:
    """Decode either state format, chosen by the presence of 'components' or 'matrix'."""
    if not isinstance(obj, dict):
        raise MalformedState("state must be a JSON object")
    n = _n_field(obj)
    if "components" in obj:
        comps = obj["components"]
        if not isinstance(comps, dict):
            raise MalformedState("'components' must be an object")
        try:
            return BlochState(n, {w: decode_complex(c) for w, c in comps.items()})
        except ValueError as exc:
            raise MalformedState(str(exc)) from exc
    if "matrix" in obj:
        m = decode_matrix(obj["matrix"])
        try:
            return DensityMatrix(n, m)
        except ValueError as exc:
            raise MalformedState(str(exc)) from exc
    raise MalformedState("state needs 'components' or 'matrix'")


def decode_section(obj) -> SectionPoint2:
    if not isinstance(obj, dict) or not {"x", "y", "lambda"} <= obj.keys():
        raise MalformedState("section point needs 'x', 'y' and 'lambda'")
    lam = obj["lambda"]
    if not isinstance(lam, list) or len(lam) != 3:
        raise MalformedState("'lambda' must hold three entries")
    return SectionPoint2(decode_complex(obj["x"]), decode_complex(obj["y"]), [decode_complex(v) for v in lam])


def _plain(obj):
    """Recursively turn numpy scalars, complex numbers and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _real(x) if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
