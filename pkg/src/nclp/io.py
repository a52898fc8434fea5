"""JSON interchange for algebras, elements and functionals (schema version "1").

Complex numbers are ``[re, im]`` pairs (a bare number is accepted as a real
entry); matrices are row-major nested lists; an element is
``{"blocks": [matrix, ...]}``. Functional densities may reference a named
element. Every classification flag in the input is recomputed and checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .algebra import AlgebraSpec, Element
from .errors import InvariantError, SchemaError
from .functionals import FunctionalSpec

SCHEMA_VERSION = "1"

_NUMBER = {"type": "number"}
_ENTRY = {"anyOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _ENTRY}}
_ELEMENT = {"type": "object", "required": ["blocks"],
            "properties": {"blocks": {"type": "array", "items": _MATRIX}}}
_ELEMENT_OR_REF = {"anyOf": [_ELEMENT, {"type": "string"}]}
_FUNCTIONAL = {
    "type": "object",
    "required": ["density"],
    "properties": {
        "density": _ELEMENT_OR_REF,
        "infinite_part": _ELEMENT_OR_REF,
        "is_positive": {"type": "boolean"},
        "is_faithful": {"type": "boolean"},
        "is_state": {"type": "boolean"},
        "is_trace_compatible": {"type": "boolean"},
    },
}
_ALGEBRA = {
    "type": "object",
    "required": ["blocks"],
    "properties": {
        "blocks": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "trace_weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
    },
}
MANIFEST_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "algebra": _ALGEBRA,
        "blocks": _ALGEBRA["properties"]["blocks"],
        "trace_weights": _ALGEBRA["properties"]["trace_weights"],
        "elements": {"type": "object", "additionalProperties": _ELEMENT},
        "functionals": {"type": "object", "additionalProperties": _FUNCTIONAL},
    },
}

_FLAGS = {
    "is_positive": "is_positive_functional",
    "is_faithful": "is_faithful",
    "is_state": "is_state",
    "is_trace_compatible": "is_trace_compatible",
}


@dataclass
class Manifest:
    algebra: AlgebraSpec
    elements: dict[str, Element] = field(default_factory=dict)
    functionals: dict[str, FunctionalSpec] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION


def _pointer(parts) -> str:
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in parts) if parts else "/"


def algebra_to_json(alg: AlgebraSpec) -> dict:
    return {"blocks": list(alg.block_dims), "trace_weights": list(alg.trace_weights)}


def element_to_json(a: Element) -> dict:
    return {"blocks": [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in a.blocks]}


def functional_to_json(f: FunctionalSpec) -> dict:
    return {
        "density": element_to_json(f.density),
        "infinite_part": element_to_json(f.infinite_part),
        "is_positive": bool(f.is_positive_functional),
        "is_trace_compatible": bool(f.is_trace_compatible),
    }


def manifest_to_json(m: Manifest) -> dict:
    return {
        "schema_version": m.schema_version,
        "algebra": algebra_to_json(m.algebra),
        "elements": {k: element_to_json(v) for k, v in m.elements.items()},
        "functionals": {k: functional_to_json(v) for k, v in m.functionals.items()},
    }


def serialize_manifest(m: Manifest) -> str:
    return json.dumps(manifest_to_json(m), sort_keys=True, indent=2) + "\n"


def element_from_json(obj: dict, alg: AlgebraSpec, path: str) -> Element:
    blocks = obj["blocks"]
    if len(blocks) != alg.num_blocks:
        raise SchemaError(f"{path}/blocks", f"expected {alg.num_blocks} blocks, got {len(blocks)}")
    mats = []
    for k, (mat, n) in enumerate(zip(blocks, alg.block_dims)):
        if len(mat) != n or any(len(row) != n for row in mat):
            raise SchemaError(f"{path}/blocks/{k}", f"block must be {n}x{n}")
        arr = np.array([[complex(*z) if isinstance(z, list) else complex(z) for z in row] for row in mat],
                       dtype=complex).reshape(n, n)
        if not np.all(np.isfinite(arr)):
            raise SchemaError(f"{path}/blocks/{k}", "non-finite entry")
        mats.append(arr)
    return Element(alg, mats)


def parse_manifest(text: bytes | str) -> Manifest:
    """Parse and validate a manifest; invariants are recomputed, never trusted."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError("/", f"not UTF-8: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(_pointer(list(exc.absolute_path)), exc.message) from exc

    if "algebra" in raw:
        alg_raw, alg_path = raw["algebra"], "/algebra"
    elif "blocks" in raw:
        alg_raw, alg_path = raw, ""
    else:
        raise SchemaError("/algebra", "missing algebra")
    dims = alg_raw["blocks"]
    weights = alg_raw.get("trace_weights", [1.0] * len(dims))
    if len(weights) != len(dims):
        raise SchemaError(f"{alg_path}/trace_weights", f"{len(weights)} weights for {len(dims)} blocks")
    alg = AlgebraSpec(dims, weights)

    elements = {name: element_from_json(obj, alg, _pointer(["elements", name]))
                for name, obj in raw.get("elements", {}).items()}

    def resolve(ref, path):
        if isinstance(ref, str):
            if ref not in elements:
                raise SchemaError(path, f"unknown element {ref!r}")
            return elements[ref]
        return element_from_json(ref, alg, path)

    functionals = {}
    for name, obj in raw.get("functionals", {}).items():
        base = _pointer(["functionals", name])
        density = resolve(obj["density"], f"{base}/density")
        inf = resolve(obj["infinite_part"], f"{base}/infinite_part") if "infinite_part" in obj else None
        f = FunctionalSpec(density, inf)
        for flag, attr in _FLAGS.items():
            if flag in obj and bool(obj[flag]) != bool(getattr(f, attr)):
                raise InvariantError(flag, f"{base} claims {flag}={obj[flag]} but recomputation gives "
                                           f"{getattr(f, attr)}")
        functionals[name] = f
    return Manifest(alg, elements, functionals, raw.get("schema_version", SCHEMA_VERSION))


def load_manifest(path: str) -> Manifest:
    with open(path, "rb") as fh:
        return parse_manifest(fh.read())
