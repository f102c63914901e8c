"""Versioned JSON schemas for every file format the CLI reads or writes."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

KINDS = ("word", "presentation", "null_sequence", "ops", "diagram", "config")
VERSION = "v1"


class SchemaError(ValueError):
    """A document does not match its schema; the message names the failing field."""


def load(kind: str) -> dict:
    if kind not in KINDS:
        raise KeyError(kind)
    text = resources.files(__name__).joinpath(f"{kind}.{VERSION}.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    pairs = []
    for kind in KINDS:
        schema = load(kind)
        res = Resource.from_contents(schema)
        pairs.append((f"{kind}.{VERSION}.json", res))
        pairs.append((schema["$id"], res))
    return Registry().with_resources(pairs)


@lru_cache(maxsize=None)
def validator(kind: str) -> Draft202012Validator:
    schema = load(kind)
    return Draft202012Validator(schema, registry=_registry())


def check(kind: str, data) -> None:
    """Raise SchemaError describing the first violation (by JSON path)."""
    errors = sorted(validator(kind).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"{kind}: field {path}: {err.message}")
