"""JSON Schema for the records printed by the command-line tool."""
from __future__ import annotations

import jsonschema

SCHEMA_VERSION = "1"

_number_or_null = {"type": ["number", "null"]}
_fraction = {"type": "string", "pattern": r"^[0-9]+(/[0-9]+)?$"}
_fraction_or_null = {"anyOf": [_fraction, {"type": "null"}]}

ESTIMATE = {
    "type": "object",
    "required": [
        "ones", "shots", "f_hat", "ci_low", "ci_high",
        "ci_method", "alpha", "seed", "exact_f", "abs_error",
    ],
    "properties": {
        "ones": {"type": "integer", "minimum": 0},
        "shots": {"type": "integer", "minimum": 1},
        "f_hat": {"type": "number", "minimum": 0, "maximum": 1},
        "ci_low": {"type": "number", "minimum": 0, "maximum": 1},
        "ci_high": {"type": "number", "minimum": 0, "maximum": 1},
        "ci_method": {"enum": ["wilson", "clopper_pearson"]},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "exact_f": _fraction_or_null,
        "abs_error": _number_or_null,
    },
}

SWEEP_ROW = {
    "type": "object",
    "required": ["k", "f_hat", "exact_f", "abs_error", "hoeffding_bound", "wall_clock_s"],
    "properties": {
        "k": {"type": "integer", "minimum": 1, "maximum": 24},
        "f_hat": {"type": "number", "minimum": 0, "maximum": 1},
        "exact_f": _fraction,
        "abs_error": {"type": "number", "minimum": 0},
        "hoeffding_bound": {"type": "number", "exclusiveMinimum": 0},
        "wall_clock_s": {"type": "number", "minimum": 0},
    },
}

_RESULTS = {
    "run": ESTIMATE,
    "compare": {
        "type": "object",
        "required": ["quantum", "classical", "abs_difference", "ci_overlap", "exact_f"],
        "properties": {
            "quantum": ESTIMATE,
            "classical": ESTIMATE,
            "abs_difference": {"type": "number", "minimum": 0, "maximum": 1},
            "ci_overlap": {"type": "boolean"},
            "exact_f": _fraction_or_null,
        },
    },
    "count": {
        "type": "object",
        "required": ["solution_count", "domain_size", "exact_f"],
        "properties": {
            "solution_count": {"type": "integer", "minimum": 0},
            "domain_size": {"type": "integer", "minimum": 2},
            "exact_f": _fraction,
        },
    },
    "plan": {
        "type": "object",
        "required": ["shots", "epsilon", "delta", "bound"],
        "properties": {
            "shots": {"type": "integer", "minimum": 1},
            "epsilon": {"type": "number"},
            "delta": {"type": "number"},
            "bound": {"type": "string"},
        },
    },
    "sweep": {
        "type": "object",
        "required": ["rows"],
        "properties": {"rows": {"type": "array", "minItems": 1, "items": SWEEP_ROW}},
    },
}

OUTPUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "qfrac output record",
    "type": "object",
    "required": ["schema_version", "command", "config", "result", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": sorted(_RESULTS)},
        "config": {"type": "object"},
        "result": {"type": "object"},
        "timing": {
            "type": "object",
            "additionalProperties": {"type": "number", "minimum": 0},
        },
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"const": name}}},
            "then": {"properties": {"result": schema}},
        }
        for name, schema in _RESULTS.items()
    ],
}


def validate_record(record: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``record`` is malformed."""
    jsonschema.validate(record, OUTPUT_SCHEMA)
