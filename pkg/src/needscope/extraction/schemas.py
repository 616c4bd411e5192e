"""Wire schemas for engine payloads, keyed by schema id.

Both engines' outputs must satisfy these; an LLM reply that does not
validate is re-asked once and then rejected. Enumerations are closed:
an out-of-vocabulary hierarchy or behavior string is an error, never
coerced to the nearest level.
"""

from __future__ import annotations

import jsonschema

from ..errors import SchemaValidationError
from .types import EMOTIONS, NhfLevel7, NpfLevel, RiskLevel, StressLevel

_NONEMPTY_STRING = {"type": "string", "minLength": 1}

SCHEMAS: dict[str, dict] = {
    "summary_v1": {
        "type": "object",
        "properties": {
            "core_query": _NONEMPTY_STRING,
            "additional_queries": {
                "type": "array",
                "items": _NONEMPTY_STRING,
                "maxItems": 2,
            },
        },
        "required": ["core_query", "additional_queries"],
        "additionalProperties": False,
    },
    "needs_v1": {
        "type": "object",
        "properties": {
            "needs": {
                "type": "array",
                "minItems": 1,
                "maxItems": 3,
                "items": {
                    "type": "object",
                    "properties": {
                        "purpose": _NONEMPTY_STRING,
                        "process": _NONEMPTY_STRING,
                    },
                    "required": ["purpose", "process"],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["needs"],
        "additionalProperties": False,
    },
    "hierarchy_v1": {
        "type": "object",
        "properties": {
            "nhf7": {"type": "string", "enum": [level.value for level in NhfLevel7]},
            "npf": {"type": "string", "enum": [level.value for level in NpfLevel]},
        },
        "required": ["nhf7", "npf"],
        "additionalProperties": False,
    },
    "behavior_v1": {
        "type": "object",
        "properties": {
            "stress": {"type": "string", "enum": [level.value for level in StressLevel]},
            "risk": {"type": "string", "enum": [level.value for level in RiskLevel]},
        },
        "required": ["stress", "risk"],
        "additionalProperties": False,
    },
    "emotion_v1": {
        "type": "object",
        "properties": {emotion: {"type": "number", "minimum": 0} for emotion in EMOTIONS},
        "required": list(EMOTIONS),
        "additionalProperties": False,
    },
    "age_income_v1": {
        "type": "object",
        "properties": {
            "ages": {
                "type": "array",
                "items": {"type": "integer", "exclusiveMinimum": 0, "exclusiveMaximum": 120},
            },
            "incomes": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "amount": {"type": "number", "exclusiveMinimum": 0},
                        "period": {
                            "type": "string",
                            "enum": ["monthly", "annual", "hourly", "weekly", "biweekly"],
                        },
                    },
                    "required": ["amount", "period"],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["ages", "incomes"],
        "additionalProperties": False,
    },
}


def validate_payload(schema_id: str, payload: object, post_id: str | None = None) -> dict:
    """Validate a parsed payload against the named schema; returns it typed as dict."""
    try:
        schema = SCHEMAS[schema_id]
    except KeyError:
        raise SchemaValidationError(f"unknown schema id {schema_id!r}", raw_payload=payload, post_id=post_id)
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaValidationError(
            f"payload failed schema {schema_id!r}: {exc.message}",
            raw_payload=payload,
            post_id=post_id,
        ) from exc
    return payload  # type: ignore[return-value]
