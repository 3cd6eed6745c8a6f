"""JSON Schema for the detection wire format the downstream pipeline ingests."""

from __future__ import annotations

import jsonschema

POINT = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

DETECTION_SCHEMA = {
    "type": "object",
    "required": ["frame", "class", "score", "bbox"],
    "additionalProperties": False,
    "properties": {
        "frame": {"type": "integer", "minimum": 0},
        "class": {"enum": ["vehicle", "pedestrian"]},
        "score": {"type": "number", "minimum": 0.0, "maximum": 1.0},
        "bbox": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 4,
            "maxItems": 4,
        },
        "mask": {"type": "array", "items": POINT, "minItems": 3},
        "contact": POINT,
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(DETECTION_SCHEMA)


def validate_record(record: dict) -> None:
    """Raise jsonschema.ValidationError if the record breaks the contract."""
    _VALIDATOR.validate(record)
    x0, y0, x1, y1 = record["bbox"]
    if not (x0 < x1 and y0 < y1):
        raise jsonschema.ValidationError(f"degenerate bbox {record['bbox']}")
    for vx, vy in record.get("mask", []):
        if not (x0 - 2 <= vx <= x1 + 2 and y0 - 2 <= vy <= y1 + 2):
            raise jsonschema.ValidationError(
                f"mask vertex ({vx}, {vy}) outside bbox {record['bbox']}"
            )
