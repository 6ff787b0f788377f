"""Run report document: a JSON-serializable record of a fit run.

The document is plain JSON (lists, dicts, numbers, strings, null) so
``parse(emit(report)) == report`` holds exactly; Python's float repr
round-trips doubles losslessly.  ``validate`` checks the document against
the published schema below.
"""

from __future__ import annotations

import json

import jsonschema

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "betarc run report",
    "type": "object",
    "required": ["version", "model", "estimates", "loglik", "aic", "bic",
                 "converged", "n_obs", "seed", "timing_seconds"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "string"},
        "backend": {"type": "string"},
        "seed": {"type": "integer"},
        "timing_seconds": {"type": "number"},
        "model": {
            "type": "object",
            "required": ["family", "link_g", "link_h", "p", "n_covariates"],
            "additionalProperties": False,
            "properties": {
                "family": {"type": "string"},
                "link_g": {"type": "string"},
                "link_h": {"type": "string"},
                "p": {"type": "integer", "minimum": 0},
                "n_covariates": {"type": "integer", "minimum": 0},
            },
        },
        "estimates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "value": {"type": "number"},
                    "se": {"type": ["number", "null"]},
                    "p_value": {"type": ["number", "null"]},
                },
            },
        },
        "u0": {"type": "number"},
        "loglik": {"type": "number"},
        "aic": {"type": "number"},
        "bic": {"type": "number"},
        "converged": {"type": "boolean"},
        "n_obs": {"type": "integer", "minimum": 1},
        "k_params": {"type": "integer", "minimum": 1},
        "ljung_box": {
            "type": ["object", "null"],
            "required": ["statistic", "lags", "dof", "p_value"],
            "additionalProperties": False,
            "properties": {
                "statistic": {"type": "number"},
                "lags": {"type": "integer"},
                "dof": {"type": "integer"},
                "p_value": {"type": "number"},
            },
        },
        "accuracy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "in_sample": {"$ref": "#/$defs/accuracy"},
                "out_of_sample": {"$ref": "#/$defs/accuracy"},
            },
        },
        "forecasts": {"type": "array", "items": {"type": "number"}},
        "holdout_actual": {"type": "array", "items": {"type": "number"}},
        "u0_grid_trace": {
            "type": ["array", "null"],
            "items": {"type": "array", "items": {"type": "number"},
                      "minItems": 2, "maxItems": 2},
        },
    },
    "$defs": {
        "accuracy": {
            "type": "object",
            "required": ["mape", "mpe", "me", "mae", "rmse", "horizon"],
            "additionalProperties": False,
            "properties": {
                "mape": {"type": "number"},
                "mpe": {"type": "number"},
                "me": {"type": "number"},
                "mae": {"type": "number"},
                "rmse": {"type": "number"},
                "horizon": {"type": "string"},
            },
        },
    },
}


def emit(report: dict) -> str:
    """Serialize a report document deterministically (sorted keys)."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def parse(text: str) -> dict:
    return json.loads(text)


def validate(report: dict) -> None:
    """Raise jsonschema.ValidationError if the document is malformed."""
    jsonschema.validate(report, REPORT_SCHEMA)
