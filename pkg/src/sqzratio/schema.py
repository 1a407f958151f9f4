"""JSON schema of the analysis report (draft-07)."""

from __future__ import annotations

__all__ = ["REPORT_SCHEMA"]


def _number(nullable: bool = False) -> dict:
    return {"type": ["number", "null"]} if nullable else {"type": "number"}


_ETA = {
    "type": "object",
    "required": ["eta", "sigma", "unphysical"],
    "properties": {
        "eta": _number(),
        "sigma": _number(),
        "unphysical": {"type": "boolean"},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "sqzratio analysis report",
    "type": "object",
    "required": [
        "schema_version",
        "ratio",
        "squeeze",
        "detected",
        "efficiency",
        "escape",
        "inputs_echo",
        "caveats",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "ratio": {
            "type": "object",
            "required": ["mean", "sigma", "n", "values"],
            "properties": {
                "mean": _number(),
                "sigma": _number(),
                "n": {"type": "integer", "minimum": 1},
                "values": {"type": "array", "items": _number(), "minItems": 1},
            },
            "additionalProperties": False,
        },
        "squeeze": {
            "type": "object",
            "required": ["r", "sigma_r", "mu_sq_db", "mu_asq_db", "sigma_db", "clipped"],
            "properties": {
                "r": _number(),
                "sigma_r": _number(),
                "mu_sq_db": _number(),
                "mu_asq_db": _number(),
                "sigma_db": _number(),
                "clipped": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "detected": {
            "type": "object",
            "required": ["sq_db", "asq_db", "sigma_db"],
            "properties": {
                "sq_db": _number(),
                "asq_db": _number(),
                "sigma_db": _number(),
            },
            "additionalProperties": False,
        },
        "efficiency": {
            "type": "object",
            "required": ["eta_plus", "eta_minus", "verdict"],
            "properties": {
                "eta_plus": _ETA,
                "eta_minus": _ETA,
                "verdict": {
                    "type": "object",
                    "required": ["z", "k", "consistent"],
                    "properties": {
                        "z": _number(nullable=True),
                        "k": _number(),
                        "consistent": {"type": "boolean"},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "escape": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["eta_esc", "eta_det", "eta_vis", "eta_opt", "unphysical"],
                    "properties": {
                        "eta_esc": _number(),
                        "eta_det": _number(),
                        "eta_vis": _number(),
                        "eta_opt": _number(),
                        "unphysical": {"type": "boolean"},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "inputs_echo": {"type": "object"},
        "caveats": {"type": "array", "items": {"type": "string"}, "minItems": 3},
    },
    "additionalProperties": False,
}
