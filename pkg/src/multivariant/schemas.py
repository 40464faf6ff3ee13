"""JSON schemas of every document the command-line tool writes."""

_HASH = {"type": "string", "pattern": "^[0-9a-f]{64}$"}
_BIGINT = {"type": "string", "pattern": "^[0-9]+$"}
_RATIO = {"type": "number", "minimum": 0, "maximum": 1}
_COUNT = {"type": "integer", "minimum": 0}

VARIANT_SET = {
    "type": "object",
    "required": ["function", "variants"],
    "properties": {
        "function": {"type": "string"},
        "variants": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "rules", "body_hash"],
            "properties": {
                "name": {"type": "string"},
                "rules": {"type": "array", "items": {"type": "string"}},
                "body_hash": _HASH,
                "wat": {"type": "string"},
            },
        }},
        "candidates": _COUNT,
        "rejected": _COUNT,
        "skipped": {"type": "string"},
    },
}

DIVERSIFY_SUMMARY = {
    "type": "object",
    "required": ["seed", "functions"],
    "properties": {
        "seed": _COUNT,
        "functions": {"type": "array", "items": {
            "type": "object",
            "required": ["function", "variants", "rejected"],
            "properties": {"function": {"type": "string"}, "variants": _COUNT,
                           "candidates": _COUNT, "rejected": _COUNT},
        }},
    },
}

PATH_REPORT = {
    "type": "object",
    "required": ["entry", "budget", "paths", "dispatchers", "variants", "non_diversified"],
    "properties": {
        "entry": {"type": "string"},
        "budget": _COUNT,
        "paths": _BIGINT,
        "dispatchers": _COUNT,
        "variants": _COUNT,
        "non_diversified": _COUNT,
    },
}

LINK_REPORT = {
    "type": "object",
    "required": ["entry", "budget", "functions", "non_diversified", "dispatchers", "variants",
                 "paths_before", "paths_after"],
    "properties": {
        "entry": {"type": "string"},
        "budget": _COUNT,
        "functions": _COUNT,
        "non_diversified": _COUNT,
        "dispatchers": _COUNT,
        "variants": _COUNT,
        "paths_before": _BIGINT,
        "paths_after": _BIGINT,
    },
}

METRICS = {
    "type": "object",
    "required": ["per_node_R", "entropy", "N", "Q", "failures"],
    "properties": {
        "per_node_R": {"type": "array", "items": _RATIO},
        "entropy": _RATIO,
        "N": {"type": "integer", "minimum": 1},
        "Q": {"type": "integer", "minimum": 1},
        "failures": _COUNT,
    },
}

PRESERVATION = {
    "type": "object",
    "required": ["pv", "pp", "paths_before", "paths_after", "per_function"],
    "properties": {
        "pv": _RATIO,
        "pp": _RATIO,
        "paths_before": _BIGINT,
        "paths_after": _BIGINT,
        "passes": {"type": "array", "items": {"type": "string"}},
        "per_function": {"type": "array", "items": {
            "type": "object",
            "required": ["function", "variants_before", "unique_after"],
            "properties": {"function": {"type": "string"}, "variants_before": _COUNT,
                           "unique_after": _COUNT},
        }},
    },
}

_STATS = {
    "type": "object",
    "required": ["runs", "median", "sigma", "groups"],
    "properties": {"runs": _COUNT, "median": {"type": "number"},
                   "sigma": {"type": "number", "minimum": 0}, "groups": {"type": "object"}},
}

TIMING = {
    "type": "object",
    "required": ["original", "multivariant", "U", "p"],
    "properties": {
        "original": _STATS,
        "multivariant": _STATS,
        "U": {"type": "number", "minimum": 0},
        "p": _RATIO,
        "group_tests": {"type": "array"},
    },
}

MODULE_SUMMARY = {
    "type": "object",
    "required": ["functions", "exports", "imports", "memory"],
    "properties": {
        "functions": {"type": "array"},
        "exports": {"type": "object"},
        "imports": {"type": "array"},
        "memory": {"type": ["integer", "null"]},
    },
}

VALIDATION = {
    "type": "object",
    "required": ["valid", "violations"],
    "properties": {"valid": {"type": "boolean"}, "violations": {"type": "array"}},
}

SCHEMAS = {
    "variant_set": VARIANT_SET,
    "diversify_summary": DIVERSIFY_SUMMARY,
    "path_report": PATH_REPORT,
    "link_report": LINK_REPORT,
    "metrics": METRICS,
    "preservation": PRESERVATION,
    "timing": TIMING,
    "module": MODULE_SUMMARY,
    "validation": VALIDATION,
}
