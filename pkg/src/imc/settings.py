"""Numerical tolerances and caps, configurable from one place.

The environment variable ``IMC_SETTINGS`` may point to a JSON file whose keys
override the defaults below.
"""

import json
import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Settings:
    tol_feas: float = 1e-9
    dedup_tol: float = 1e-9
    pf_tol: float = 1e-9
    max_iter: int = 100_000
    stall_rel: float = 1e-15
    matrix_cap: int = 10**6
    product_cap: int = 10**7
    pattern_cap: int = 10**5

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{path}: unknown settings {sorted(unknown)}")
        return replace(cls(), **data)


_current = None


def get_settings():
    global _current
    if _current is None:
        path = os.environ.get("IMC_SETTINGS")
        _current = Settings.from_file(path) if path else Settings()
    return _current


def set_settings(settings=None, **overrides):
    """Replace the process-wide settings; returns the previous value."""
    global _current
    previous = get_settings()
    base = settings if settings is not None else previous
    _current = replace(base, **overrides)
    return previous
