"""Numerical tolerances, overridable from a JSON file."""

import json
from dataclasses import asdict, dataclass, fields, replace

from .errors import SchemaError


@dataclass(frozen=True)
class Tolerances:
    unitality: float = 1e-10
    state: float = 1e-10
    peripheral: float = 1e-8
    residual: float = 1e-9
    subspace: float = 1e-9
    invariance: float = 1e-9
    rank_rel: float = 1e-9
    condition_max: float = 1e12
    decay: float = 1e-7
    horizon: int = 200
    dilation_budget: int = 4096
    marginal_budget: int = 1024

    def to_dict(self):
        return asdict(self)


DEFAULT = Tolerances()


def load_tolerances(path=None, base=DEFAULT):
    """Read overrides from a JSON object keyed by field name."""
    if path is None:
        return base
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise SchemaError("tolerance config must be a JSON object")
    known = {f.name: f.type for f in fields(Tolerances)}
    updates = {}
    for key, value in data.items():
        if key not in known:
            raise SchemaError(f"unknown tolerance key {key!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            raise SchemaError(f"tolerance {key!r} must be a positive number")
        updates[key] = int(value) if key in ("horizon", "dilation_budget", "marginal_budget") else float(value)
    return replace(base, **updates)
