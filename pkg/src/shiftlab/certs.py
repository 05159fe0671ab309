"""Structured pass/fail certificates carrying numeric evidence.

A certificate never proves an infinite-dimensional statement; it records
the finite evidence (ratios, residuals, singular values) plus the
threshold that was applied, so a reader can re-judge with a different
threshold later.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


def _jsonable(x: Any) -> Any:
    import numpy as np

    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


@dataclass
class Certificate:
    """Pass/fail report for one checkable claim.

    ``evidence`` holds the numbers the verdict was computed from (finite,
    losslessly serialized); ``params`` echoes the inputs.
    """

    claim: str
    passed: bool
    evidence: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "claim": self.claim,
            "passed": bool(self.passed),
            "evidence": _jsonable(self.evidence),
            "params": _jsonable(self.params),
        }
