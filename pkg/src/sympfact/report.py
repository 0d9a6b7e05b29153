"""Verification reports shared by the suites and the CLI."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


@dataclass
class Report:
    suite: str
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0  # printed, never serialised

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, ok: bool, case: str, expected: Any = None, got: Any = None) -> bool:
        self.checked += 1
        if not ok:
            self.failures.append({"case": case, "expected": _s(expected), "got": _s(got)})
        return ok

    def merge(self, other: "Report") -> None:
        self.checked += other.checked
        self.failures.extend(other.failures)
        self.notes.update(other.notes)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "checked": self.checked,
            "failures": self.failures,
            "notes": {k: _s(v) if not isinstance(v, (dict, list)) else v for k, v in sorted(self.notes.items())},
        }

    def summary_line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.suite}: {self.checked} checked, {len(self.failures)} failures ({self.wall_time:.2f}s)"


def _s(x: Any) -> Any:
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (list, tuple)):
        return [_s(v) for v in x]
    return str(x)


def derived_seed(seed: int, suite: str) -> int:
    """Per-suite seed derived from the master seed."""
    digest = hashlib.sha256(f"{seed}:{suite}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def rand_rat(rng: random.Random) -> Fraction:
    """Small-height rational: numerator in [-9, 9], denominator in {1, 2, 3}."""
    return Fraction(rng.randint(-9, 9), rng.choice((1, 2, 3)))


def rand_nonzero_rat(rng: random.Random) -> Fraction:
    while True:
        x = rand_rat(rng)
        if x:
            return x
