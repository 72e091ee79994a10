"""Structured verification reports.

A Report collects named assertions (computed value, reference, tolerance,
pass/fail, and the kind of oracle the reference came from) plus free-form
traces. Serialization: JSON for the report, CSV for per-level traces
(17 significant digits, deterministic given the seed; wall time is the one
field allowed to differ between identical runs).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Assertion", "Report", "write_trace_csv"]


def _plain(value):
    """JSON-encodable copy of a value (complex -> {re, im})."""
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.complexfloating):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return repr(value)


@dataclass
class Assertion:
    """One checked statement: computed vs reference at a tolerance."""

    name: str
    computed: object
    reference: object
    tolerance: float
    passed: bool
    kind: str = "analytic"  # analytic | quadrature-oracle | self-convergence | calibration | closed-form

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": _plain(self.computed),
            "reference": _plain(self.reference),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "kind": self.kind,
        }


@dataclass
class Report:
    """Verification output of one operation or CLI command."""

    command: str
    params: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    convention: str = ""
    seed: int | None = None
    wall_time_s: float = 0.0

    def check(
        self,
        name: str,
        computed,
        reference,
        tolerance: float,
        kind: str = "analytic",
        relative: bool = True,
    ) -> bool:
        """Record an assertion comparing computed against reference."""
        c = complex(computed) if not isinstance(computed, bool) else computed
        if isinstance(computed, bool):
            ok = computed == reference
        else:
            ref = complex(reference)
            scale = max(abs(ref), 1e-300) if relative else 1.0
            ok = abs(c - ref) <= tolerance * scale
        self.assertions.append(Assertion(name, computed, reference, tolerance, bool(ok), kind))
        return bool(ok)

    def flag(self, name: str, passed: bool, kind: str = "analytic", detail=None) -> bool:
        """Record a bare pass/fail assertion."""
        self.assertions.append(Assertion(name, detail if detail is not None else passed, True, 0.0, bool(passed), kind))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "params": _plain(self.params),
            "assertions": [a.as_dict() for a in self.assertions],
            "values": _plain(self.values),
            "convention": self.convention,
            "seed": self.seed,
            "passed": self.passed,
            "wall_time_s": self.wall_time_s,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)

    def summary_lines(self) -> list[str]:
        out = []
        for a in self.assertions:
            out.append(f"[{'PASS' if a.passed else 'FAIL'}] {self.command}: {a.name}")
        return out


def write_trace_csv(path, header: list[str], rows) -> None:
    """Write a trace CSV with 17-significant-digit scientific notation."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, (float, np.floating)):
                    cells.append(f"{float(v):.16e}")
                elif isinstance(v, (complex, np.complexfloating)):
                    cells.append(f"{v.real:.16e}+{v.imag:.16e}j")
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
