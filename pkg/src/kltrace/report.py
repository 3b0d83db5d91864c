"""Pass/fail bookkeeping for law suites.

A report is a flat list of named checks; rendering is canonical so the
same inputs always produce the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class LawCheck:
    name: str
    status: str  # "pass" or "fail"
    instances: int
    counterexample: str | None = None
    note: str = ""

    def line(self) -> str:
        out = f"{self.status:<4} {self.name} [{self.instances} instances]"
        if self.note:
            out += f" ({self.note})"
        if self.counterexample is not None:
            out += f" :: {self.counterexample}"
        return out


@dataclass
class LawReport:
    title: str
    checks: list[LawCheck] = field(default_factory=list)

    def record(
        self, name: str, ok: bool, instances: int, counterexample=None, note: str = ""
    ) -> LawCheck:
        check = LawCheck(
            name=name,
            status="pass" if ok else "fail",
            instances=instances,
            counterexample=None if ok else counterexample,
            note=note,
        )
        self.checks.append(check)
        return check

    def extend(self, other: "LawReport") -> "LawReport":
        self.checks.extend(other.checks)
        return self

    @property
    def ok(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def failures(self) -> list[LawCheck]:
        return [c for c in self.checks if c.status != "pass"]

    def lines(self) -> list[str]:
        head = f"{'ok' if self.ok else 'FAIL'} {self.title}"
        return [head] + ["  " + c.line() for c in self.checks]

    def render(self) -> str:
        return "\n".join(self.lines())
