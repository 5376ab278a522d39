"""Three-valued verdicts carrying finite certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

YES = "Yes"
NO = "No"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    value: str
    certificate: Any = None
    reason: str | None = None
    budget_used: int | None = None

    def __bool__(self) -> bool:
        return self.value == YES

    @property
    def decided(self) -> bool:
        return self.value != UNKNOWN

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"verdict": self.value}
        if self.certificate is not None:
            out["certificate"] = jsonable(self.certificate)
        if self.reason is not None:
            out["reason"] = self.reason
        if self.budget_used is not None:
            out["budget_used"] = self.budget_used
        return out


def yes(certificate: Any = None, reason: str | None = None, budget: int | None = None) -> Verdict:
    return Verdict(YES, certificate, reason, budget)


def no(certificate: Any, reason: str | None = None, budget: int | None = None) -> Verdict:
    if certificate is None:
        raise ValueError("a No verdict needs a certificate")
    return Verdict(NO, certificate, reason, budget)


def unknown(reason: str, budget: int | None = None, certificate: Any = None) -> Verdict:
    return Verdict(UNKNOWN, certificate, reason, budget)


def jsonable(obj: Any) -> Any:
    """Convert certificates (tuples, frozensets, dataclasses) into JSON-ready values."""
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        items = [jsonable(v) for v in obj]
        try:
            return sorted(items)
        except TypeError:
            return sorted(items, key=repr)
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    return obj


@dataclass
class Findings:
    """Accumulating report used by the validators."""

    problems: list[dict] = field(default_factory=list)

    def add(self, kind: str, **detail: Any) -> None:
        self.problems.append({"kind": kind, **detail})

    @property
    def valid(self) -> bool:
        return not self.problems

    def kinds(self) -> set[str]:
        return {p["kind"] for p in self.problems}

    def to_dict(self) -> dict:
        return {"valid": self.valid, "problems": jsonable(self.problems)}
