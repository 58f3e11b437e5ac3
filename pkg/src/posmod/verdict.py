"""Verdicts: exact answers relative to a bound, with certificates."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Kind(Enum):
    HOLDS = "HOLDS"
    HOLDS_WITHIN = "HOLDS_WITHIN"
    FAILS = "FAILS"
    REFUTED = "REFUTED"
    NOT_REFUTED_UP_TO = "NOT_REFUTED_UP_TO"
    NOT_FOUND_WITHIN = "NOT_FOUND_WITHIN"


_POSITIVE = {Kind.HOLDS, Kind.HOLDS_WITHIN, Kind.NOT_REFUTED_UP_TO}
_BOUNDED = {Kind.HOLDS_WITHIN, Kind.NOT_REFUTED_UP_TO, Kind.NOT_FOUND_WITHIN}

CAVEAT = ("within-universe answer: quantifies over models of size <= {n} only; "
          "larger models may change it")


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    bound: int | None = None
    witness: object = None

    def __post_init__(self):
        if self.kind in _BOUNDED and self.bound is None:
            raise ValueError(f"{self.kind.value} needs a bound")
        if self.kind in (Kind.FAILS, Kind.REFUTED) and self.witness is None:
            raise ValueError(f"{self.kind.value} needs a certificate")

    def __bool__(self):
        return self.kind in _POSITIVE

    @property
    def holds(self):
        return bool(self)

    def describe(self):
        if self.kind in _BOUNDED:
            return f"{self.kind.value}({self.bound})"
        return self.kind.value

    def caveat(self):
        if self.kind in _BOUNDED:
            return CAVEAT.format(n=self.bound)
        return None


def holds(bound=None, witness=None):
    if bound is None:
        return Verdict(Kind.HOLDS, None, witness)
    return Verdict(Kind.HOLDS_WITHIN, bound, witness)


def fails(witness, bound=None):
    return Verdict(Kind.FAILS, bound, witness)
