"""Verification verdicts shared by every checking module."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    check: str
    status: str
    mode: str  # "exact", "random" or "numeric"
    family: str = ""
    witness: Optional[str] = None
    seed: Optional[int] = None
    samples: Optional[int] = None
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_obj(self, with_timing: bool = True) -> dict:
        out = {"check": self.check, "family": self.family,
               "status": self.status, "mode": self.mode}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.mode == "random":
            out["seed"] = self.seed
            out["samples"] = self.samples
        if with_timing:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out


def report(check: str, ok: bool, mode: str, family: str = "",
           witness: Optional[str] = None, seed: Optional[int] = None,
           samples: Optional[int] = None, started: Optional[float] = None) -> VerificationReport:
    elapsed = (time.monotonic() - started) * 1000.0 if started is not None else 0.0
    return VerificationReport(
        check=check,
        status=PASS if ok else FAIL,
        mode=mode,
        family=family,
        witness=None if ok else witness,
        seed=seed,
        samples=samples,
        elapsed_ms=elapsed,
    )


def clip_witness(text: str, limit: int = 400) -> str:
    return text if len(text) <= limit else text[: limit - 3] + "..."
