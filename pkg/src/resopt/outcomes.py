"""Per-step results of a simulated or optimized operation.

``OutcomeSeries`` is the object every report, chart and benchmark is built
from: releases, deficits, hydropower, overspill and the step rewards of one
trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system import StepOutcome


@dataclass
class OutcomeSeries:
    t: np.ndarray
    s_start: np.ndarray
    s_end: np.ndarray
    r_total: np.ndarray
    user_releases: np.ndarray  # (T, 5) for users 3..7
    evap: np.ndarray
    overspill: np.ndarray
    deviations: np.ndarray  # (T, 8)
    power: np.ndarray
    reward: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.t.size)

    @classmethod
    def from_steps(cls, steps: list[StepOutcome], meta: dict | None = None) -> "OutcomeSeries":
        return cls(
            t=np.array([s.t for s in steps], dtype=int),
            s_start=np.array([s.s_start for s in steps]),
            s_end=np.array([s.s_next for s in steps]),
            r_total=np.array([s.r_total for s in steps]),
            user_releases=np.array([s.user_releases() for s in steps]),
            evap=np.array([s.evap for s in steps]),
            overspill=np.array([s.overspill for s in steps]),
            deviations=np.array([s.deviations for s in steps]),
            power=np.array([s.power for s in steps]),
            reward=np.array([s.reward for s in steps]),
            meta=dict(meta or {}),
        )

    def objective_sums(self) -> np.ndarray:
        """Total D1..D8 over the horizon (the vector dominance compares)."""
        return self.deviations.sum(axis=0)

    def total_cost(self) -> float:
        return float(self.reward.sum())

    def mass_balance_residual(self, inflows) -> float:
        """Relative closure error of the whole series; ~0 when consistent."""
        q = np.asarray(inflows, dtype=float)
        lhs = q.sum() - self.r_total.sum() - self.evap.sum() - self.overspill.sum()
        rhs = self.s_end[-1] - self.s_start[0]
        scale = max(abs(q).sum(), abs(self.s_start[0]), 1.0)
        return abs(lhs - rhs) / scale

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "s_start": self.s_start.tolist(),
            "s_end": self.s_end.tolist(),
            "r_total": self.r_total.tolist(),
            "user_releases": self.user_releases.tolist(),
            "evap": self.evap.tolist(),
            "overspill": self.overspill.tolist(),
            "deviations": self.deviations.tolist(),
            "power": self.power.tolist(),
            "reward": self.reward.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OutcomeSeries":
        return cls(
            t=np.array(data["t"], dtype=int),
            s_start=np.array(data["s_start"], dtype=float),
            s_end=np.array(data["s_end"], dtype=float),
            r_total=np.array(data["r_total"], dtype=float),
            user_releases=np.array(data["user_releases"], dtype=float),
            evap=np.array(data["evap"], dtype=float),
            overspill=np.array(data["overspill"], dtype=float),
            deviations=np.array(data["deviations"], dtype=float),
            power=np.array(data["power"], dtype=float),
            reward=np.array(data["reward"], dtype=float),
            meta=dict(data.get("meta", {})),
        )

    def equals(self, other: "OutcomeSeries") -> bool:
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.s_start, other.s_start)
            and np.array_equal(self.s_end, other.s_end)
            and np.array_equal(self.r_total, other.r_total)
            and np.array_equal(self.user_releases, other.user_releases)
            and np.array_equal(self.evap, other.evap)
            and np.array_equal(self.overspill, other.overspill)
            and np.array_equal(self.deviations, other.deviations)
            and np.array_equal(self.power, other.power)
            and np.array_equal(self.reward, other.reward)
        )

    def summary(self) -> dict:
        sums = self.objective_sums()
        return {
            "steps": len(self),
            "start_storage": float(self.s_start[0]),
            "end_storage": float(self.s_end[-1]),
            "objective_sums": [float(x) for x in sums],
            "total_cost": self.total_cost(),
            "total_overspill": float(self.overspill.sum()),
            "total_power": float(self.power.sum()),
        }


__all__ = ["OutcomeSeries"]
