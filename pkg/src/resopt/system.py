"""Deterministic model of the reservoir / river system.

Everything downstream of the raw data lives here: the storage-level-area
curve, mass balance with evaporation, tributary accounting, the five-plant
hydropower cascade and the eight deviation terms that every solver scores
against.

Unit conventions (used consistently across the package):

* volumes and flows per step: 10^3 m^3
* reservoir levels: m above sea level
* evaporation rates: mm/month (mm x km^2 == 10^3 m^3 exactly)
* hydropower: kWh, with turbine flows in m^3/s derived from per-step volumes
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-9

MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
_MONTH_FIRST_DAY = tuple(sum(MONTH_DAYS[:m]) for m in range(12))

PLANT_IDS = (0, 1, 2, 3, 6)


class CurveRangeError(ValueError):
    """Requested volume or level falls outside the storage curve knots."""


class SolverError(RuntimeError):
    """A solver could not complete (dead state, non-convergence, ...)."""


class PolicyGapError(RuntimeError):
    """A policy has no decision for a state visited during simulation."""


@dataclass(frozen=True)
class Infeasible:
    """Marker result for a transition that violates a hard constraint.

    Returned (not raised) so solvers can cheaply skip the transition.
    """

    reason: str


def month_of_step(t: int, steps_per_year: int) -> int:
    """Calendar month index (0=January) of the step's starting day.

    Weekly steps use 52 equal weeks of 7 days on a 365-day year; the odd
    day at year end is folded into week 52.
    """
    if steps_per_year == 12:
        return t % 12
    week = t % 52
    day = min(7 * week, 364)
    month = 11
    for m in range(11):
        if day < _MONTH_FIRST_DAY[m + 1]:
            month = m
            break
    return month


@dataclass(frozen=True)
class SystemSpec:
    """Immutable physical description of the hydro system.

    ``storage_curve`` holds (level m amsl, volume 10^6 m^3, area km^2)
    knots exactly as published; all other volumes are in 10^3 m^3.
    ``hec_max`` / ``gen`` / ``heads`` are keyed by plant id (0,1,2,3,6);
    plant 0 has a variable head against ``tailwater_level``.
    """

    storage_curve: tuple[tuple[float, float, float], ...]
    s_dead: float
    s_max: float
    h_dead: float
    h_max: float
    hec_max: dict[int, float]
    gen: dict[int, float]
    heads: dict[int, float]
    evap_rates: tuple[float, ...]
    tailwater_level: float = 990.0
    release_cap_enforced: bool = True
    steps_per_year: int = 52

    # derived interpolation arrays, set once in __post_init__
    _levels: np.ndarray = field(init=False, repr=False, compare=False)
    _volumes: np.ndarray = field(init=False, repr=False, compare=False)
    _areas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.storage_curve) < 2:
            raise ValueError("storage curve needs at least 2 knots")
        levels = np.array([k[0] for k in self.storage_curve], dtype=float)
        volumes = np.array([k[1] for k in self.storage_curve], dtype=float) * 1000.0
        areas = np.array([k[2] for k in self.storage_curve], dtype=float)
        for name, arr in (("level", levels), ("volume", volumes)):
            if np.any(np.diff(arr) <= 0):
                raise ValueError(f"storage curve {name}s must be strictly increasing")
        if np.any(np.diff(areas) < 0):
            raise ValueError("storage curve areas must be nondecreasing")
        if not self.s_dead < self.s_max:
            raise ValueError("s_dead must be below s_max")
        if not (volumes[0] <= self.s_dead and self.s_max <= volumes[-1]):
            raise ValueError("s_dead / s_max must lie inside the curve volume range")
        if not self.h_dead < self.h_max:
            raise ValueError("h_dead must be below h_max")
        if not (levels[0] <= self.h_dead and self.h_max <= levels[-1]):
            raise ValueError("h_dead / h_max must lie inside the curve level range")
        for pid in PLANT_IDS:
            if self.hec_max.get(pid, 0.0) <= 0:
                raise ValueError(f"hec_max[{pid}] must be positive")
            if self.gen.get(pid, 0.0) <= 0:
                raise ValueError(f"gen[{pid}] must be positive")
        for pid in (1, 2, 3, 6):
            if self.heads.get(pid, 0.0) <= 0:
                raise ValueError(f"heads[{pid}] must be positive")
        if len(self.evap_rates) != 12:
            raise ValueError("evap_rates must have 12 monthly values")
        if any(r < 0 for r in self.evap_rates):
            raise ValueError("evap_rates must be nonnegative")
        if self.steps_per_year not in (12, 52):
            raise ValueError("steps_per_year must be 12 or 52")
        object.__setattr__(self, "_levels", levels)
        object.__setattr__(self, "_volumes", volumes)
        object.__setattr__(self, "_areas", areas)

    # -- step calendar -------------------------------------------------

    def step_seconds(self, t: int) -> float:
        if self.steps_per_year == 12:
            return MONTH_DAYS[month_of_step(t, 12)] * 86400.0
        return 7 * 86400.0

    def step_hours(self, t: int) -> float:
        return self.step_seconds(t) / 3600.0

    def step_evap_rate(self, t: int) -> float:
        """Open-water evaporation for step t in mm."""
        month = month_of_step(t, self.steps_per_year)
        rate = self.evap_rates[month]
        if self.steps_per_year == 12:
            return rate
        return rate * 7.0 / MONTH_DAYS[month]

    def release_cap_volume(self, t: int) -> float:
        """Plant-0 turbine capacity expressed as a per-step volume."""
        return self.hec_max[0] * self.step_seconds(t) / 1000.0


# -- storage curve ------------------------------------------------------


def interpolate_curve(spec: SystemSpec, volume: float) -> tuple[float, float]:
    """Level (m amsl) and area (km^2) at a storage volume, linear between knots."""
    vmin, vmax = spec._volumes[0], spec._volumes[-1]
    if volume < vmin - EPS:
        raise CurveRangeError(f"volume {volume:g} below curve minimum {vmin:g}")
    if volume > vmax + EPS:
        raise CurveRangeError(f"volume {volume:g} above curve maximum {vmax:g}")
    v = min(max(volume, vmin), vmax)
    level = float(np.interp(v, spec._volumes, spec._levels))
    area = float(np.interp(v, spec._volumes, spec._areas))
    return level, area


def level_to_volume(spec: SystemSpec, level: float) -> float:
    """Inverse of the level leg of the storage curve."""
    lmin, lmax = spec._levels[0], spec._levels[-1]
    if level < lmin - EPS:
        raise CurveRangeError(f"level {level:g} below curve minimum {lmin:g}")
    if level > lmax + EPS:
        raise CurveRangeError(f"level {level:g} above curve maximum {lmax:g}")
    rl = min(max(level, lmin), lmax)
    return float(np.interp(rl, spec._levels, spec._volumes))


def volume_to_level(spec: SystemSpec, volume: float) -> float:
    return interpolate_curve(spec, volume)[0]


def volume_to_area(spec: SystemSpec, volume: float) -> float:
    return interpolate_curve(spec, volume)[1]


# -- records and weights -------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """One timestep of inflows, demands and critical levels.

    q/q1/q2/q3 are the four river measurement points (q at the reservoir,
    q3 the furthest downstream); d3..d7 volumetric user demands, d8 the
    hydropower target in kWh, d1/d2 the min/max critical levels in m amsl.
    """

    t: int
    q: float
    q1: float
    q2: float
    q3: float
    d3: float
    d4: float
    d5: float
    d6: float
    d7: float
    d8: float
    d1: float
    d2: float

    def check(self, spec: SystemSpec | None = None) -> None:
        for name in ("q", "q1", "q2", "q3", "d3", "d4", "d5", "d6", "d7", "d8"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative (step {self.t})")
        if self.q3 < self.q - EPS:
            raise ValueError(
                f"q3 ({self.q3:g}) below reservoir inflow q ({self.q:g}) at step {self.t}"
            )
        if not self.d1 < self.d2:
            raise ValueError(f"d1 must be below d2 (step {self.t})")
        if spec is not None:
            if self.d1 < spec.h_dead - EPS or self.d2 > spec.h_max + EPS:
                raise ValueError(
                    f"critical levels outside [h_dead, h_max] (step {self.t})"
                )

    def demands(self) -> np.ndarray:
        return np.array([self.d3, self.d4, self.d5, self.d6, self.d7])


@dataclass(frozen=True)
class WeightVector:
    """The eight objective weights of one scalarization."""

    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float
    w7: float
    w8: float

    def __post_init__(self):
        arr = self.as_array()
        if np.any(arr < 0):
            raise ValueError("weights must be nonnegative")
        if not np.any(arr > 0):
            raise ValueError("at least one weight must be positive")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.w1, self.w2, self.w3, self.w4, self.w5, self.w6, self.w7, self.w8]
        )

    def user_weights(self) -> np.ndarray:
        return np.array([self.w3, self.w4, self.w5, self.w6, self.w7])

    @classmethod
    def from_sequence(cls, values) -> "WeightVector":
        vals = list(values)
        if len(vals) != 8:
            raise ValueError("a weight vector has exactly 8 components")
        return cls(*[float(v) for v in vals])


@dataclass(frozen=True)
class StepOutcome:
    """Everything one executed transition produced."""

    t: int
    s_start: float
    s_next: float
    r_total: float
    r3: float
    r4: float
    r5: float
    r6: float
    r7: float
    evap: float
    overspill: float
    deviations: tuple[float, ...]  # D1..D8
    power: float
    plant_power: dict[int, float]
    reward: float

    def user_releases(self) -> np.ndarray:
        return np.array([self.r3, self.r4, self.r5, self.r6, self.r7])


# -- elementary operations ------------------------------------------------


def tributary_inflow(rec: StepRecord) -> float:
    """Uncontrolled inflow entering below the dam: q3 - q."""
    if rec.q3 < rec.q - EPS:
        raise ValueError(
            f"q3 ({rec.q3:g}) below reservoir inflow q ({rec.q:g}) at step {rec.t}"
        )
    return max(rec.q3 - rec.q, 0.0)


def evaporation(spec: SystemSpec, s_t: float, s_next: float, t: int) -> float:
    """Open-water loss over the step: rate x mean of start/end surface areas."""
    a0 = volume_to_area(spec, s_t)
    a1 = volume_to_area(spec, s_next)
    return spec.step_evap_rate(t) * (a0 + a1) / 2.0


def hydropower(
    spec: SystemSpec,
    rec: StepRecord,
    r_total: float,
    r3: float,
    r4: float,
    r7: float,
    h_t: float,
    h_next: float,
) -> tuple[float, dict[int, float]]:
    """Energy produced by the five-plant cascade over the step.

    Plant 0 turbines the reservoir release under the live head against the
    tailwater; plants 1..3 reuse the routed flow, gaining lateral inflow
    between measurement points and losing the upstream user intakes; plant 6
    sits on the town intake. Negative intermediate flows clamp to zero and
    every plant is capped at its maximum turbine flow.
    """
    seconds = spec.step_seconds(rec.t)
    hours = spec.step_hours(rec.t)

    def flow(volume: float) -> float:
        return volume * 1000.0 / seconds

    q0 = min(flow(r_total), spec.hec_max[0])
    head0 = (h_t + h_next) / 2.0 - spec.tailwater_level
    e0 = spec.gen[0] * q0 * max(head0, 0.0) * hours

    q1p = max(min(q0 - flow(r7), spec.hec_max[1]), 0.0)
    e1 = spec.gen[1] * q1p * spec.heads[1] * hours

    q2p = max(min(q1p + flow(rec.q1 - rec.q) - flow(r3), spec.hec_max[2]), 0.0)
    e2 = spec.gen[2] * q2p * spec.heads[2] * hours

    q3p = max(min(q2p + flow(rec.q2 - rec.q1) - flow(r4), spec.hec_max[3]), 0.0)
    e3 = spec.gen[3] * q3p * spec.heads[3] * hours

    q6p = max(min(flow(r3), spec.hec_max[6]), 0.0)
    e6 = spec.gen[6] * q6p * spec.heads[6] * hours

    plants = {0: e0, 1: e1, 2: e2, 3: e3, 6: e6}
    return sum(plants.values()), plants


def deviations(
    rec: StepRecord,
    h_t: float,
    user_releases: np.ndarray,
    power: float,
) -> np.ndarray:
    """D1..D8: level violations at the step's starting level, user deficits
    against total deliveries, and the hydropower shortfall."""
    d = np.empty(8)
    d[0] = max(rec.d1 - h_t, 0.0)
    d[1] = max(h_t - rec.d2, 0.0)
    dem = rec.demands()
    d[2:7] = np.maximum(dem - user_releases, 0.0)
    d[7] = max(rec.d8 - power, 0.0)
    return d


def step_reward(weights: WeightVector, devs) -> float:
    """Scalar step cost: weighted sum of squared deviations."""
    d = np.asarray(devs, dtype=float)
    return float(np.dot(weights.as_array(), d * d))


def transition(
    spec: SystemSpec,
    rec: StepRecord,
    s_t: float,
    s_next_target: float,
    weights: WeightVector,
    formulation: str = "linear",
    nu: int = 50,
    include_hydropower: bool = True,
) -> StepOutcome | Infeasible:
    """Evaluate one candidate storage transition.

    The release follows from mass balance; the tributary inflow is allocated
    to the users first and the release then covers the residual demands.
    A negative implied release, or one beyond the plant-0 capacity when the
    cap is enforced, yields an :class:`Infeasible` marker instead of an
    outcome, so enumerating solvers can drop the transition.
    """
    from .allocation import AllocationProblem, allocate

    evap = evaporation(spec, s_t, s_next_target, rec.t)
    r_total = s_t + rec.q - s_next_target - evap
    if r_total < -EPS:
        return Infeasible(
            f"release would be negative ({r_total:g}) for target {s_next_target:g}"
        )
    r_total = max(r_total, 0.0)
    if spec.release_cap_enforced:
        cap = spec.release_cap_volume(rec.t)
        if r_total > cap + EPS:
            return Infeasible(
                f"release {r_total:g} exceeds plant-0 capacity volume {cap:g}"
            )

    q_tr = tributary_inflow(rec)
    dem = rec.demands()
    uw = weights.user_weights()
    trib = allocate(AllocationProblem(q_tr, tuple(dem), tuple(uw), formulation, nu))
    residual = np.maximum(dem - trib, 0.0)
    res = allocate(
        AllocationProblem(r_total, tuple(residual), tuple(uw), formulation, nu)
    )
    releases = trib + res

    h_t = volume_to_level(spec, s_t)
    h_next = volume_to_level(spec, s_next_target)
    if include_hydropower:
        power, plants = hydropower(
            spec, rec, r_total, releases[0], releases[1], releases[4], h_t, h_next
        )
    else:
        power, plants = 0.0, {pid: 0.0 for pid in PLANT_IDS}

    devs = deviations(rec, h_t, releases, power)
    if not include_hydropower:
        devs[7] = 0.0
    g = step_reward(weights, devs)
    return StepOutcome(
        t=rec.t,
        s_start=s_t,
        s_next=s_next_target,
        r_total=r_total,
        r3=releases[0],
        r4=releases[1],
        r5=releases[2],
        r6=releases[3],
        r7=releases[4],
        evap=evap,
        overspill=0.0,
        deviations=tuple(devs),
        power=power,
        plant_power=plants,
        reward=g,
    )


def apply_decision(
    spec: SystemSpec,
    rec: StepRecord,
    s_t: float,
    s_next_target: float,
    weights: WeightVector,
    formulation: str = "linear",
    nu: int = 50,
    include_hydropower: bool = True,
) -> StepOutcome:
    """Execute a policy decision, clamping to what the water allows.

    Unlike :func:`transition` this never fails: an over-ambitious release is
    reduced to zero (or the cap), storage forced above the maximum spills,
    and water spilled this way bypasses every turbine and intake. Mass
    balance closes exactly in all branches.
    """
    from .allocation import AllocationProblem, allocate

    evap = evaporation(spec, s_t, s_next_target, rec.t)
    r_total = max(s_t + rec.q - s_next_target - evap, 0.0)
    if spec.release_cap_enforced:
        r_total = min(r_total, spec.release_cap_volume(rec.t))
    s_after = s_t + rec.q - r_total - evap
    if s_after < 0.0:
        # evaporation cannot consume more water than is present
        evap = s_t + rec.q - r_total
        s_after = 0.0
    overspill = max(s_after - spec.s_max, 0.0)
    s_next = s_after - overspill

    q_tr = tributary_inflow(rec)
    dem = rec.demands()
    uw = weights.user_weights()
    trib = allocate(AllocationProblem(q_tr, tuple(dem), tuple(uw), formulation, nu))
    residual = np.maximum(dem - trib, 0.0)
    res = allocate(
        AllocationProblem(r_total, tuple(residual), tuple(uw), formulation, nu)
    )
    releases = trib + res

    h_t = volume_to_level(spec, s_t)
    h_next = volume_to_level(spec, s_next)
    if include_hydropower:
        power, plants = hydropower(
            spec, rec, r_total, releases[0], releases[1], releases[4], h_t, h_next
        )
    else:
        power, plants = 0.0, {pid: 0.0 for pid in PLANT_IDS}

    devs = deviations(rec, h_t, releases, power)
    if not include_hydropower:
        devs[7] = 0.0
    g = step_reward(weights, devs)
    return StepOutcome(
        t=rec.t,
        s_start=s_t,
        s_next=s_next,
        r_total=r_total,
        r3=releases[0],
        r4=releases[1],
        r5=releases[2],
        r6=releases[3],
        r7=releases[4],
        evap=evap,
        overspill=overspill,
        deviations=tuple(devs),
        power=power,
        plant_power=plants,
        reward=g,
    )


def tributary_balance_note(records) -> str | None:
    """Sanity note when the tributary total is within 10% of the reservoir
    inflow total, which the source basin roughly exhibits."""
    total_q = sum(r.q for r in records)
    total_tr = sum(tributary_inflow(r) for r in records)
    if total_q <= 0:
        return None
    if abs(total_tr - total_q) <= 0.1 * total_q:
        return (
            f"tributary inflow total ({total_tr:.0f}) is within 10% of the "
            f"reservoir inflow total ({total_q:.0f})"
        )
    return None


__all__ = [
    "CurveRangeError",
    "SolverError",
    "PolicyGapError",
    "Infeasible",
    "SystemSpec",
    "StepRecord",
    "WeightVector",
    "StepOutcome",
    "month_of_step",
    "interpolate_curve",
    "level_to_volume",
    "volume_to_level",
    "volume_to_area",
    "tributary_inflow",
    "evaporation",
    "hydropower",
    "deviations",
    "step_reward",
    "transition",
    "apply_decision",
    "tributary_balance_note",
    "MONTH_DAYS",
    "PLANT_IDS",
    "EPS",
]
