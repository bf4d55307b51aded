"""Bundled system description, seeded synthetic datasets and small test
systems.

The default system profile carries the published reservoir curve,
evaporation rates and hydropower constants of the studied basin; the
synthetic generator produces cyclostationary lognormal inflows and a
seasonal demand year shaped like that system's, so solver experiments run
end-to-end without the (unpublished) historical series.
"""

from __future__ import annotations

import numpy as np

from .system import StepRecord, SystemSpec, WeightVector

# Published storage curve knots (level m amsl, volume 10^6 m^3, area km^2),
# extended to the spillway level so the operating range stays inside the
# curve; the last area extrapolates the final published segment.
KNEZEVO_CURVE = (
    (990.0, 0.00, 0.00),
    (1000.0, 0.26, 0.05),
    (1008.0, 1.00, 0.13),
    (1020.0, 3.21, 0.23),
    (1030.0, 6.10, 0.34),
    (1040.0, 10.12, 0.46),
    (1050.0, 15.37, 0.59),
    (1060.0, 22.01, 0.74),
    (1061.5, 23.50, 0.774),
)

MONTHLY_EVAPORATION_MM = (6.3, 9.1, 17.8, 27.5, 38.3, 46.8, 53.2, 47.7, 33.4, 19.8, 9.9, 6.1)

HEC_MAX_FLOW = {0: 1.5, 1: 1.5, 2: 2.1, 3: 1.8, 6: 0.14}
HEC_GENERATION = {0: 8.0, 1: 8.0, 2: 8.35, 3: 8.35, 6: 8.35}
HEC_FIXED_HEADS = {1: 170.0, 2: 200.0, 3: 140.0, 6: 200.0}

MIN_CRITICAL_LEVEL = 1021.5
MAX_CRITICAL_LEVEL = 1060.0

# Level weights act on metres, user weights on 10^3 m^3; the hydropower
# weight is scaled for kWh deficits (the published shape weighs MWh).
DEFAULT_WEIGHTS = WeightVector(2_000_000, 2_000_000, 200, 1, 200, 1, 300, 1e-8)


def zletovica_system(
    steps_per_year: int = 52, release_cap_enforced: bool = True
) -> SystemSpec:
    """The bundled single-reservoir system profile."""
    return SystemSpec(
        storage_curve=KNEZEVO_CURVE,
        s_dead=1500.0,
        s_max=23500.0,
        h_dead=1015.0,
        h_max=1061.5,
        hec_max=dict(HEC_MAX_FLOW),
        gen=dict(HEC_GENERATION),
        heads=dict(HEC_FIXED_HEADS),
        evap_rates=MONTHLY_EVAPORATION_MM,
        release_cap_enforced=release_cap_enforced,
        steps_per_year=steps_per_year,
    )


def _seasonal_bump(t: np.ndarray, centre: float, width: float) -> np.ndarray:
    return np.exp(-(((t - centre) / width) ** 2))


def synthetic_inflows(
    years: int, seed: int, steps_per_year: int = 52
) -> dict[str, np.ndarray]:
    """Cyclostationary lognormal inflows at the four measurement points.

    Reservoir inflow peaks with snowmelt in spring and again (weakly) in
    late autumn; the tributary total tracks the reservoir inflow so that
    the two balance over the series, and accumulates monotonically along
    the river (q <= q1 <= q2 <= q3).
    """
    if years < 1:
        raise ValueError("need at least one year")
    rng = np.random.default_rng(seed)
    T = steps_per_year
    w = np.arange(T, dtype=float) * (52.0 / T)
    mean_q = 120.0 + 950.0 * _seasonal_bump(w, 12.0, 5.0) + 180.0 * _seasonal_bump(w, 44.0, 6.0)
    mean_ratio = 0.8 + 0.5 * _seasonal_bump(w, 14.0, 8.0)

    q = np.empty(years * T)
    q_tr = np.empty(years * T)
    for y in range(years):
        # year-scale wetness spans deep droughts to wet years, which is what
        # separates policies that anticipate carryover storage from ones
        # that do not
        wet = float(rng.lognormal(mean=-0.1, sigma=0.55))
        noise_q = rng.lognormal(mean=0.0, sigma=0.40, size=T)
        # the tributary tracks the reservoir inflow only loosely, so policies
        # that model it as its own variable have something to gain
        noise_r = rng.lognormal(mean=0.0, sigma=0.55, size=T)
        q[y * T : (y + 1) * T] = np.maximum(mean_q * wet * noise_q, 25.0)
        q_tr[y * T : (y + 1) * T] = np.maximum(
            q[y * T : (y + 1) * T] * mean_ratio * noise_r, 10.0
        )
    q1 = q + 0.35 * q_tr
    q2 = q + 0.70 * q_tr
    q3 = q + q_tr
    return {"q": q, "q1": q1, "q2": q2, "q3": q3}


def synthetic_demand_year(steps_per_year: int = 52) -> list[dict]:
    """One demand year: constant town supplies and ecological flow,
    bell-shaped summer irrigation, a flat hydropower target."""
    T = steps_per_year
    w = np.arange(T, dtype=float) * (52.0 / T)
    irrigation = _seasonal_bump(w, 29.0, 7.5)
    rows = []
    for t in range(T):
        rows.append(
            {
                "step_of_year": t + 1,
                "d1_level": MIN_CRITICAL_LEVEL,
                "d2_level": MAX_CRITICAL_LEVEL,
                "d3": 75.0,
                "d4": round(170.0 * float(irrigation[t]), 3),
                "d5": 318.0,
                "d6": round(270.0 * float(irrigation[t]), 3),
                "d7": 60.48,
                "d8": 600_000.0,
            }
        )
    return rows


def synthetic_series(
    years: int, seed: int, steps_per_year: int = 52
) -> list[StepRecord]:
    """Full synthetic series: generated inflows with the demand year tiled."""
    flows = synthetic_inflows(years, seed, steps_per_year)
    demands = synthetic_demand_year(steps_per_year)
    records = []
    for t in range(years * steps_per_year):
        d = demands[t % steps_per_year]
        records.append(
            StepRecord(
                t=t,
                q=float(flows["q"][t]),
                q1=float(flows["q1"][t]),
                q2=float(flows["q2"][t]),
                q3=float(flows["q3"][t]),
                d3=d["d3"],
                d4=d["d4"],
                d5=d["d5"],
                d6=d["d6"],
                d7=d["d7"],
                d8=d["d8"],
                d1=d["d1_level"],
                d2=d["d2_level"],
            )
        )
    return records


# -- small systems for tests and demos ------------------------------------


def toy_system(steps_per_year: int = 12) -> SystemSpec:
    """A small reservoir whose whole grid stays feasible: generous turbine
    capacity, no release cap, gentle evaporation."""
    return SystemSpec(
        storage_curve=(
            (100.0, 0.0, 0.00),
            (102.0, 1.0, 0.10),
            (104.0, 2.0, 0.20),
            (106.0, 3.0, 0.30),
            (108.0, 4.0, 0.40),
            (110.0, 5.0, 0.50),
        ),
        s_dead=500.0,
        s_max=4500.0,
        h_dead=101.0,
        h_max=109.0,
        hec_max={0: 5.0, 1: 5.0, 2: 5.0, 3: 5.0, 6: 0.5},
        gen=dict(HEC_GENERATION),
        heads=dict(HEC_FIXED_HEADS),
        evap_rates=(5.0, 5.0, 6.0, 8.0, 10.0, 12.0, 14.0, 12.0, 9.0, 7.0, 5.0, 5.0),
        tailwater_level=100.0,
        release_cap_enforced=False,
        steps_per_year=steps_per_year,
    )


def toy_series(
    T: int = 8,
    q_pattern=None,
    d3: float = 120.0,
    d4: float = 200.0,
    d8: float = 0.0,
    d1_level: float = 101.0,
    d2_level: float = 109.0,
    tributary_ratio: float = 0.5,
) -> list[StepRecord]:
    """Two-user toy horizon: seasonal inflow against two demands."""
    if q_pattern is None:
        q_pattern = [600.0, 800.0, 500.0, 250.0, 120.0, 90.0, 150.0, 400.0][:T]
        while len(q_pattern) < T:
            q_pattern.append(300.0)
    records = []
    for t in range(T):
        q = float(q_pattern[t])
        q_tr = tributary_ratio * q
        records.append(
            StepRecord(
                t=t,
                q=q,
                q1=q + 0.4 * q_tr,
                q2=q + 0.7 * q_tr,
                q3=q + q_tr,
                d3=d3,
                d4=d4,
                d5=0.0,
                d6=0.0,
                d7=0.0,
                d8=d8,
                d1=d1_level,
                d2=d2_level,
            )
        )
    return records


TOY_WEIGHTS = WeightVector(50.0, 50.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0)


def toy_year_series(seed: int = 0, amplitude: float = 1.0) -> list[StepRecord]:
    """One deterministic 52-week year on the toy system (for the learning
    experiments): smooth seasonal inflow against steady demands."""
    T = 52
    w = np.arange(T, dtype=float)
    q = 180.0 + amplitude * (
        320.0 * _seasonal_bump(w, 12.0, 6.0) + 90.0 * _seasonal_bump(w, 44.0, 5.0)
    )
    if seed:
        rng = np.random.default_rng(seed)
        q = q * rng.lognormal(0.0, 0.15, size=T)
    records = []
    irrigation = _seasonal_bump(w, 29.0, 8.0)
    for t in range(T):
        qt = float(q[t])
        q_tr = 0.6 * qt
        records.append(
            StepRecord(
                t=t,
                q=qt,
                q1=qt + 0.4 * q_tr,
                q2=qt + 0.7 * q_tr,
                q3=qt + q_tr,
                d3=60.0,
                d4=round(180.0 * float(irrigation[t]), 3),
                d5=40.0,
                d6=0.0,
                d7=10.0,
                d8=0.0,
                d1=101.0,
                d2=109.0,
            )
        )
    return records


__all__ = [
    "KNEZEVO_CURVE",
    "MONTHLY_EVAPORATION_MM",
    "HEC_MAX_FLOW",
    "HEC_GENERATION",
    "HEC_FIXED_HEADS",
    "MIN_CRITICAL_LEVEL",
    "MAX_CRITICAL_LEVEL",
    "DEFAULT_WEIGHTS",
    "TOY_WEIGHTS",
    "zletovica_system",
    "synthetic_inflows",
    "synthetic_demand_year",
    "synthetic_series",
    "toy_system",
    "toy_series",
    "toy_year_series",
]
