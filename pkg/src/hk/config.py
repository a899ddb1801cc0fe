"""Engine configuration.

All tunable constants live here so that reports can echo the exact
configuration that produced them.  Everything is deterministic under a
fixed seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict
from fractions import Fraction

DEFAULT_SEED = 0

# Sampling used for equiregularity evidence and point classification.
SAMPLE_COUNT = 32
SAMPLE_BOX_RADIUS = Fraction(1)
SAMPLE_DENOMINATOR = 64

# Flag iteration guard.
MAX_FLAG_STEP = 16

# Holonomy enumeration.
STABILITY_MARGIN = 2

# Positive-definite search.
PD_RESTART_BUDGET = 64
PD_LAMBDA_MIN_TOL = 1e-7
RATIONALIZE_DENOMINATOR_LIMIT = 10 ** 6

# Numeric transport oracle.
ORACLE_MIN_STEPS_PER_LOOP = 64
ORACLE_DEFAULT_EPS = 0.125
ORACLE_RANK_RTOL = 1e-8
ORACLE_CONSISTENCY_RTOL = 1e-4


def worker_count() -> int:
    """Worker cap for the few embarrassingly parallel numeric jobs.

    Controlled by the HK_THREADS environment variable; defaults to 1.
    Exact symbolic code ignores this (it is GIL-bound anyway).
    """
    raw = os.environ.get("HK_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


@dataclass(frozen=True)
class EngineConfig:
    """Bundle of knobs echoed into every JSON report."""

    seed: int = DEFAULT_SEED
    sample_count: int = SAMPLE_COUNT
    sample_box_radius: Fraction = SAMPLE_BOX_RADIUS
    max_flag_step: int = MAX_FLAG_STEP
    stability_margin: int = STABILITY_MARGIN
    depth_bound: int | None = None
    pd_restart_budget: int = PD_RESTART_BUDGET
    oracle_eps: float = ORACLE_DEFAULT_EPS
    oracle_steps_per_loop: int = ORACLE_MIN_STEPS_PER_LOOP
    threads: int = field(default_factory=worker_count)

    def to_jsonable(self) -> dict:
        data = asdict(self)
        data["sample_box_radius"] = str(self.sample_box_radius)
        return data
