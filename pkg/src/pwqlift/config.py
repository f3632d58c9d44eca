"""Global numeric tolerances, overridable through environment variables.

A single tolerance ladder is used across all modules so that region
classifications stay mutually consistent: ``feas`` for constraint residuals
and containment tests, ``interior`` for the minimal certified interior
radius of a full-dimensional set, and ``objective`` for accepted LP
objective error.  Override with ``PWQLIFT_TOL_FEAS``, ``PWQLIFT_TOL_INTERIOR``
and ``PWQLIFT_TOL_OBJECTIVE``.
"""

import os
from dataclasses import dataclass

_ENV_PREFIX = "PWQLIFT_TOL_"


@dataclass
class Tolerances:
    feas: float = 1e-9
    interior: float = 1e-7
    objective: float = 1e-8

    @classmethod
    def from_env(cls) -> "Tolerances":
        kwargs = {}
        for name in ("feas", "interior", "objective"):
            raw = os.environ.get(_ENV_PREFIX + name.upper())
            if raw is not None:
                kwargs[name] = float(raw)
        return cls(**kwargs)


TOLERANCES = Tolerances.from_env()
