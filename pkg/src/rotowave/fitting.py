"""Sweep records and log-log slope fits."""

from dataclasses import dataclass, field

import numpy as np


class DegenerateFit(ValueError):
    pass


@dataclass
class SweepRecord:
    """One measured datum of a parameter sweep."""

    param: str
    value: float
    measured: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.measured) or self.measured < 0:
            raise ValueError(f"measured value must be finite and nonnegative, got {self.measured}")


def loglog_fit(x, y):
    """Least-squares ``log y = slope * log x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(good) < 2 or np.ptp(np.log(x[good])) == 0:
        raise DegenerateFit("need at least two positive, distinct points")
    slope, intercept = np.polyfit(np.log(x[good]), np.log(y[good]), 1)
    return float(slope), float(intercept)


def is_geometric(values, rtol=1e-9):
    values = np.asarray(values, dtype=float)
    if values.size < 2 or np.any(values <= 0):
        return False
    ratios = values[1:] / values[:-1]
    return bool(np.allclose(ratios, ratios[0], rtol=rtol))
