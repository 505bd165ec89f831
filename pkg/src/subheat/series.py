"""Time-series and fit-record containers shared across modules."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeSeries", "AsymptoticFit"]


@dataclass
class TimeSeries:
    """Scalar values over a strictly increasing positive time grid."""

    times: np.ndarray
    values: np.ndarray
    meaning: str = "v_at_probe"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be matching 1-D arrays")
        if np.any(self.times <= 0.0) or np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be positive and strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must be finite")

    def __len__(self):
        return len(self.times)

    def interp(self, t):
        """Log-log interpolation (power-law segments); flat beyond the ends
        on the left, power-extrapolated on the right for positive data."""
        t = np.asarray(t, dtype=float)
        if np.all(self.values > 0.0):
            out = np.exp(np.interp(np.log(t), np.log(self.times),
                                   np.log(self.values)))
            # right extrapolation with the last segment's slope
            hi = t > self.times[-1]
            if np.any(hi):
                slope = (np.log(self.values[-1]) - np.log(self.values[-2])) / \
                        (np.log(self.times[-1]) - np.log(self.times[-2]))
                out = np.where(hi, self.values[-1]
                               * (t / self.times[-1]) ** slope, out)
            return out
        return np.interp(np.log(t), np.log(self.times), self.values)

    def window(self, t_lo, t_hi):
        keep = (self.times >= t_lo) & (self.times <= t_hi)
        return TimeSeries(self.times[keep], self.values[keep], self.meaning)

    def to_csv(self, path):
        data = np.column_stack([self.times, self.values])
        np.savetxt(path, data, delimiter=",", header="t,value",
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, meaning="v_at_probe"):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], meaning)


@dataclass
class AsymptoticFit:
    """Fitted long-time decay: value ~ prefactor * t^exponent * (ln t)^(-kappa)."""

    exponent: float
    log_correction_kappa: float
    prefactor: float
    window: tuple
    max_residual: float
    model: str = "pure_power"
    meta: dict = field(default_factory=dict)

    def predict(self, t):
        t = np.asarray(t, dtype=float)
        out = self.prefactor * t ** self.exponent
        if self.log_correction_kappa != 0.0:
            out = out * np.log(t) ** (-self.log_correction_kappa)
        return out

    def to_json(self):
        return json.dumps({
            "exponent": self.exponent,
            "kappa": self.log_correction_kappa,
            "prefactor": self.prefactor,
            "window": list(self.window),
            "max_residual": self.max_residual,
            "model": self.model,
            **({"meta": self.meta} if self.meta else {}),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(obj["exponent"], obj["kappa"], obj["prefactor"],
                   tuple(obj["window"]), obj["max_residual"],
                   obj.get("model", "pure_power"), obj.get("meta", {}))
