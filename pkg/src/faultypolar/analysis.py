"""Analytic sweeps over rate, blocklength, and protection grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .construction import (
    DEFAULT_MAX_EXPONENT,
    CodeConstruction,
    evolve_all,
    pe_counts,
    rate_loss,
)
from .core import FaultSpec

DEFAULT_RATE_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class SweepResult:
    """One abscissa plus named ordinate series and the generating parameters."""

    axis: np.ndarray
    series: dict[str, np.ndarray]
    metadata: dict

    def __post_init__(self):
        axis = np.asarray(self.axis)
        object.__setattr__(self, "axis", axis)
        for name, values in self.series.items():
            arr = np.asarray(values)
            if arr.shape != axis.shape:
                raise ValueError(f"series {name!r} does not match the axis length")
            self.series[name] = arr


def fer_proxy(code: CodeConstruction) -> float:
    """Sum of Z_i over the information set, an FER proxy.

    The raw sum can exceed 1 at high rates; clamp with min(value, 1) for
    plotting.
    """
    info0 = code.info_indices - 1
    return float(code.reliabilities[info0].sum())


def _rate_points(z: np.ndarray, rates) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k, realized rate, and proxy value for each requested rate.

    Codes at every rate share one reliability vector: the proxy at rate
    k/N is the prefix sum of the ascending-sorted Z values.
    """
    size = z.size
    prefix = np.cumsum(np.sort(z, kind="stable"))
    ks = np.empty(len(rates), dtype=np.int64)
    for idx, rate in enumerate(rates):
        k = round(rate * size)
        if not 0 < k < size:
            raise ValueError(f"rate {rate} gives k={k}, outside 1..{size - 1}")
        ks[idx] = k
    return ks, ks / size, prefix[ks - 1]


def fer_vs_rate_sweep(n: int, p: float, fault: FaultSpec, rates=None,
                      max_exponent: int = DEFAULT_MAX_EXPONENT) -> SweepResult:
    """FER proxy across a rate grid for one blocklength and fault spec."""
    rates = DEFAULT_RATE_GRID if rates is None else tuple(rates)
    z = evolve_all(n, p, fault, max_exponent=max_exponent)
    ks, realized, proxy = _rate_points(z, rates)
    return SweepResult(
        axis=np.asarray(rates, dtype=np.float64),
        series={
            "k": ks,
            "realized_rate": realized,
            "proxy_raw": proxy,
            "proxy_clamped": np.minimum(proxy, 1.0),
        },
        metadata={"n": n, "p": p, "delta": fault.delta,
                  "unprotected_steps": fault.unprotected_steps},
    )


def staircase(n: int, p: float, fault: FaultSpec,
              max_exponent: int = DEFAULT_MAX_EXPONENT) -> SweepResult:
    """Ascending-sorted reliability values against the index fraction i/N."""
    z = evolve_all(n, p, fault, max_exponent=max_exponent)
    size = z.size
    return SweepResult(
        axis=np.arange(1, size + 1, dtype=np.float64) / size,
        series={"z": np.sort(z, kind="stable")},
        metadata={"n": n, "p": p, "delta": fault.delta,
                  "unprotected_steps": fault.unprotected_steps},
    )


def protection_sweep(n: int, p: float, delta: float, n_p_values, rates=None,
                     max_exponent: int = DEFAULT_MAX_EXPONENT) -> SweepResult:
    """One FER-proxy-vs-rate series per protected level count n_p.

    Each n_p maps to n_u = (n + 1) - n_p unprotected transitions; the
    metadata records the protected PE fraction for each series.
    """
    rates = DEFAULT_RATE_GRID if rates is None else tuple(rates)
    n_p_values = tuple(n_p_values)
    if not n_p_values:
        raise ValueError("n_p_values must not be empty")
    series: dict[str, np.ndarray] = {}
    fractions = {}
    ks = realized = None
    for n_p in n_p_values:
        fault = FaultSpec.from_protected_levels(n, n_p, delta)
        z = evolve_all(n, p, fault, max_exponent=max_exponent)
        ks, realized, proxy = _rate_points(z, rates)
        series[f"proxy_raw_np{n_p}"] = proxy
        series[f"proxy_clamped_np{n_p}"] = np.minimum(proxy, 1.0)
        fractions[int(n_p)] = pe_counts(n, n_p).fraction
    series = {"k": ks, "realized_rate": realized, **series}
    return SweepResult(
        axis=np.asarray(rates, dtype=np.float64),
        series=series,
        metadata={"n": n, "p": p, "delta": delta,
                  "n_p_values": tuple(int(v) for v in n_p_values),
                  "protected_fraction": fractions},
    )


def rate_loss_sweep(p: float, deltas, n_u_values) -> SweepResult:
    """Rate loss against the unprotected transition count, one series per delta.

    Emits the raw loss and the percentage-of-capacity view used alongside
    capacity C = 1 - p.
    """
    n_u_arr = np.asarray(list(n_u_values), dtype=np.int64)
    capacity = 1.0 - p
    if capacity <= 0.0:
        raise ValueError("p must be below 1 so the capacity view is defined")
    series: dict[str, np.ndarray] = {}
    for delta in deltas:
        losses = np.array([rate_loss(p, delta, int(nu)) for nu in n_u_arr])
        series[f"delta_r_{delta:g}"] = losses
        series[f"pct_capacity_{delta:g}"] = 100.0 * losses / capacity
    return SweepResult(
        axis=n_u_arr,
        series=series,
        metadata={"p": p, "deltas": tuple(float(d) for d in deltas),
                  "n_u_values": tuple(int(v) for v in n_u_arr)},
    )
