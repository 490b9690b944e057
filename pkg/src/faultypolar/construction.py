"""Code construction by density evolution under a faulty decoder.

The recursion pairs a parent erasure probability e with children
(t_minus(e), t_plus(e)), so channel index 1 is the all-check (least
reliable) path and index N the all-variable (most reliable) one. Transform
steps are counted from the leaf (channel) side: step j of an index path is
faulty when j < min(n_u, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    FaultSpec,
    mean_step,
    t_minus,
    t_minus_faulty,
    t_plus,
    t_plus_faulty,
)
from .errors import ResourceLimitError

CHECK = "check"
VARIABLE = "variable"

# Largest exponent evolve_all accepts by default (N = 2**24 doubles ~ 134 MB
# at the widest level).
DEFAULT_MAX_EXPONENT = 24

# Largest path count expected_epsilon enumerates before switching to the
# closed form.
DEFAULT_ENUMERATION_CAP = 20


@dataclass(frozen=True)
class IndexPath:
    """Transform sequence of one synthesized channel.

    bits[j] selects the j-th transform applied to the channel erasure
    probability, leaf side first: 0 = check node, 1 = variable node.
    """

    index: int
    bits: tuple[int, ...]

    @property
    def transforms(self) -> tuple[str, ...]:
        return tuple(VARIABLE if b else CHECK for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def index_to_path(i: int, n: int) -> IndexPath:
    """Return the transform sequence whose evolution yields Z_i.

    Channel indices are 1-based; the bits are the n-digit binary expansion
    of i - 1, most significant digit first.
    """
    if n < 0:
        raise ValueError(f"exponent n must be nonnegative, got {n}")
    if not 1 <= i <= 2**n:
        raise ValueError(f"index must lie in 1..{2**n}, got {i}")
    bits = tuple((i - 1 >> (n - 1 - j)) & 1 for j in range(n))
    return IndexPath(index=i, bits=bits)


def evolve_path(path: IndexPath | tuple[int, ...], p: float, fault: FaultSpec) -> float:
    """Evolve the channel erasure probability p through one index path."""
    bits = path.bits if isinstance(path, IndexPath) else tuple(path)
    n = len(bits)
    faulty_steps = fault.effective_steps(n)
    eps = p
    for j, b in enumerate(bits):
        if j < faulty_steps:
            eps = t_plus_faulty(eps, fault.delta) if b else t_minus_faulty(eps, fault.delta)
        else:
            eps = t_plus(eps) if b else t_minus(eps)
    return float(eps)


def evolve_all(n: int, p: float, fault: FaultSpec,
               max_exponent: int = DEFAULT_MAX_EXPONENT) -> np.ndarray:
    """Compute all N = 2**n reliability values Z_1..Z_N.

    Levelwise recursion: O(N) space and O(N) transfer-function
    applications. Element i - 1 of the result equals
    evolve_path(index_to_path(i, n), p, fault) bit for bit.

    Raises
    ------
    ResourceLimitError
        If n exceeds max_exponent.
    """
    if n < 0:
        raise ValueError(f"exponent n must be nonnegative, got {n}")
    if n > max_exponent:
        raise ResourceLimitError(
            f"n={n} exceeds the memory budget (max exponent {max_exponent})"
        )
    faulty_steps = fault.effective_steps(n)
    z = np.array([p], dtype=np.float64)
    for j in range(n):
        nxt = np.empty(2 * z.size, dtype=np.float64)
        if j < faulty_steps:
            nxt[0::2] = t_minus_faulty(z, fault.delta)
            nxt[1::2] = t_plus_faulty(z, fault.delta)
        else:
            nxt[0::2] = t_minus(z)
            nxt[1::2] = t_plus(z)
        z = nxt
    return z


def design_code(reliabilities, k: int) -> tuple[frozenset[int], frozenset[int]]:
    """Choose the k most reliable channels as the information set.

    Returns (info_set, frozen_set) as 1-based index sets. Ties between equal
    reliability values break toward the smaller index.
    """
    z = np.asarray(reliabilities, dtype=np.float64)
    n_total = z.size
    if not 0 < k < n_total:
        raise ValueError(f"k must lie in 1..{n_total - 1}, got {k}")
    order = np.argsort(z, kind="stable")
    info = frozenset(int(i) + 1 for i in order[:k])
    frozen = frozenset(range(1, n_total + 1)) - info
    return info, frozen


def expected_epsilon(p: float, delta: float, steps: int, method: str = "auto",
                     enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Mean erasure probability after `steps` all-faulty transitions.

    The uniform average over all 2**steps transform sequences equals the
    closed form 1 - (1 - p)*(1 - delta)**steps because the per-step mean is
    affine in eps.

    method "enumerate" averages over all paths and raises
    ResourceLimitError above enumeration_cap; "closed-form" evaluates the
    formula; "auto" enumerates when feasible and otherwise falls back to
    the closed form (the fallback is exact, not an approximation).
    """
    if steps < 0:
        raise ValueError(f"steps must be nonnegative, got {steps}")
    if method not in ("auto", "enumerate", "closed-form"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "enumerate" if steps <= enumeration_cap else "closed-form"
    if method == "closed-form":
        _ = mean_step(p, delta)  # range checks
        return float(1.0 - (1.0 - p) * (1.0 - delta) ** steps)
    if steps > enumeration_cap:
        raise ResourceLimitError(
            f"enumeration over 2**{steps} paths exceeds the cap 2**{enumeration_cap}"
        )
    fault = FaultSpec(delta=delta, unprotected_steps=None)
    return float(np.mean(evolve_all(steps, p, fault, max_exponent=enumeration_cap)))


def rate_loss(p: float, delta: float, n_u: int, method: str = "auto") -> float:
    """Capacity lost to n_u unprotected transitions: E[eps_{n_u}] - p.

    Nonnegative; a percentage-of-capacity view is rate_loss/(1 - p)*100.
    """
    value = expected_epsilon(p, delta, n_u, method=method) - p
    # Enumeration can leave a negative rounding residue at delta = 0.
    return max(value, 0.0)


class PECounts(NamedTuple):
    total: int
    protected: int
    fraction: float


def pe_counts(n: int, n_p: int) -> PECounts:
    """Processing-element totals for a depth-n decoder tree.

    The tree has 2**(n+1) - 1 PEs over n + 1 levels; protecting n_p levels
    starting from the root hardens 2**n_p - 1 of them. With
    n_p = (n + 1) - n_u the protected fraction tends to 2**-n_u as n grows.
    """
    if n < 0:
        raise ValueError(f"exponent n must be nonnegative, got {n}")
    if not 0 <= n_p <= n + 1:
        raise ValueError(f"n_p must lie in 0..{n + 1}, got {n_p}")
    total = 2 ** (n + 1) - 1
    protected = 2**n_p - 1 if n_p > 0 else 0
    return PECounts(total=total, protected=protected, fraction=protected / total)


@dataclass(frozen=True)
class CodeConstruction:
    """A designed polar code: reliabilities plus the frozen/information split.

    info_set and frozen_set hold 1-based channel indices; reliabilities[i-1]
    is Z_i.
    """

    n: int
    channel_erasure: float
    fault: FaultSpec
    reliabilities: np.ndarray
    info_set: frozenset[int]
    frozen_set: frozenset[int]

    def __post_init__(self):
        z = np.asarray(self.reliabilities, dtype=np.float64)
        object.__setattr__(self, "reliabilities", z)
        n_total = 2**self.n
        if z.shape != (n_total,):
            raise ValueError(f"expected {n_total} reliabilities, got shape {z.shape}")
        if not np.all((z >= 0.0) & (z <= 1.0)):
            raise ValueError("reliabilities must lie in [0, 1]")
        if self.info_set & self.frozen_set:
            raise ValueError("info_set and frozen_set overlap")
        if len(self.info_set) + len(self.frozen_set) != n_total:
            raise ValueError("info_set and frozen_set must partition 1..N")
        if self.info_set and self.frozen_set:
            worst_info = max(z[i - 1] for i in self.info_set)
            best_frozen = min(z[i - 1] for i in self.frozen_set)
            if worst_info > best_frozen:
                raise ValueError("info_set contains a less reliable channel than frozen_set")

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def k(self) -> int:
        return len(self.info_set)

    @property
    def rate(self) -> float:
        return self.k / self.N

    @property
    def info_indices(self) -> np.ndarray:
        """Information-set indices, 1-based, ascending."""
        return np.array(sorted(self.info_set), dtype=np.int64)

    @property
    def frozen_mask(self) -> np.ndarray:
        """Boolean mask over 0-based positions, True where frozen."""
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_indices - 1] = False
        return mask


def construct_code(n: int, p: float, fault: FaultSpec, k: int,
                   max_exponent: int = DEFAULT_MAX_EXPONENT) -> CodeConstruction:
    """Run density evolution and freeze all but the k best channels."""
    z = evolve_all(n, p, fault, max_exponent=max_exponent)
    info, frozen = design_code(z, k)
    return CodeConstruction(n=n, channel_erasure=p, fault=fault,
                            reliabilities=z, info_set=info, frozen_set=frozen)
