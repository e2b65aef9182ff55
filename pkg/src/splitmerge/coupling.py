"""Joint construction of a continuous and a discrete split-merge chain.

The coupled state is ``(c, d, e)``:

* ``c`` labels ``[0, n)`` piecewise: sorted boundaries ``0 = b_0 < ... < b_K = n``
  and one integer label per interval ``[b_i, b_{i+1})``;
* ``d`` labels the atoms ``1..n`` (stored 0-based, ``d[m - 1]``);
* ``e`` is 1 once the coupling has broken down.

Both chains are driven by the same uniforms ``xi_1, xi_2`` on ``[0, n)``.
Point ``x`` sits in atom ``floor(x) + 1`` (the atom whose cell ``[m - 1, m)``
contains it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .partitions import ContinuousPartition, IntegerPartition
from .samplers import RngStream

L1_SLACK = 1e-9


@dataclass
class CoupledState:
    n: int
    bounds: np.ndarray
    labels: np.ndarray
    d: np.ndarray
    e: int = 0
    next_label: int = 0

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.d = np.asarray(self.d, dtype=np.int64)
        if self.next_label <= 0:
            self.next_label = int(max(self.labels.max(), self.d.max())) + 1

    def validate(self) -> None:
        b = self.bounds
        if b[0] != 0.0 or b[-1] != float(self.n):
            raise ValueError("intervals must cover [0, n)")
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("interval boundaries must be strictly increasing")
        if len(self.labels) != len(b) - 1 or len(self.d) != self.n:
            raise ValueError("shape mismatch")
        if self.e not in (0, 1):
            raise ValueError("e must be 0 or 1")
        if max(self.labels.max(), self.d.max()) >= self.next_label:
            raise ValueError("next_label must exceed every label in use")

    def copy(self) -> "CoupledState":
        return CoupledState(self.n, self.bounds.copy(), self.labels.copy(), self.d.copy(),
                            self.e, self.next_label)

    def c_at(self, x: float) -> int:
        return int(self.labels[np.searchsorted(self.bounds, x, side="right") - 1])

    def d_at(self, x: float) -> int:
        """Label of the atom containing ``x``."""
        return int(self.d[int(math.floor(x))])


def project_continuous(s: CoupledState) -> ContinuousPartition:
    """Sorted masses ``Leb(c^{-1}(i)) / n`` over the labels ``i``."""
    lengths = np.bincount(s.labels, weights=np.diff(s.bounds))
    masses = lengths[lengths > 0] / s.n
    masses[::-1].sort()
    return ContinuousPartition(tuple(masses), 0.0, tol=1e-9)


def project_discrete(s: CoupledState) -> IntegerPartition:
    """Sorted class sizes of ``d``."""
    sizes = np.bincount(s.d)
    return IntegerPartition.from_parts(sizes[sizes > 0].tolist())


def embed(p: ContinuousPartition, n: int) -> CoupledState:
    """Lay the parts of ``p`` out consecutively on ``[0, n)``.

    Part ``j`` gets label ``j`` (1-based) on ``[n sum_{i<j} p_i, n sum_{i<=j} p_i)``;
    the dust, if any, takes one further label on the final interval.  Atom
    ``m`` takes the label of the point ``m - 1``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    masses = list(p.parts) + ([p.dust] if p.dust > 0.0 else [])
    cuts = np.minimum(n * np.cumsum(masses), float(n))
    cuts[-1] = float(n)
    bounds = np.concatenate(([0.0], cuts))
    labels = np.arange(1, len(masses) + 1, dtype=np.int64)
    keep = np.diff(bounds) > 0.0
    labels = labels[keep]
    bounds = np.concatenate(([0.0], bounds[1:][keep]))
    idx = np.searchsorted(bounds, np.arange(n, dtype=np.float64), side="right") - 1
    d = labels[idx]
    return CoupledState(n, bounds, labels, d, 0, len(masses) + 1)


def discrepancy(s: CoupledState) -> float:
    """``Leb{x in [0, n) : c(x) != d(atom(x))}``.

    Cells free of interior boundaries are compared wholesale; the (few) cells
    cut by a boundary are split into pieces and compared piece by piece.
    """
    b = s.bounds
    n = s.n
    # label of c at each integer point m - 1, i.e. at the left end of cell m
    counts = np.diff(np.ceil(b)).astype(np.int64)
    left_label = np.repeat(s.labels, counts)
    interior = b[1:-1]
    cut = np.unique(np.floor(interior[interior != np.floor(interior)]).astype(np.int64))
    mismatch = left_label != s.d
    mismatch[cut] = False
    rho = float(np.count_nonzero(mismatch))
    if len(cut):
        pts = np.unique(np.concatenate((interior, cut.astype(np.float64), cut + 1.0)))
        starts, ends = pts[:-1], pts[1:]
        lengths = ends - starts
        cells = np.floor(starts).astype(np.int64)
        inside = np.isin(cells, cut) & (ends <= cells + 1.0)
        starts, lengths, cells = starts[inside], lengths[inside], cells[inside]
        lab = s.labels[np.searchsorted(b, starts, side="right") - 1]
        rho += float(lengths[lab != s.d[cells]].sum())
    return rho


def _atom(x: float) -> int:
    return int(math.floor(x)) + 1


def _draw_zeta(n: int, rand) -> tuple:
    # uniform on [0, n)^2 minus the diagonal cells, by rejection
    while True:
        z1, z2 = n * rand(), n * rand()
        if math.floor(z1) != math.floor(z2):
            return z1, z2


def _update_c(s: CoupledState, xi1: float, xi2: float, new: int) -> bool:
    """Continuous merge/split in place; returns True on a split."""
    b, lab = s.bounds, s.labels
    i1 = int(np.searchsorted(b, xi1, side="right") - 1)
    i2 = int(np.searchsorted(b, xi2, side="right") - 1)
    c1, c2 = lab[i1], lab[i2]
    if c1 != c2:
        lab[lab == c2] = c1
        split = False
    else:
        # points of class c1 to the right of xi1 take the fresh label
        right = (np.arange(len(lab)) > i1) & (lab == c1)
        lab[right] = new
        if xi1 > b[i1]:
            b = np.insert(b, i1 + 1, xi1)
            lab = np.insert(lab, i1 + 1, new)
        else:
            lab[i1] = new
        split = True
    keep = np.concatenate(([True], lab[1:] != lab[:-1]))
    s.labels = lab[keep]
    s.bounds = np.concatenate((b[:-1][keep], b[-1:]))
    return split


def _update_d(s: CoupledState, x1: float, x2: float, new: int) -> bool:
    """Discrete merge/split in place driven by two points in distinct atoms."""
    d = s.d
    a1, a2 = _atom(x1), _atom(x2)
    l1, l2 = d[a1 - 1], d[a2 - 1]
    if l1 != l2:
        d[d == l2] = l1
        return False
    members = np.flatnonzero(d == l1) + 1
    size = len(members)
    left_count = int(np.searchsorted(members, a1))  # class atoms inside [0, x1]
    to_right = members > a1
    d[members[to_right] - 1] = new
    if x1 < math.floor(x1) + left_count / (size - 1):
        d[a1 - 1] = new
    return True


@dataclass
class StepInfo:
    xi: tuple
    continuous_split: bool
    discrete_split: bool
    used_zeta: bool


def coupled_step(s: CoupledState, rng: RngStream, info: bool = False):
    """One transition of the coupled chain; returns a new state.

    With ``info=True`` returns ``(state, StepInfo)``.
    """
    rand = rng.gen.random
    n = s.n
    if n < 2:
        raise ValueError("coupling needs n >= 2")
    xi1, xi2 = n * rand(), n * rand()
    a1, a2 = _atom(xi1), _atom(xi2)
    broke = (a1 == a2 or s.c_at(xi1) != s.d[a1 - 1] or s.c_at(xi2) != s.d[a2 - 1])
    t = s.copy()
    new = t.next_label
    c_split = _update_c(t, xi1, xi2, new)
    if a1 == a2:
        x1, x2 = _draw_zeta(n, rand)
    else:
        x1, x2 = xi1, xi2
    d_split = _update_d(t, x1, x2, new)
    if c_split or d_split:
        t.next_label = new + 1
    t.e = 1 if broke else s.e
    if info:
        return t, StepInfo((xi1, xi2), c_split, d_split, a1 == a2)
    return t


def l1_gap(s: CoupledState) -> float:
    """``|p - ell / n|_1`` between the two projections (sorted, zero padded)."""
    lengths = np.bincount(s.labels, weights=np.diff(s.bounds))
    sizes = np.bincount(s.d).astype(np.float64)
    p = np.sort(lengths[lengths > 0])[::-1]
    q = np.sort(sizes[sizes > 0])[::-1]
    m = max(len(p), len(q))
    p = np.pad(p, (0, m - len(p)))
    q = np.pad(q, (0, m - len(q)))
    return float(np.abs(p - q).sum()) / s.n


@dataclass
class CouplingTrace:
    n: int
    rho: np.ndarray
    e: np.ndarray
    l1_gap: np.ndarray
    split: np.ndarray  # split[k] describes the step k -> k + 1 of the continuous chain
    initial_parts: int
    tau: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.rho) - 1

    def violations(self, slack: float = L1_SLACK) -> list:
        """Pre-decoupling breaches of the three pathwise bounds.

        ``rho_0 <= N_ell(0)``; ``rho_{k+1} <= rho_k + 1`` for steps that end
        still coupled; ``|p(k) - ell(k)/n|_1 <= 2 (rho_0 + k) / n`` while
        coupled.
        """
        out = []
        if self.rho[0] > self.initial_parts + slack:
            out.append(("rho0", 0, float(self.rho[0]), self.initial_parts))
        last = self.k_max if self.tau is None else self.tau - 1
        for k in range(last):
            if self.rho[k + 1] > self.rho[k] + 1 + slack:
                out.append(("rho_step", k, float(self.rho[k]), float(self.rho[k + 1])))
        for k in range(last + 1):
            bound = 2 * (self.rho[0] + k) / self.n
            if self.l1_gap[k] > bound + slack:
                out.append(("l1", k, float(self.l1_gap[k]), bound))
        return out

    def rows(self):
        for k in range(len(self.rho)):
            yield k, float(self.rho[k]), int(self.e[k]), float(self.l1_gap[k])


def run_coupling(p: ContinuousPartition, n: int, k_max: int, rng: RngStream) -> CouplingTrace:
    """Embed ``p`` at resolution ``n`` and run ``k_max`` coupled steps."""
    s = embed(p, n)
    rho = np.empty(k_max + 1)
    es = np.zeros(k_max + 1, dtype=np.int8)
    gap = np.empty(k_max + 1)
    split = np.zeros(k_max, dtype=bool)
    rho[0], gap[0] = discrepancy(s), l1_gap(s)
    initial_parts = len(project_discrete(s))
    tau = None
    for k in range(1, k_max + 1):
        s, inf = coupled_step(s, rng, info=True)
        split[k - 1] = inf.continuous_split
        rho[k], es[k], gap[k] = discrepancy(s), s.e, l1_gap(s)
        if tau is None and s.e:
            tau = k
    return CouplingTrace(n, rho, es, gap, split, initial_parts, tau)


def decoupling_time(p: ContinuousPartition, n: int, k_max: int, rng: RngStream) -> int | None:
    """First ``k`` with ``e_k = 1``, or None if the chains stay coupled for ``k_max`` steps."""
    s = embed(p, n)
    for k in range(1, k_max + 1):
        s = coupled_step(s, rng)
        if s.e:
            return k
    return None
