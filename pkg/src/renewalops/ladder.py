"""Backward-orbit ladders of the left branch, evaluated on whole edge arrays.

The first-return map of Y = [1/2, 1] has one smooth branch per return time
n: a right-branch step followed by n-1 left-branch steps.  Its inverse at a
point e in Y is obtained by pulling e back n-1 times through the left
branch and then through the right branch.  Assembling the discretized
branch family therefore reduces to iterating the left-branch inverse on the
array of grid edges: rung k of the ladder holds the k-fold pullback of
every edge, and branch n's geometry is rung n-1 mapped through
(w + 1) / 2.

Rows are streamed (the full table is large); checkpoint rows allow
re-sweeping any branch range at the cost of at most ``checkpoint_stride``
Newton continuations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .maps import MapSpec

__all__ = ["BranchLadder"]

_TOL = 1e-15
_MAX_ITER = 60


def _pullback_row(spec: MapSpec, targets: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """Solve left(w) = target elementwise by monotone Newton from above.

    Requires left(w0) >= target; convexity of the left branch keeps the
    iterates above the root and decreasing.
    """
    w = w0.copy()
    fw = spec.left_np(w)
    for _ in range(_MAX_ITER):
        err = fw - targets
        worst = np.max(np.abs(err))
        if worst <= _TOL:
            return w
        w -= err / spec.left_deriv_np(w)
        np.clip(w, 1e-300, None, out=w)
        fw = spec.left_np(w)
    if np.max(np.abs(fw - targets)) > 1e-12:
        raise NumericalError("vectorized left-branch pullback stalled")
    return w


@dataclass
class BranchLadder:
    """Left-branch pullback ladder over a fixed edge array.

    ``x_tail[k]`` is the scalar backward orbit (x_1 = 1/2 at index 0) and is
    tabulated to ``n_rungs + 1`` entries so branch domains [y_n, y_{n-1}]
    are available for every swept branch.
    """

    spec: MapSpec
    edges: np.ndarray
    n_rungs: int
    checkpoint_stride: int = 128

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        sup = self.spec.left_image_sup
        # Edges at or above the left-branch image sup are pinned just below it:
        # branches n >= 2 carry no mass there and their pullbacks plateau.
        self._clamped = np.minimum(self.edges, sup * (1.0 - 1e-14))
        self._checkpoints: dict[int, np.ndarray] = {0: self._clamped.copy()}
        self._build()

    def _build(self):
        if self.edges[0] != 0.5:
            raise NumericalError("ladder edge array must start at 1/2")
        x = np.empty(self.n_rungs + 1)
        x[0] = 0.5
        row = self._clamped.copy()
        stride = self.checkpoint_stride
        for k in range(1, self.n_rungs + 1):
            row = _pullback_row(self.spec, row, row)
            x[k] = row[0]  # the 1/2-edge column is the scalar backward orbit
            if k % stride == 0:
                self._checkpoints[k] = row.copy()
        self.x_tail = x  # x_tail[k] = x_{k+1}
        self._last_row = row

    def x_n(self, n: int) -> float:
        """n-th element of the backward orbit, x_1 = 1/2."""
        return float(self.x_tail[n - 1])

    def y_n(self, n: int) -> float:
        if n == 0:
            return 1.0
        return 0.5 * (self.x_n(n) + 1.0)

    def rung(self, k: int) -> np.ndarray:
        """Pullback row W^(k) (k = 0 is the clamped edge array)."""
        base = max(c for c in self._checkpoints if c <= k)
        row = self._checkpoints[base]
        if base == k:
            return row.copy()
        row = row.copy()
        for _ in range(k - base):
            row = _pullback_row(self.spec, row, row)
        return row

    def sweep(self, j_lo: int, j_hi: int):
        """Yield (j, g_row) for branches j in [j_lo, j_hi).

        ``g_row`` holds the branch inverse evaluated at every edge; for
        branch 1 this is the right-branch inverse of the raw edges, for
        n >= 2 the ladder rung n - 2 pulled once more and lifted.
        """
        if j_lo < 1 or j_hi > self.n_rungs + 2:
            raise NumericalError("branch range outside tabulated ladder")
        row = None
        for j in range(j_lo, j_hi):
            if j == 1:
                yield 1, 0.5 * (self.edges + 1.0)
            else:
                if row is None:
                    row = self.rung(j - 1)
                else:
                    row = _pullback_row(self.spec, row, row)
                yield j, 0.5 * (row + 1.0)

    def top_tail_cumulative(self) -> tuple[np.ndarray, float]:
        """Cumulative geometry of all branches beyond the ladder.

        Returns (per-edge cumulative sum_{j>n_rungs+1} (g_j(e) - y_j), total
        read-region width x_{n_rungs+1}/2).  The per-branch terms decay like
        j**-(beta+1) (power family) or 1/(j log^2 j) (log family); the sum is
        estimated from the last tabulated rung by the corresponding integral
        tail factor.
        """
        K = self.n_rungs + 1  # last branch with tabulated geometry
        t_last = 0.5 * (self._last_row - self.x_tail[-1])
        if self.spec.family == "lsv":
            factor = K / self.spec.beta
        else:
            factor = K * np.log(K)
        return t_last * factor, 0.5 * float(self.x_tail[-1])
