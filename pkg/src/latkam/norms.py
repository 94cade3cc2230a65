"""Weighted sequence and operator norms on the truncated lattice.

Sites are plain integers ``j`` with ``|j| <= radius``.  The weight attached
to site ``j`` is ``exp(|j|**(1+alpha))``, so the vector norm is a weighted
l1 sum and the matrix norm induced by it has the closed column-sum form
implemented in :func:`induced_operator_norm`.
"""

import math

from .errors import ParameterError

# exp() overflows past ~709; treat anything larger as +inf weight
_EXP_MAX = 709.0


def _exp(x):
    return math.exp(x) if x < _EXP_MAX else math.inf


class WeightProfile:
    """Weight exponent alpha and truncation radius of the site box."""

    __slots__ = ("alpha", "radius")

    def __init__(self, alpha, radius):
        if alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")
        if radius < 0:
            raise ParameterError(f"radius must be nonnegative, got {radius}")
        self.alpha = float(alpha)
        self.radius = int(radius)

    def log_weight(self, j):
        """|j|**(1+alpha), the exponent of the site weight."""
        return abs(j) ** (1.0 + self.alpha)

    def weight(self, j):
        return _exp(self.log_weight(j))

    def decay(self, j):
        """exp(-|j|**(1+alpha)), the natural per-site action scale."""
        return math.exp(-self.log_weight(j))

    def sites(self):
        return range(-self.radius, self.radius + 1)

    def __eq__(self, other):
        return (
            isinstance(other, WeightProfile)
            and self.alpha == other.alpha
            and self.radius == other.radius
        )

    def __repr__(self):
        return f"WeightProfile(alpha={self.alpha}, radius={self.radius})"


class ActionVector:
    """Finitely supported site -> scalar map (actions, frequencies, ...).

    Entries that are exactly zero are never stored, so ``support()`` is
    canonical.  Values may be complex; the model layer keeps them real.
    """

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {}
        if entries:
            for j, v in entries.items():
                if v != 0:
                    self.entries[int(j)] = v

    def __getitem__(self, j):
        return self.entries.get(j, 0.0)

    def __iter__(self):
        return iter(sorted(self.entries))

    def __len__(self):
        return len(self.entries)

    def items(self):
        return [(j, self.entries[j]) for j in sorted(self.entries)]

    def support(self):
        return sorted(self.entries)

    def __add__(self, other):
        out = dict(self.entries)
        for j, v in other.entries.items():
            out[j] = out.get(j, 0.0) + v
        return ActionVector(out)

    def __sub__(self, other):
        out = dict(self.entries)
        for j, v in other.entries.items():
            out[j] = out.get(j, 0.0) - v
        return ActionVector(out)

    def __mul__(self, scalar):
        return ActionVector({j: scalar * v for j, v in self.entries.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"ActionVector({self.entries!r})"


class LatticeMatrix:
    """Finitely supported (i, j) -> real map; optionally tagged symmetric.

    A symmetric matrix stores both (i, j) and (j, i) explicitly so lookups
    stay trivial; the constructor enforces exact equality of the two.
    """

    __slots__ = ("entries", "symmetric")

    def __init__(self, entries=None, symmetric=False):
        self.entries = {}
        self.symmetric = bool(symmetric)
        if entries:
            for (i, j), v in entries.items():
                if v != 0:
                    self.entries[(int(i), int(j))] = v
        if self.symmetric:
            for (i, j), v in list(self.entries.items()):
                w = self.entries.setdefault((j, i), v)
                if w != v:
                    raise ParameterError(
                        f"symmetric tag violated at ({i},{j}): {v} != {w}"
                    )

    def get(self, i, j):
        return self.entries.get((i, j), 0.0)

    def items(self):
        return [((i, j), self.entries[(i, j)]) for (i, j) in sorted(self.entries)]

    def rows(self):
        return sorted({i for (i, _) in self.entries})

    def cols(self):
        return sorted({j for (_, j) in self.entries})

    def __add__(self, other):
        out = dict(self.entries)
        for key, v in other.entries.items():
            out[key] = out.get(key, 0.0) + v
        return LatticeMatrix(out, symmetric=self.symmetric and other.symmetric)

    def restrict(self, radius):
        """Entries with both indices inside |i|,|j| <= radius."""
        kept = {
            (i, j): v
            for (i, j), v in self.entries.items()
            if abs(i) <= radius and abs(j) <= radius
        }
        return LatticeMatrix(kept, symmetric=self.symmetric)

    def to_dense(self, sites):
        import numpy as np

        sites = list(sites)
        idx = {s: t for t, s in enumerate(sites)}
        out = np.zeros((len(sites), len(sites)))
        for (i, j), v in self.entries.items():
            if i in idx and j in idx:
                out[idx[i], idx[j]] = v
        return out

    def __repr__(self):
        return f"LatticeMatrix({len(self.entries)} entries, symmetric={self.symmetric})"


def action_norm(vec, weights):
    """Weighted l1 norm: sum of |I_j| * exp(|j|**(1+alpha))."""
    total = 0.0
    for j, v in vec.entries.items():
        a = abs(v)
        if a == 0.0:
            continue
        # multiply in log space so huge weights on tiny entries stay finite
        lw = weights.log_weight(j)
        la = math.log(a)
        total += _exp(la + lw)
    return total


def sup_norm(vec):
    """Componentwise sup |I_j| (0 for the empty vector)."""
    if not vec.entries:
        return 0.0
    return max(abs(v) for v in vec.entries.values())


def induced_operator_norm(mat, weights):
    """Operator norm induced by the weighted l1 vector norm.

    Equals max over columns j of sum_i |B_ij| * w(i)/w(j); the weighted
    basis vectors are the extreme points of the unit ball, so the column
    form is exact (cross-checked empirically in the test suite).
    """
    col_sums = {}
    for (i, j), v in mat.entries.items():
        if v == 0:
            continue
        ratio = weights.log_weight(i) - weights.log_weight(j)
        col_sums[j] = col_sums.get(j, 0.0) + _exp(math.log(abs(v)) + ratio)
    if not col_sums:
        return 0.0
    return max(col_sums.values())


def sup_matrix_norm(mat):
    """Max absolute row sum.

    For a symmetric tridiagonal matrix this is exactly
    max_j (|B_{j-1,j}| + |B_{jj}| + |B_{j+1,j}|).
    """
    row_sums = {}
    for (i, _), v in mat.entries.items():
        row_sums[i] = row_sums.get(i, 0.0) + abs(v)
    if not row_sums:
        return 0.0
    return max(row_sums.values())
