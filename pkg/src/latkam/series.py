"""Sparse Fourier-Taylor series on the truncated lattice phase space.

A series is a finite sum of terms

    c * exp(1j * <nu, theta>) * prod_j rho_j**m_j

stored as a dict keyed by ``(nu, m)`` with ``nu`` and ``m`` sparse sorted
``(site, int)`` tuples.  Alongside the exact coefficients each series
carries analyticity widths ``(s, r)``, the lattice weight profile, and a
scalar ``remainder`` that majorizes every piece of the represented
function that is *not* stored (degree overflow, pruned mass, discarded
Fourier tails, Lie-series tails).

All operations are pure and return new series; instances are treated as
immutable values.
"""

import cmath
import math

from . import kernels
from .errors import WidthError
from .norms import WeightProfile, _exp

DEFAULT_DEGREE_CAP = 5

# coefficients at or below this absolute size are pruned into the remainder
PRUNE_ABS = 1e-30

# combining series whose widths differ by more than this factor is treated
# as mixing series from unrelated domains
WIDTH_MISMATCH_FACTOR = 4.0


def mode_order(nu):
    """l1 order of an angle mode."""
    return sum(abs(v) for _, v in nu)


def monomial_degree(m):
    """Total action degree of a monomial."""
    return sum(v for _, v in m)


def _as_sparse(mapping):
    return tuple(sorted((int(k), int(v)) for k, v in mapping.items() if v))


class FTSeries:
    __slots__ = ("coeffs", "s", "r", "remainder", "weights", "degree_cap")

    def __init__(self, coeffs, s, r, weights, remainder=0.0,
                 degree_cap=DEFAULT_DEGREE_CAP, _canonical=False):
        if s <= 0 or r <= 0:
            raise WidthError(f"widths must be positive, got s={s}, r={r}")
        if remainder < 0:
            raise WidthError(f"remainder must be nonnegative, got {remainder}")
        self.s = float(s)
        self.r = float(r)
        self.weights = weights
        self.remainder = float(remainder)
        self.degree_cap = int(degree_cap)
        if _canonical:
            self.coeffs = coeffs
        else:
            self.coeffs = {}
            pruned = 0.0
            for key, c in coeffs.items():
                c = complex(c)
                if c == 0:
                    continue
                if abs(c) <= PRUNE_ABS:
                    pruned += self._term_majorant(key, abs(c), self.s, self.r)
                    continue
                self.coeffs[key] = c
            self.remainder += pruned

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, weights, s=1.0, r=1.0, degree_cap=DEFAULT_DEGREE_CAP):
        return cls({}, s, r, weights, degree_cap=degree_cap, _canonical=True)

    @classmethod
    def constant(cls, value, weights, s=1.0, r=1.0, degree_cap=DEFAULT_DEGREE_CAP):
        return cls({((), ()): complex(value)}, s, r, weights, degree_cap=degree_cap)

    @classmethod
    def term(cls, value, nu, m, weights, s=1.0, r=1.0, degree_cap=DEFAULT_DEGREE_CAP):
        """Single term; ``nu`` and ``m`` given as site -> int mappings."""
        key = (_as_sparse(nu), _as_sparse(m))
        return cls({key: complex(value)}, s, r, weights, degree_cap=degree_cap)

    # -- basic queries ------------------------------------------------------

    def items(self):
        return [(key, self.coeffs[key]) for key in sorted(self.coeffs)]

    def __len__(self):
        return len(self.coeffs)

    def coeff(self, nu, m):
        key = (_as_sparse(nu), _as_sparse(m))
        return self.coeffs.get(key, 0j)

    def active_sites(self):
        sites = set()
        for nu, m in self.coeffs:
            sites.update(s for s, _ in nu)
            sites.update(s for s, _ in m)
        return sorted(sites)

    def max_degree(self):
        return max((monomial_degree(m) for _, m in self.coeffs), default=0)

    def max_mode_order(self):
        return max((mode_order(nu) for nu, _ in self.coeffs), default=0)

    def _term_majorant(self, key, mag, s, r):
        nu, m = key
        log_val = math.log(mag) if mag > 0 else -math.inf
        log_val += r * mode_order(nu)
        for j, p in m:
            log_val += p * (math.log(s) - self.weights.log_weight(j))
        return _exp(log_val) if log_val > -math.inf else 0.0

    # -- algebra -------------------------------------------------------------

    def _combine_widths(self, other):
        if self.weights != other.weights:
            raise WidthError("series live on different weight profiles")
        for a, b in ((self.s, other.s), (self.r, other.r)):
            lo, hi = min(a, b), max(a, b)
            if hi > WIDTH_MISMATCH_FACTOR * lo:
                raise WidthError(
                    f"width mismatch beyond tolerance: {lo} vs {hi}"
                )
        return (min(self.s, other.s), min(self.r, other.r),
                min(self.degree_cap, other.degree_cap))

    def __add__(self, other):
        if not isinstance(other, FTSeries):
            return NotImplemented
        s, r, cap = self._combine_widths(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            acc = out.get(key, 0j) + c
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
        return FTSeries(out, s, r, self.weights,
                        remainder=self.remainder + other.remainder,
                        degree_cap=cap)

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, scalar):
        if isinstance(scalar, FTSeries):
            return series_product(self, scalar)
        if scalar == 0:
            return FTSeries.zero(self.weights, self.s, self.r, self.degree_cap)
        out = {key: scalar * c for key, c in self.coeffs.items()}
        return FTSeries(out, self.s, self.r, self.weights,
                        remainder=abs(scalar) * self.remainder,
                        degree_cap=self.degree_cap)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # -- analysis ------------------------------------------------------------

    def majorant_norm(self, s=None, r=None):
        """Coefficient majorant of the sup of the series on D_{s,r}.

        Upper-bounds the true sup because ||rho|| < s forces
        |rho_j| < s * exp(-|j|**(1+alpha)).
        """
        s = self.s if s is None else s
        r = self.r if r is None else r
        if s > self.s * (1 + 1e-12) or r > self.r * (1 + 1e-12):
            raise WidthError(
                f"majorant requested at ({s},{r}) outside stored widths "
                f"({self.s},{self.r})"
            )
        total = self.remainder
        for key, c in self.coeffs.items():
            total += self._term_majorant(key, abs(c), s, r)
        return total

    def evaluate(self, rho, theta):
        """Value at a phase point; site -> complex maps, missing sites are 0.

        The remainder bound is not included: this is the value of the
        stored polynomial part only.
        """
        total = 0j
        for (nu, m), c in sorted(self.coeffs.items()):
            val = c
            for j, v in nu:
                val *= cmath.exp(1j * v * theta.get(j, 0.0))
            ok = True
            for j, p in m:
                base = rho.get(j, 0.0)
                if base == 0:
                    ok = False
                    break
                val *= base ** p
            if ok:
                total += val
        return total

    def check_reality(self, tol=1e-12):
        """True when coeff(-nu, m) == conj(coeff(nu, m)) within tol."""
        scale = max((abs(c) for c in self.coeffs.values()), default=0.0)
        if scale == 0.0:
            return True
        for (nu, m), c in self.coeffs.items():
            mirrored = tuple((j, -v) for j, v in nu)
            other = self.coeffs.get((mirrored, m), 0j)
            if abs(other - c.conjugate()) > tol * scale:
                return False
        return True

    # -- calculus -------------------------------------------------------------

    def dtheta(self, j):
        """Partial derivative in theta_j (multiplies terms by 1j*nu_j)."""
        out = {}
        for (nu, m), c in self.coeffs.items():
            v = dict(nu).get(j, 0)
            if v:
                out[(nu, m)] = 1j * v * c
        return FTSeries(out, self.s, self.r, self.weights,
                        degree_cap=self.degree_cap)

    def drho(self, j):
        """Partial derivative in rho_j (lowers m_j, multiplies by m_j)."""
        from ._kernels_py import decrement_site

        out = {}
        for (nu, m), c in self.coeffs.items():
            p = dict(m).get(j, 0)
            if p:
                out[(nu, decrement_site(m, j))] = p * c
        return FTSeries(out, self.s, self.r, self.weights,
                        degree_cap=self.degree_cap)

    # -- reshaping -------------------------------------------------------------

    def with_widths(self, s, r):
        """Same coefficients declared on a smaller domain."""
        if s > self.s * (1 + 1e-12) or r > self.r * (1 + 1e-12):
            raise WidthError("cannot enlarge analyticity widths")
        return FTSeries(dict(self.coeffs), s, r, self.weights,
                        remainder=self.remainder, degree_cap=self.degree_cap,
                        _canonical=True)

    def drop_remainder(self):
        return FTSeries(dict(self.coeffs), self.s, self.r, self.weights,
                        degree_cap=self.degree_cap, _canonical=True)

    def with_degree_cap(self, cap):
        """Same series under a different cap (gates future products only)."""
        return FTSeries(dict(self.coeffs), self.s, self.r, self.weights,
                        remainder=self.remainder, degree_cap=cap,
                        _canonical=True)

    def capped(self, cap=None):
        """Truncate stored degrees above the cap into the remainder."""
        cap = self.degree_cap if cap is None else cap
        kept, overflow = {}, {}
        for key, c in self.coeffs.items():
            (overflow if monomial_degree(key[1]) > cap else kept)[key] = c
        spill = 0.0
        for key, c in overflow.items():
            spill += self._term_majorant(key, abs(c), self.s, self.r)
        return FTSeries(kept, self.s, self.r, self.weights,
                        remainder=self.remainder + spill, degree_cap=cap,
                        _canonical=True)

    # -- serialization -----------------------------------------------------------

    def to_dict(self):
        records = []
        for (nu, m), c in self.items():
            records.append({
                "nu": [[j, v] for j, v in nu],
                "m": [[j, p] for j, p in m],
                "re": c.real,
                "im": c.imag,
            })
        return {
            "terms": records,
            "s": self.s,
            "r": self.r,
            "remainder": self.remainder,
            "alpha": self.weights.alpha,
            "radius": self.weights.radius,
            "degree_cap": self.degree_cap,
        }

    @classmethod
    def from_dict(cls, data):
        weights = WeightProfile(data["alpha"], data["radius"])
        coeffs = {}
        for rec in data["terms"]:
            nu = tuple((int(j), int(v)) for j, v in rec["nu"])
            m = tuple((int(j), int(p)) for j, p in rec["m"])
            coeffs[(nu, m)] = complex(rec["re"], rec["im"])
        return cls(coeffs, data["s"], data["r"], weights,
                   remainder=data["remainder"], degree_cap=data["degree_cap"])

    def __repr__(self):
        return (f"FTSeries({len(self.coeffs)} terms, s={self.s}, r={self.r}, "
                f"remainder={self.remainder:.3e})")


# -- free operations ------------------------------------------------------------


def _split_overflow(raw, cap):
    kept, overflow = {}, {}
    for key, c in raw.items():
        if c == 0:
            continue
        if monomial_degree(key[1]) > cap:
            overflow[key] = c
        else:
            kept[key] = c
    return kept, overflow


def series_product(a, b):
    """Cauchy product; degree overflow beyond the cap is priced into the
    remainder via its majorant at the result widths."""
    s, r, cap = a._combine_widths(b)
    raw = kernels.multiply_terms(a.items(), b.items())
    kept, overflow = _split_overflow(raw, cap)
    spill = FTSeries(overflow, s, r, a.weights, degree_cap=10**6).majorant_norm() \
        if overflow else 0.0
    rem = spill
    if a.remainder or b.remainder:
        rem += (a.remainder * b.majorant_norm(s, r)
                + b.remainder * a.majorant_norm(s, r)
                + a.remainder * b.remainder)
    return FTSeries(kept, s, r, a.weights, remainder=rem, degree_cap=cap)


def _bracket_remainder_factor(a, b, s, r, sigma_t, sigma):
    """Majorant-side bracket bound constant on the shrunk domain."""
    sites = set(a.active_sites()) | set(b.active_sites())
    wmax = max((a.weights.log_weight(j) for j in sites), default=0.0)
    return 2.0 * _exp(wmax) / (math.e * sigma * sigma_t)


def poisson_bracket(a, b, margins=None):
    """{a, b} = <a_theta, b_rho> - <a_rho, b_theta>.

    Exact on stored coefficients.  When either operand carries a nonzero
    remainder the output domain shrinks by ``margins = (sigma_tilde,
    sigma)`` (default 10% of the widths) and the unseen content is bounded
    through the Cauchy-estimate bracket inequality on the shrunk domain.
    """
    s, r, cap = a._combine_widths(b)
    raw = kernels.bracket_terms(a.items(), b.items())
    kept, overflow = _split_overflow(raw, cap)
    spill = FTSeries(overflow, s, r, a.weights, degree_cap=10**6).majorant_norm() \
        if overflow else 0.0
    if a.remainder == 0.0 and b.remainder == 0.0:
        return FTSeries(kept, s, r, a.weights, remainder=spill, degree_cap=cap)
    sigma_t, sigma = margins if margins is not None else (0.1 * s, 0.1 * r)
    if sigma_t <= 0 or sigma <= 0 or sigma_t >= s or sigma >= r:
        raise WidthError(f"invalid bracket margins ({sigma_t}, {sigma})")
    factor = _bracket_remainder_factor(a, b, s, r, sigma_t, sigma)
    rem = spill + factor * (a.remainder * b.majorant_norm(s, r)
                            + b.remainder * a.majorant_norm(s, r)
                            + a.remainder * b.remainder)
    return FTSeries(kept, s - sigma_t, r - sigma, a.weights,
                    remainder=rem, degree_cap=cap)


def truncate_fourier(g, m_cap):
    """Keep modes with |nu|_1 < m_cap; discarded majorant mass goes to the
    remainder (the Gamma operator)."""
    if m_cap < 1:
        raise ValueError(f"Fourier cap must be >= 1, got {m_cap}")
    kept, dropped = {}, 0.0
    for key, c in g.coeffs.items():
        if mode_order(key[0]) < m_cap:
            kept[key] = c
        else:
            dropped += g._term_majorant(key, abs(c), g.s, g.r)
    return FTSeries(kept, g.s, g.r, g.weights,
                    remainder=g.remainder + dropped, degree_cap=g.degree_cap,
                    _canonical=True)


def fourier_tail(g, m_cap):
    """The complementary part of :func:`truncate_fourier`: modes with
    |nu|_1 >= m_cap, carrying the original remainder."""
    kept = {key: c for key, c in g.coeffs.items() if mode_order(key[0]) >= m_cap}
    return FTSeries(kept, g.s, g.r, g.weights, remainder=g.remainder,
                    degree_cap=g.degree_cap, _canonical=True)


def average(g):
    """Zero-mode part [g]; exact on stored coefficients, remainder 0."""
    kept = {key: c for key, c in g.coeffs.items() if not key[0]}
    return FTSeries(kept, g.s, g.r, g.weights, degree_cap=g.degree_cap,
                    _canonical=True)


def split_by_degree(g):
    """Partition into action degrees 0, 1, 2 and >= 3 (high).

    The remainder bound is attached to the high part, so the four pieces
    recompose to g exactly, coefficients and remainder both.
    """
    parts = {0: {}, 1: {}, 2: {}, 3: {}}
    for key, c in g.coeffs.items():
        d = monomial_degree(key[1])
        parts[min(d, 3)][key] = c
    mk = lambda coeffs, rem: FTSeries(coeffs, g.s, g.r, g.weights,
                                      remainder=rem, degree_cap=g.degree_cap,
                                      _canonical=True)
    return (mk(parts[0], 0.0), mk(parts[1], 0.0), mk(parts[2], 0.0),
            mk(parts[3], g.remainder))
