"""Short-range lattice model ingestion, validation, re-centering, box split.

Model document schema (JSON, unknown keys rejected)::

    {
      "weights":      {"alpha": 1.0, "lambda": 4},
      "h0":           [ {"site": 0, "terms": {"1": 0.6, "2": 0.5}},
                        {"sites": [0, 1], "terms": {"1,1": 0.05}} ],
      "initial":      {"I0": {"0": 0.5}},
      "coupling":     [ {"site": 0, "exponent": 5,
                         "modes": {"1": [2.5e-4, 0.0], "-1": [2.5e-4, 0.0]}},
                        {"sites": [0, 1], "exponents": [3, 2],
                         "modes": {"1,-1": [1e-5, 0.0], "-1,1": [1e-5, 0.0]}} ],
      "perturbation": {"epsilon": 1e-4, "K": 0.015625, "l": 5.0}
    }

``h0`` lists one real polynomial per site or adjacent pair (exponent ->
coefficient tables; pair exponents are comma separated).  ``coupling``
entries are trig-polynomial interaction terms: an on-site entry carries a
single action exponent (>= 5) and angle modes of theta_site; a pair entry
carries an exponent pair summing to >= 5 and joint modes "v_i,v_j".  Mode
coefficient values are [re, im] and every table must be Hermitian
(coefficient at -v equal to the conjugate at v) so the interaction is real
for real arguments.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionError, DecayError, SchemaError
from .norms import (
    ActionVector,
    LatticeMatrix,
    WeightProfile,
    action_norm,
    induced_operator_norm,
)
from .series import DEFAULT_DEGREE_CAP, FTSeries

H0_MAX_DEGREE = 6
MIN_COUPLING_DEGREE = 5
DEFAULT_K = 2.0 ** -6
DEFAULT_DECAY_RATE = 5.0
A2_COND_GATE = 1e12


@dataclass(frozen=True)
class H0Term:
    """Real polynomial attached to a site or an adjacent pair."""

    sites: tuple            # (j,) or (i, j) with i < j
    terms: dict             # exponent tuple -> real coefficient


@dataclass(frozen=True)
class Coupling:
    """One interaction term: trig-polynomial factor times action monomial."""

    sites: tuple            # (j,) or (i, j) with i < j
    exponents: tuple        # matching action exponents
    modes: dict             # mode tuple -> complex coefficient

    @property
    def degree(self):
        return sum(self.exponents)


@dataclass(frozen=True)
class ModelSpec:
    alpha: float
    radius: int
    i0: ActionVector
    h0: tuple               # of H0Term
    couplings: tuple        # of Coupling
    epsilon: float
    decay_k: float
    decay_rate: float

    @property
    def weights(self):
        return WeightProfile(self.alpha, self.radius)

    def degree_cap(self):
        cap = DEFAULT_DEGREE_CAP
        for term in self.h0:
            cap = max(cap, max(sum(e) for e in term.terms))
        for c in self.couplings:
            cap = max(cap, c.degree)
        return cap


@dataclass
class RecenteredHamiltonian:
    """Exact Taylor re-centering of the model at its action point."""

    spec: ModelSpec
    e: float
    omega: ActionVector
    hessian: LatticeMatrix
    v_pairs: dict           # pair -> FTSeries, action degree >= 3, zero mode
    f_pairs: dict           # pair -> FTSeries, recentered coupling (no epsilon)
    kappa1: float
    kappa2: float

    @property
    def weights(self):
        return self.spec.weights

    @property
    def epsilon(self):
        return self.spec.epsilon


@dataclass
class BoxDecomposition:
    """Tagged split of a re-centered Hamiltonian at scales (L, L_plus)."""

    inner: int              # L
    outer: int              # L_plus
    p: FTSeries             # epsilon-scaled inner interaction
    q: FTSeries             # annulus interaction (unscaled)
    boundary: FTSeries      # exactly one index >= L_plus (unscaled)
    v_tilde: FTSeries
    v_bar: FTSeries
    v_check_pairs: dict
    far_pairs: dict
    n0: FTSeries
    n1: FTSeries
    n2: FTSeries
    far_bound: float        # majorant of everything left untouched
    e: float = 0.0
    tags: dict = field(default_factory=dict)


# -- document parsing ---------------------------------------------------------


def _require_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected a table, got {type(obj).__name__}")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise SchemaError(f"{path}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")


def _real(value, path):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"{path}: expected a real number, got {value!r}")
    return float(value)


def _site(value, radius, path):
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{path}: expected an integer site, got {value!r}")
    if abs(value) > radius:
        raise SchemaError(f"{path}: site {value} outside truncation radius {radius}")
    return value


def _parse_int_tuple(key, arity, path):
    parts = key.split(",")
    if len(parts) != arity:
        raise SchemaError(f"{path}: key '{key}' must have {arity} entries")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise SchemaError(f"{path}: key '{key}' is not integer-valued") from None


def _parse_h0(entries, radius):
    out = []
    if not isinstance(entries, list):
        raise SchemaError("h0: expected a list of tables")
    for n, entry in enumerate(entries):
        path = f"h0[{n}]"
        if "site" in entry:
            _require_keys(entry, ("site", "terms"), ("site", "terms"), path)
            j = _site(entry["site"], radius, f"{path}.site")
            sites = (j,)
        else:
            _require_keys(entry, ("sites", "terms"), ("sites", "terms"), path)
            pair = entry["sites"]
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{path}.sites: expected [i, j]")
            i = _site(pair[0], radius, f"{path}.sites")
            j = _site(pair[1], radius, f"{path}.sites")
            if not (i < j and j - i == 1):
                raise SchemaError(f"{path}.sites: expected adjacent i < j, got {pair}")
            sites = (i, j)
        terms = {}
        for key, coeff in entry["terms"].items():
            exps = _parse_int_tuple(key, len(sites), f"{path}.terms")
            if any(e < 0 for e in exps) or sum(exps) == 0:
                raise SchemaError(f"{path}.terms: bad exponents {exps}")
            if sum(exps) > H0_MAX_DEGREE:
                raise SchemaError(
                    f"{path}.terms: degree {sum(exps)} exceeds cap {H0_MAX_DEGREE}"
                )
            terms[exps] = _real(coeff, f"{path}.terms['{key}']")
        out.append(H0Term(sites, terms))
    return tuple(out)


def _parse_modes(table, arity, path):
    modes = {}
    for key, val in table.items():
        mode = _parse_int_tuple(key, arity, path)
        if not isinstance(val, list) or len(val) != 2:
            raise SchemaError(f"{path}['{key}']: expected [re, im]")
        modes[mode] = complex(_real(val[0], path), _real(val[1], path))
    scale = max((abs(c) for c in modes.values()), default=0.0)
    for mode, c in modes.items():
        neg = tuple(-v for v in mode)
        if abs(modes.get(neg, 0j) - c.conjugate()) > 1e-12 * max(scale, 1e-300):
            raise SchemaError(
                f"{path}: mode table not Hermitian at {mode} "
                "(interaction must be real for real arguments)"
            )
    return modes


def _parse_coupling(entries, radius):
    out = []
    if not isinstance(entries, list):
        raise SchemaError("coupling: expected a list of tables")
    for n, entry in enumerate(entries):
        path = f"coupling[{n}]"
        if "site" in entry:
            _require_keys(entry, ("site", "exponent", "modes"),
                          ("site", "exponent", "modes"), path)
            j = _site(entry["site"], radius, f"{path}.site")
            exp = entry["exponent"]
            if not isinstance(exp, int) or exp < 0:
                raise SchemaError(f"{path}.exponent: bad value {exp!r}")
            sites, exps = (j,), (exp,)
            modes = _parse_modes(entry["modes"], 1, f"{path}.modes")
        else:
            _require_keys(entry, ("sites", "exponents", "modes"),
                          ("sites", "exponents", "modes"), path)
            pair = entry["sites"]
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{path}.sites: expected [i, j]")
            i = _site(pair[0], radius, f"{path}.sites")
            j = _site(pair[1], radius, f"{path}.sites")
            if not (i < j and j - i == 1):
                raise SchemaError(f"{path}.sites: expected adjacent i < j, got {pair}")
            exps = entry["exponents"]
            if (not isinstance(exps, list) or len(exps) != 2
                    or any(not isinstance(e, int) or e < 0 for e in exps)):
                raise SchemaError(f"{path}.exponents: bad value {exps!r}")
            sites, exps = (i, j), tuple(exps)
            modes = _parse_modes(entry["modes"], 2, f"{path}.modes")
        if sum(exps) < MIN_COUPLING_DEGREE:
            raise AssumptionError(
                "B1",
                f"{path}: action degree {sum(exps)} < {MIN_COUPLING_DEGREE}",
            )
        out.append(Coupling(sites, exps, modes))
    return tuple(out)


def coupling_majorant(coupling, i0, weights, s=1.0, r=1.0):
    """Majorant of one interaction term on the width-(s, r) domain around
    the re-centering point."""
    total = 0.0
    for mode, c in coupling.modes.items():
        val = abs(c) * math.exp(r * sum(abs(v) for v in mode))
        for j, exp in zip(coupling.sites, coupling.exponents):
            val *= (abs(i0[j]) + s * weights.decay(j)) ** exp
        total += val
    return total


def load_model(raw):
    """Parse and validate a model document (dict, JSON string, or path)."""
    if isinstance(raw, str):
        if raw.lstrip().startswith("{"):
            raw = json.loads(raw)
        else:
            with open(raw, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
    _require_keys(raw, ("weights", "h0", "initial", "coupling", "perturbation"),
                  ("weights", "h0", "initial", "perturbation"), "model")
    _require_keys(raw["weights"], ("alpha", "lambda"), ("alpha", "lambda"), "weights")
    alpha = _real(raw["weights"]["alpha"], "weights.alpha")
    radius = raw["weights"]["lambda"]
    if not isinstance(radius, int) or radius < 1:
        raise SchemaError(f"weights.lambda: expected integer >= 1, got {radius!r}")
    if alpha <= 0:
        raise SchemaError(f"weights.alpha: must be positive, got {alpha}")
    weights = WeightProfile(alpha, radius)

    _require_keys(raw["initial"], ("I0",), ("I0",), "initial")
    i0_entries = {}
    for key, val in raw["initial"]["I0"].items():
        try:
            j = int(key)
        except ValueError:
            raise SchemaError(f"initial.I0: bad site key '{key}'") from None
        _site(j, radius, "initial.I0")
        i0_entries[j] = _real(val, f"initial.I0['{key}']")
    i0 = ActionVector(i0_entries)
    i0_norm = action_norm(i0, weights)
    if not (0.0 < i0_norm < 1.0):
        raise AssumptionError(
            "I0", f"weighted norm of I0 is {i0_norm:.6g}, must lie in (0, 1)"
        )

    h0 = _parse_h0(raw["h0"], radius)
    couplings = _parse_coupling(raw.get("coupling", []), radius)

    _require_keys(raw["perturbation"], ("epsilon", "K", "l"), ("epsilon",),
                  "perturbation")
    epsilon = _real(raw["perturbation"]["epsilon"], "perturbation.epsilon")
    if epsilon < 0:
        raise SchemaError(f"perturbation.epsilon: must be >= 0, got {epsilon}")
    decay_k = _real(raw["perturbation"].get("K", DEFAULT_K), "perturbation.K")
    decay_rate = _real(raw["perturbation"].get("l", DEFAULT_DECAY_RATE),
                       "perturbation.l")
    if decay_k <= 0 or decay_rate < 0:
        raise SchemaError("perturbation: K must be > 0 and l >= 0")

    for n, coupling in enumerate(couplings):
        outer = max(abs(j) for j in coupling.sites)
        envelope = decay_k * math.exp(
            -decay_rate * max(outer - 1, 0) ** (1.0 + alpha)
        )
        measured = coupling_majorant(coupling, i0, weights)
        if measured > envelope:
            raise DecayError(
                f"coupling[{n}]: majorant {measured:.6g} exceeds decay envelope "
                f"{envelope:.6g} (K = {decay_k:.6g}, l = {decay_rate:.6g})"
            )

    return ModelSpec(alpha, radius, i0, h0, couplings, epsilon, decay_k,
                     decay_rate)


def model_to_document(spec):
    """Canonical document for a ModelSpec (round-trips through load_model)."""
    h0 = []
    for term in spec.h0:
        table = {",".join(str(e) for e in exps): c
                 for exps, c in sorted(term.terms.items())}
        if len(term.sites) == 1:
            h0.append({"site": term.sites[0], "terms": table})
        else:
            h0.append({"sites": list(term.sites), "terms": table})
    coupling = []
    for c in spec.couplings:
        modes = {",".join(str(v) for v in mode): [z.real, z.imag]
                 for mode, z in sorted(c.modes.items())}
        if len(c.sites) == 1:
            coupling.append({"site": c.sites[0], "exponent": c.exponents[0],
                             "modes": modes})
        else:
            coupling.append({"sites": list(c.sites),
                             "exponents": list(c.exponents), "modes": modes})
    return {
        "weights": {"alpha": spec.alpha, "lambda": spec.radius},
        "h0": h0,
        "initial": {"I0": {str(j): v for j, v in spec.i0.items()}},
        "coupling": coupling,
        "perturbation": {"epsilon": spec.epsilon, "K": spec.decay_k,
                         "l": spec.decay_rate},
    }


# -- exact re-centering --------------------------------------------------------


def _h0_term_data(term, i0):
    """(value, gradient, hessian, taylor tail terms) of one h0 polynomial
    at the re-centering point, all exact."""
    sites = term.sites
    base = [i0[j] for j in sites]
    value = 0.0
    grad = {j: 0.0 for j in sites}
    hess = {}
    tail = {}
    for exps, coeff in term.terms.items():
        value += coeff * math.prod(b ** e for b, e in zip(base, exps))
        for a, ja in enumerate(sites):
            if exps[a] >= 1:
                g = coeff * exps[a]
                for b, jb in enumerate(sites):
                    e = exps[b] - (1 if b == a else 0)
                    g *= base[b] ** e
                grad[ja] += g
        for a, ja in enumerate(sites):
            for b, jb in enumerate(sites):
                need = [exps[t] for t in range(len(sites))]
                need[a] -= 1
                need[b] -= 1
                if any(n < 0 for n in need):
                    continue
                h = coeff * exps[a] * (exps[b] - (1 if a == b else 0))
                if h == 0:
                    continue
                for t in range(len(sites)):
                    h *= base[t] ** need[t]
                hess[(ja, jb)] = hess.get((ja, jb), 0.0) + h
        # binomial re-expansion, keep total degree >= 3
        picks = [range(e + 1) for e in exps]
        for ks in _cartesian(picks):
            if sum(ks) < 3:
                continue
            c = coeff
            for e, k, b in zip(exps, ks, base):
                c *= math.comb(e, k) * b ** (e - k)
            if c == 0.0:
                continue
            mono = tuple(
                (j, k) for j, k in zip(sites, ks) if k > 0
            )
            mono = tuple(sorted(mono))
            tail[mono] = tail.get(mono, 0.0) + c
    return value, grad, hess, tail


def _cartesian(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for rest in _cartesian(ranges[1:]):
            yield (head,) + rest


def _recenter_coupling(coupling, i0, weights, degree_cap):
    """Binomial re-expansion of one interaction term around I0."""
    coeffs = {}
    sites = coupling.sites
    base = [i0[j] for j in sites]
    for mode, amp in coupling.modes.items():
        nu = tuple(sorted((j, v) for j, v in zip(sites, mode) if v))
        picks = [range(e + 1) for e in coupling.exponents]
        for ks in _cartesian(picks):
            c = amp
            for e, k, b in zip(coupling.exponents, ks, base):
                c *= math.comb(e, k) * b ** (e - k)
            if c == 0:
                continue
            mono = tuple(sorted((j, k) for j, k in zip(sites, ks) if k))
            key = (nu, mono)
            coeffs[key] = coeffs.get(key, 0j) + c
    return FTSeries(coeffs, 1.0, 1.0, weights, degree_cap=degree_cap)


def recenter(spec):
    """Translate the Hamiltonian to rho = I - I0 and split off the normal
    form data: energy constant, exact gradient (frequency), exact Hessian,
    per-pair Taylor tails, and per-pair recentered interactions."""
    weights = spec.weights
    cap = spec.degree_cap()
    e = 0.0
    omega = {}
    hessian = {}
    v_pairs = {}
    for term in spec.h0:
        value, grad, hess, tail = _h0_term_data(term, spec.i0)
        e += value
        for j, g in grad.items():
            omega[j] = omega.get(j, 0.0) + g
        for key, h in hess.items():
            hessian[key] = hessian.get(key, 0.0) + h
        if tail:
            pair = term.sites if len(term.sites) == 2 else (term.sites[0],) * 2
            series = FTSeries({((), mono): c for mono, c in tail.items()},
                              1.0, 1.0, weights, degree_cap=cap)
            v_pairs[pair] = v_pairs.get(pair, FTSeries.zero(
                weights, degree_cap=cap)) + series

    f_pairs = {}
    for coupling in spec.couplings:
        pair = coupling.sites if len(coupling.sites) == 2 \
            else (coupling.sites[0],) * 2
        series = _recenter_coupling(coupling, spec.i0, weights, cap)
        if pair in f_pairs:
            f_pairs[pair] = f_pairs[pair] + series
        else:
            f_pairs[pair] = series

    omega_vec = ActionVector(omega)
    hess_mat = LatticeMatrix(hessian, symmetric=True)

    kappa1 = 0.0
    kappa2 = 0.0
    for b in range(spec.radius + 1):
        box = list(range(-b, b + 1))
        dense = hess_mat.to_dense(box)
        cond = np.linalg.cond(dense)
        if not np.isfinite(cond) or cond > A2_COND_GATE:
            raise AssumptionError(
                "A2", f"Hessian on box radius {b} is not safely invertible "
                      f"(condition estimate {cond:.3e})"
            )
        inv = np.linalg.inv(dense)
        inv_mat = LatticeMatrix({
            (box[i], box[j]): inv[i, j]
            for i in range(len(box)) for j in range(len(box))
            if inv[i, j] != 0.0
        })
        kappa1 = max(kappa1, induced_operator_norm(hess_mat.restrict(b), weights))
        kappa2 = max(kappa2, induced_operator_norm(inv_mat, weights))

    for series in list(v_pairs.values()) + list(f_pairs.values()):
        if not series.check_reality(1e-10):
            raise AssumptionError("A0", "re-centered series lost reality")

    return RecenteredHamiltonian(spec, e, omega_vec, hess_mat, v_pairs,
                                 f_pairs, kappa1, kappa2)


# -- box split -----------------------------------------------------------------


def _pair_tag(pair, inner, outer):
    lo = min(abs(pair[0]), abs(pair[1]))
    hi = max(abs(pair[0]), abs(pair[1]))
    if hi <= inner - 1 or (lo <= inner - 1 and hi <= inner):
        return "p"
    if inner <= lo and hi <= outer - 1:
        return "q"
    if lo <= outer - 1 and hi >= outer:
        return "boundary"
    return "far"


def _v_tag(pair, outer):
    lo = min(abs(pair[0]), abs(pair[1]))
    hi = max(abs(pair[0]), abs(pair[1]))
    if hi <= outer - 1:
        return "tilde"
    if lo <= outer - 1:
        return "bar"
    return "check"


def normal_form_series(omega, hessian, weights, inner_radius, degree_cap,
                       s=1.0, r=1.0):
    """(n0, n1, n2) series for <omega, rho> + (1/2) <Hessian rho, rho> at
    the box of the given radius: all-inside, straddling, all-outside."""
    parts = {"n0": {}, "n1": {}, "n2": {}}
    for j, w in omega.items():
        tag = "n0" if abs(j) <= inner_radius - 1 else "n2"
        parts[tag][((), ((j, 1),))] = complex(w)
    seen = set()
    for (i, j), v in hessian.items():
        if (j, i) in seen:
            continue
        seen.add((i, j))
        lo, hi = min(abs(i), abs(j)), max(abs(i), abs(j))
        if hi <= inner_radius - 1:
            tag = "n0"
        elif lo <= inner_radius - 1:
            tag = "n1"
        else:
            tag = "n2"
        if i == j:
            key = ((), ((j, 2),))
            coeff = 0.5 * v
        else:
            key = ((), tuple(sorted(((i, 1), (j, 1)))))
            coeff = v
        parts[tag][key] = parts[tag].get(key, 0j) + coeff
    mk = lambda c: FTSeries(c, s, r, weights, degree_cap=degree_cap)
    return mk(parts["n0"]), mk(parts["n1"]), mk(parts["n2"])


def box_split(rec, inner, outer, s=1.0, r=1.0):
    """Tag every term of the re-centered Hamiltonian at scales (L, L+).

    The interaction pairs fall into P (touching the inner box), Q (both
    indices in the annulus), boundary (exactly one index at or beyond L+),
    and far; the Taylor tail V splits into inside/straddle/outside parts;
    the quadratic normal form splits into N0/N1/N2.  Tags are disjoint and
    exhaustive, so the pieces recompose to the input exactly.
    """
    if not (1 <= inner < outer <= rec.spec.radius + 1):
        raise ValueError(
            f"need 1 <= L < L+ <= radius+1, got ({inner}, {outer})"
        )
    weights = rec.weights
    cap = rec.spec.degree_cap()
    zero = lambda: FTSeries.zero(weights, s, r, degree_cap=cap)
    buckets = {"p": zero(), "q": zero(), "boundary": zero()}
    far_pairs = {}
    tags = {}
    for pair, series in sorted(rec.f_pairs.items()):
        tag = _pair_tag(pair, inner, outer)
        tags[pair] = tag
        if tag == "far":
            far_pairs[pair] = series
        else:
            buckets[tag] = buckets[tag] + series.with_widths(s, r)
    v_parts = {"tilde": zero(), "bar": zero()}
    v_check = {}
    for pair, series in sorted(rec.v_pairs.items()):
        tag = _v_tag(pair, outer)
        tags[("V",) + pair] = tag
        if tag == "check":
            v_check[pair] = series
        else:
            v_parts[tag] = v_parts[tag] + series.with_widths(s, r)
    n0, n1, n2 = normal_form_series(rec.omega, rec.hessian, weights, outer,
                                    cap, s, r)
    far_bound = sum(v.majorant_norm(s, r) for v in v_check.values())
    far_bound += rec.epsilon * sum(f.majorant_norm(s, r)
                                   for f in far_pairs.values())
    return BoxDecomposition(
        inner=inner, outer=outer,
        p=rec.epsilon * buckets["p"],
        q=buckets["q"],
        boundary=buckets["boundary"],
        v_tilde=v_parts["tilde"],
        v_bar=v_parts["bar"],
        v_check_pairs=v_check,
        far_pairs=far_pairs,
        n0=n0, n1=n1, n2=n2,
        far_bound=far_bound,
        e=rec.e,
        tags=tags,
    )


def evaluate_model(spec, action, theta):
    """Direct evaluation of H = H0 + epsilon * H1 at (I, theta); the
    independent oracle for the re-centering identity."""
    total = 0j
    for term in spec.h0:
        for exps, coeff in term.terms.items():
            val = complex(coeff)
            for j, e in zip(term.sites, exps):
                val *= action.get(j, 0.0) ** e
            total += val
    pert = 0j
    for c in spec.couplings:
        for mode, amp in c.modes.items():
            val = complex(amp)
            for j, v in zip(c.sites, mode):
                val *= np.exp(1j * v * theta.get(j, 0.0))
            for j, e in zip(c.sites, c.exponents):
                val *= action.get(j, 0.0) ** e
            pert += val
    return total + spec.epsilon * pert
