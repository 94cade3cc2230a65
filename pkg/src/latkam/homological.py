"""Order-by-order solution of the modified homological system.

For a step at box radius ``b = L+ - 1`` with Fourier cap ``M`` the system is

    d_w F0 = Gamma(P0 + eps Q0) - [.]
    Twist a = [P1] + eps [Q1]
    d_w F1 = Gamma(P1 + eps Q1) - Twist dtheta F0 - [.]
    d_w F2 = Gamma(P2 + eps Q2) + Gamma U - Twist dtheta F1 - [.]

where ``d_w = omega . dtheta`` acts mode by mode as ``1j * <omega, nu>``,
``U`` is the quadratic part of the bracket of the retained cubics with
``F0 + <a, theta>``, and every zero mode ``[.]`` is routed to the normal
form (energy shift, frequency translation, twist correction) instead of
being divided.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ModeExplosionError,
    ParameterError,
    ResonanceError,
    SingularHessianError,
    ZeroModeError,
)
from .norms import ActionVector, action_norm
from .series import (
    FTSeries,
    average,
    mode_order,
    poisson_bracket,
    split_by_degree,
    truncate_fourier,
)

A_COND_GATE = 1e6
A_RESIDUAL_REL = 1e-12
ZERO_MODE_REL = 1e-10
SCREEN_BUDGET = 2_000_000
REPORT_KEEP = 100_000


@dataclass
class DivisorReport:
    """Small divisors encountered (or enumerated) with their minimum."""

    entries: list
    min_abs: float
    threshold: float
    count: int = 0
    passed: bool = True

    def record(self, mode, value):
        if len(self.entries) < REPORT_KEEP:
            self.entries.append((mode, value))
        self.count += 1
        if value < self.min_abs:
            self.min_abs = value
        if value < self.threshold:
            self.passed = False


def _new_report(threshold):
    return DivisorReport(entries=[], min_abs=math.inf, threshold=threshold)


@dataclass
class GeneratingFunction:
    """Solved step data F = F0 + <F1, rho> + <F2 rho, rho> + <a, theta>."""

    f0: FTSeries
    f1: FTSeries
    f2: FTSeries
    a: ActionVector
    diagnostics: dict = field(default_factory=dict)

    def parts(self):
        return (self.f0, self.f1, self.f2)

    def tilde(self):
        return self.f0 + self.f1 + self.f2


@dataclass
class SolveResult:
    gen: GeneratingFunction
    omega_hat: FTSeries      # degree-2 zero-mode deposit [P2]+eps[Q2]+[U]
    e_hat: float             # [P0] + eps [Q0] - <omega, a>
    u_series: FTSeries
    report: DivisorReport
    gamma_p: FTSeries
    gamma_q: FTSeries
    forcing_norm: float


def divisor(omega, nu):
    return sum(v * omega[j] for j, v in nu)


def diophantine_screen(omega, box_radius, m_cap, threshold, strict=False,
                       budget=SCREEN_BUDGET):
    """Exhaustively screen all modes 0 < |nu|_1 < m_cap supported on
    |j| <= box_radius against the threshold.

    The enumeration is exponential in the box dimension; anything beyond
    ``budget`` modes raises ModeExplosionError (the step driver instead
    screens exactly the modes it divides by).
    """
    if m_cap < 2:
        raise ParameterError(f"mode cap must be >= 2, got {m_cap}")
    sites = list(range(-box_radius, box_radius + 1))
    n = len(sites)
    total = _l1_ball_count(n, m_cap - 1) - 1
    if total > budget:
        raise ModeExplosionError(
            f"screen would enumerate {total} modes (> budget {budget})"
        )
    report = _new_report(threshold)
    stack = [()]
    for j in sites:
        new_stack = []
        for prefix in stack:
            used = sum(abs(v) for v in prefix)
            for v in range(-(m_cap - 1 - used), m_cap - used):
                new_stack.append(prefix + (v,))
        stack = new_stack
    for values in stack:
        nu = tuple((j, v) for j, v in zip(sites, values) if v)
        if not nu:
            continue
        d = abs(divisor(omega, nu))
        report.record(nu, d)
        if strict and d < threshold:
            raise ResonanceError(nu, d, threshold)
    if report.min_abs is math.inf:
        report.min_abs = math.inf
    return report


def _l1_ball_count(n, radius):
    # lattice points with |x|_1 <= radius in n dimensions
    return sum(
        math.comb(n, k) * 2 ** k * math.comb(radius, k)
        for k in range(0, min(n, radius) + 1)
    )


def _divide(forcing, omega, threshold, strict, report):
    """Mode-by-mode division by 1j * <omega, nu>; zero modes are skipped
    (they belong to the normal form, never to the solution)."""
    out = {}
    for (nu, m), c in forcing.items():
        if not nu:
            continue
        d = divisor(omega, nu)
        ad = abs(d)
        report.record(nu, ad)
        if ad == 0.0:
            raise ResonanceError(nu, 0.0, threshold)
        if strict and ad < threshold:
            raise ResonanceError(nu, ad, threshold)
        out[(nu, m)] = c / (1j * d)
    return out


def solve_f0(p0, q0, epsilon, omega, m_cap, threshold=0.0, strict=True,
             report=None):
    """F0 from the degree-0 forcing; zero average by construction."""
    report = _new_report(threshold) if report is None else report
    forcing = truncate_fourier(p0 + epsilon * q0, m_cap)
    out = _divide(forcing.coeffs, omega, threshold, strict, report)
    return FTSeries(out, forcing.s, forcing.r, forcing.weights,
                    degree_cap=forcing.degree_cap)


def fix_frequency_a(twist, p1_avg, q1_avg, epsilon, box_sites=None):
    """Frequency-fixing translation a = Twist^-1 ([P1] + eps [Q1]).

    Dense LU with one step of iterative refinement; the residual must land
    below 1e-12 relative in sup norm.
    """
    rhs_vec = p1_avg + epsilon * q1_avg
    if box_sites is None:
        box_sites = sorted(set(twist.rows()) | set(rhs_vec.support()))
    if not box_sites:
        return ActionVector({})
    dense = twist.to_dense(box_sites)
    cond = np.linalg.cond(dense)
    if not np.isfinite(cond) or cond > A_COND_GATE:
        raise SingularHessianError(cond)
    rhs = np.array([complex(rhs_vec[j]) for j in box_sites])
    try:
        sol = np.linalg.solve(dense, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularHessianError(math.inf, str(err)) from None
    sol = sol + np.linalg.solve(dense, rhs - dense @ sol)
    resid = np.abs(rhs - dense @ sol).max()
    scale = max(np.abs(rhs).max(), 1e-300)
    if resid > A_RESIDUAL_REL * scale:
        raise SingularHessianError(cond, f"refinement stalled at {resid:.3e}")
    entries = {}
    for j, v in zip(box_sites, sol):
        if abs(v.imag) > 1e-10 * max(abs(v), 1.0):
            raise ZeroModeError(f"translation vector not real at site {j}: {v}")
        entries[j] = v.real
    return ActionVector(entries)


def deg1_average_vector(series):
    """Zero-mode degree-1 coefficients as an ActionVector."""
    entries = {}
    for (nu, m), c in average(series).coeffs.items():
        if len(m) == 1 and m[0][1] == 1:
            entries[m[0][0]] = c
    return ActionVector(entries)


def twist_shift(series, twist):
    """Sum_{i,j} Twist_ij rho_i dtheta_j(series); the -Twist dtheta F
    coupling terms of the order-by-order system (without the sign)."""
    out = None
    seen_cols = {}
    for (i, j), v in sorted(twist.entries.items()):
        if v == 0.0:
            continue
        if j not in seen_cols:
            seen_cols[j] = series.dtheta(j)
        dth = seen_cols[j]
        if len(dth) == 0:
            continue
        shifted = {}
        for (nu, m), c in dth.coeffs.items():
            md = dict(m)
            md[i] = md.get(i, 0) + 1
            shifted[(nu, tuple(sorted(md.items())))] = v * c
        term = FTSeries(shifted, series.s, series.r, series.weights,
                        degree_cap=series.degree_cap)
        out = term if out is None else out + term
    if out is None:
        return FTSeries.zero(series.weights, series.s, series.r,
                             series.degree_cap)
    return out


def bracket_with_translation(series, a):
    """{series, <a, theta>} = -sum_j a_j d(series)/d(rho_j)."""
    out = FTSeries.zero(series.weights, series.s, series.r, series.degree_cap)
    for j, aj in a.items():
        if aj != 0.0:
            out = out + (-aj) * series.drho(j)
    return out


def ad_generator(h, gen, margins=None):
    """{h, F} for the full generator F = Ftilde + <a, theta>."""
    return (poisson_bracket(h, gen.tilde(), margins=margins)
            + bracket_with_translation(h, gen.a))


def compute_u(cubic, f0, a):
    """Quadratic part of {cubic, F0 + <a, theta>} for a purely cubic input."""
    for (_, m) in cubic.coeffs:
        if sum(v for _, v in m) != 3:
            raise ParameterError("compute_u expects degree-3 terms only")
    br = poisson_bracket(cubic, f0) + bracket_with_translation(cubic, a)
    _, _, u2, _ = split_by_degree(br)
    return u2.drop_remainder()


def solve_f1(p1, q1, f0, a, twist, epsilon, omega, m_cap, threshold=0.0,
             strict=True, report=None):
    """F1 from the degree-1 forcing Gamma(P1 + eps Q1) - Twist dtheta F0.

    Raises ZeroModeError when the averaged forcing does not cancel against
    Twist a (an inconsistent translation vector).
    """
    report = _new_report(threshold) if report is None else report
    forcing = truncate_fourier(p1 + epsilon * q1, m_cap) - twist_shift(f0, twist)
    avg = deg1_average_vector(forcing)
    twist_a = ActionVector({
        i: sum(v * a[j] for (ii, j), v in twist.entries.items() if ii == i)
        for i in set(i for (i, _) in twist.entries)
    })
    mismatch = avg - twist_a
    scale = max(action_norm(avg, forcing.weights), epsilon, 1e-300)
    if action_norm(mismatch, forcing.weights) > ZERO_MODE_REL * scale:
        raise ZeroModeError(
            f"averaged degree-1 forcing inconsistent with translation "
            f"(residual {action_norm(mismatch, forcing.weights):.3e})"
        )
    out = _divide(forcing.coeffs, omega, threshold, strict, report)
    return FTSeries(out, forcing.s, forcing.r, forcing.weights,
                    degree_cap=forcing.degree_cap)


def solve_f2(p2, q2, f1, u, twist, epsilon, omega, m_cap, threshold=0.0,
             strict=True, report=None):
    """F2 plus the degree-2 zero-mode deposit [P2] + eps [Q2] + [U] that
    joins the normal form instead of being solved for."""
    report = _new_report(threshold) if report is None else report
    gamma_u = truncate_fourier(u, m_cap).drop_remainder()
    forcing = (truncate_fourier(p2 + epsilon * q2, m_cap) + gamma_u
               - twist_shift(f1, twist))
    deposit = average(forcing)
    out = _divide(forcing.coeffs, omega, threshold, strict, report)
    f2 = FTSeries(out, forcing.s, forcing.r, forcing.weights,
                  degree_cap=forcing.degree_cap)
    return f2, deposit


def solve_homological(p, q, v_tilde, omega, twist, epsilon, m_cap, threshold,
                      strict=True, box_radius=None, lemma_shape=None):
    """Full order-by-order solve for one step.

    ``p`` is the epsilon-scaled inner perturbation, ``q`` the unscaled
    annulus interaction, ``v_tilde`` the retained Taylor tail; ``twist``
    is the effective Hessian on the target box.  Fourier truncation at
    ``m_cap`` is applied here; every division is screened against
    ``threshold`` (strict mode raises, permissive mode records).

    Lemma-shape diagnostics are recorded, never enforced: the paper's
    bounds carry unknown absolute constants.
    """
    report = _new_report(threshold)
    gamma_p = truncate_fourier(p, m_cap)
    gamma_q = truncate_fourier(q, m_cap)
    p0, p1, p2, ph = split_by_degree(gamma_p)
    q0, q1, q2, qh = split_by_degree(gamma_q)

    f0 = solve_f0(p0, q0, epsilon, omega, m_cap, threshold, strict, report)
    a = fix_frequency_a(twist, deg1_average_vector(p1),
                        deg1_average_vector(q1), epsilon)
    f1 = solve_f1(p1, q1, f0, a, twist, epsilon, omega, m_cap, threshold,
                  strict, report)
    cubic = _degree_three(v_tilde + ph.drop_remainder()
                          + epsilon * qh.drop_remainder())
    u = compute_u(cubic, f0, a)
    f2, deposit = solve_f2(p2, q2, f1, u, twist, epsilon, omega, m_cap,
                           threshold, strict, report)

    weights = p.weights
    e_hat = ((average(p0).coeff({}, {}) + epsilon * average(q0).coeff({}, {}))
             .real - sum(omega[j] * aj for j, aj in a.items()))
    forcing_norm = (gamma_p.drop_remainder().majorant_norm()
                    + epsilon * gamma_q.drop_remainder().majorant_norm())

    diagnostics = {
        "f0_norm": f0.majorant_norm(),
        "f1_norm": f1.majorant_norm(),
        "f2_norm": f2.majorant_norm(),
        "a_norm": action_norm(a, weights),
        "min_divisor": report.min_abs if report.count else math.inf,
        "threshold": threshold,
        "divisions": report.count,
    }
    if lemma_shape is not None:
        sigma, l_plus, eps_k, gamma, beta = lemma_shape
        shapes = {
            "f0_shape": sigma ** -(2 * l_plus - 1) * eps_k ** (1 - gamma),
            "f1_shape": sigma ** -(4 * l_plus - 1) * eps_k ** (1 - 2 * gamma),
            "f2_shape": sigma ** -(6 * l_plus - 1) * eps_k ** (1 - 3 * gamma),
            "a_shape": eps_k ** (0.8 - gamma - beta / 5.0),
        }
        diagnostics["lemma_shapes"] = shapes
        diagnostics["lemma_ratios"] = {
            "f0": diagnostics["f0_norm"] / shapes["f0_shape"],
            "f1": diagnostics["f1_norm"] / shapes["f1_shape"],
            "f2": diagnostics["f2_norm"] / shapes["f2_shape"],
            "a": diagnostics["a_norm"] / shapes["a_shape"]
            if shapes["a_shape"] else math.inf,
        }
    gen = GeneratingFunction(f0, f1, f2, a, diagnostics)
    return SolveResult(gen=gen, omega_hat=deposit, e_hat=e_hat, u_series=u,
                       report=report, gamma_p=gamma_p, gamma_q=gamma_q,
                       forcing_norm=forcing_norm)


def _degree_three(series):
    kept = {key: c for key, c in series.coeffs.items()
            if sum(v for _, v in key[1]) == 3}
    return FTSeries(kept, series.s, series.r, series.weights,
                    degree_cap=series.degree_cap, _canonical=True)


def residual_norm(gen, n0, p, q, v_tilde, epsilon, m_cap):
    """Majorant of the low part of the solved equation, the direct
    substitution check of the step's homological identity:

        {N0, F} + Gamma P^low + eps Gamma Q^low
                + {Vtilde + Gamma P^high + eps Gamma Q^high, F}^low

    minus its own average must vanish on the truncated space.
    """
    gamma_p = truncate_fourier(p, m_cap).drop_remainder()
    gamma_q = truncate_fourier(q, m_cap).drop_remainder()
    p0, p1, p2, ph = split_by_degree(gamma_p)
    q0, q1, q2, qh = split_by_degree(gamma_q)
    low = (p0 + p1 + p2) + epsilon * (q0 + q1 + q2)
    high = (v_tilde.drop_remainder() + ph.drop_remainder()
            + epsilon * qh.drop_remainder())
    total = (_low_part(ad_generator(n0.drop_remainder(), gen)) + low
             + _low_part(ad_generator(high, gen)))
    total = truncate_fourier(total, m_cap).drop_remainder()
    residual = total - average(total)
    return residual.majorant_norm()


def _low_part(series):
    kept = {key: c for key, c in series.coeffs.items()
            if sum(v for _, v in key[1]) <= 2}
    return FTSeries(kept, series.s, series.r, series.weights,
                    degree_cap=series.degree_cap, _canonical=True)
