"""Pure-Python term kernels for the sparse Fourier-Taylor algebra.

Keys are ``(nu, m)`` pairs where ``nu`` and ``m`` are tuples of
``(site, value)`` pairs sorted by site with zero values omitted.  The
compiled twin in ``_kernels_cy`` must reproduce these results bit for bit,
so both iterate first-operand-major, second-operand-minor, sites ascending,
and skip exact-zero bracket factors.
"""

BACKEND = "python"


def merge_sparse(a, b):
    """Add two sorted (site, value) tuples, dropping zero sums."""
    out = []
    ia = ib = 0
    na, nb = len(a), len(b)
    while ia < na and ib < nb:
        sa, va = a[ia]
        sb, vb = b[ib]
        if sa < sb:
            out.append((sa, va))
            ia += 1
        elif sb < sa:
            out.append((sb, vb))
            ib += 1
        else:
            v = va + vb
            if v:
                out.append((sa, v))
            ia += 1
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return tuple(out)


def decrement_site(m, j):
    """Lower the exponent at site j by one (j must be present)."""
    out = []
    for s, v in m:
        if s == j:
            if v > 1:
                out.append((s, v - 1))
        else:
            out.append((s, v))
    return tuple(out)


def multiply_terms(a_items, b_items):
    """Cauchy product accumulation: dict (nu, m) -> complex."""
    out = {}
    for (nu_a, m_a), ca in a_items:
        for (nu_b, m_b), cb in b_items:
            key = (merge_sparse(nu_a, nu_b), merge_sparse(m_a, m_b))
            out[key] = out.get(key, 0j) + ca * cb
    return out


def bracket_terms(a_items, b_items):
    """Termwise Poisson bracket <A_theta, B_rho> - <A_rho, B_theta>.

    A term pair contributes, for every site j,
    ``1j * (nu_a[j]*m_b[j] - m_a[j]*nu_b[j]) * ca * cb``
    at mode nu_a+nu_b and monomial m_a+m_b-e_j.
    """
    out = {}
    a_pre = [
        ((nu, m), dict(nu), dict(m), c) for (nu, m), c in a_items
    ]
    b_pre = [
        ((nu, m), dict(nu), dict(m), c) for (nu, m), c in b_items
    ]
    for (nu_a, m_a), dnu_a, dm_a, ca in a_pre:
        for (nu_b, m_b), dnu_b, dm_b, cb in b_pre:
            sites = set()
            if dnu_a and dm_b:
                sites.update(s for s in dnu_a if s in dm_b)
            if dm_a and dnu_b:
                sites.update(s for s in dm_a if s in dnu_b)
            if not sites:
                continue
            nu_sum = merge_sparse(nu_a, nu_b)
            m_sum = merge_sparse(m_a, m_b)
            for j in sorted(sites):
                factor = dnu_a.get(j, 0) * dm_b.get(j, 0) - dm_a.get(j, 0) * dnu_b.get(j, 0)
                if factor == 0:
                    continue
                key = (nu_sum, decrement_site(m_sum, j))
                out[key] = out.get(key, 0j) + (1j * factor) * (ca * cb)
    return out
