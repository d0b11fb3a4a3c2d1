"""Adaptive Simpson quadrature with Richardson extrapolation.

Used as the independent oracle that turns weighting functions into their
implied penalty values. Subdivision handles the piecewise-linear kinks of
the clamped weighting formulas without special casing.
"""


def adaptive_simpson(f, a, b, tol=1e-8, max_depth=30):
    """Integrate f over [a, b] to absolute tolerance `tol`."""
    if b < a:
        raise ValueError(f"integration bounds reversed: [{a}, {b}]")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _simpson_rec(
        f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1
    ) + _simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
