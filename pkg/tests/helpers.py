"""Shared helpers: exact cell data of polynomials on a unit-spaced stencil."""

from numpy.polynomial import polynomial as P


def cell_data(coef, centers, h=1.0):
    """Exact averages and scaled first moments of the polynomial ``coef`` on cells of width h."""
    anti = P.polyint(coef)
    xm = P.polyint(P.polymul(coef, [0.0, 1.0]))
    avg, mom = [], []
    for c in centers:
        a, b = c - h / 2, c + h / 2
        mean = (P.polyval(b, anti) - P.polyval(a, anti)) / h
        first = (P.polyval(b, xm) - P.polyval(a, xm)) / h
        avg.append(mean)
        mom.append((first - c * mean) / h)
    return tuple(avg), tuple(mom)
