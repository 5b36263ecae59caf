"""Independent reference implementations the test suite checks against.

Everything here deliberately avoids the code paths under test: containment
uses winding numbers instead of ray casting, segmentation enumerates every
path instead of dynamic programming, and least squares solves the normal
equations in exact rational arithmetic instead of QR.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def winding_number_contains(lon: float, lat: float, vertices: Sequence[tuple[float, float]]) -> bool:
    """Point-in-polygon via the winding number (nonzero rule).

    Agrees with even-odd ray casting on simple polygons, which is all the
    property tests feed it.
    """
    wn = 0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        is_left = (x1 - x0) * (lat - y0) - (lon - x0) * (y1 - y0)
        if y0 <= lat:
            if y1 > lat and is_left > 0:
                wn += 1
        elif y1 <= lat and is_left < 0:
            wn -= 1
    return wn != 0


def enumerate_segmentations(text: str, entries: dict[str, int]) -> list[list[str]]:
    """Every path through the segmentation DAG (matches + 1-char fallback)."""
    if not text:
        return [[]]
    max_len = max((len(w) for w in entries), default=1)
    out: list[list[str]] = []
    for length in range(1, min(max_len, len(text)) + 1):
        word = text[:length]
        if word not in entries and length > 1:
            continue
        for tail in enumerate_segmentations(text[length:], entries):
            out.append([word] + tail)
    return out


def best_segmentation(text: str, entries: dict[str, int]) -> list[str]:
    """Exhaustive argmax of prod(freq/total) with the longest-first tie rule."""
    total = sum(entries.values())

    def score(path: list[str]) -> Fraction:
        p = Fraction(1)
        for word in path:
            p *= Fraction(entries.get(word, 1), total)
        return p

    paths = enumerate_segmentations(text, entries)
    return max(paths, key=lambda p: (score(p), tuple(len(w) for w in p)))


def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with partial pivoting in exact rationals."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[pivot][col] == 0:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col] / m[col][col]
                m[r] = [m[r][k] - factor * m[col][k] for k in range(n + 1)]
    return [m[i][n] / m[i][i] for i in range(n)]


def ols_cubic_exact(xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    """Cubic OLS coefficients from exact-rational normal equations.

    Floats convert to rationals exactly, so this is the true least-squares
    solution of the given data with no rounding at all.
    """
    powers = (0, 1, 2, 3)
    design = [[Fraction(x) ** p for p in powers] for x in xs]
    y = [Fraction(v) for v in ys]
    k = len(powers)
    n = len(xs)
    ata = [[sum(design[i][r] * design[i][c] for i in range(n)) for c in range(k)] for r in range(k)]
    aty = [sum(design[i][r] * y[i] for i in range(n)) for r in range(k)]
    return [float(v) for v in solve_exact(ata, aty)]


def f_upper_tail_df1_2(f: float, df2: int) -> float:
    """Closed form for the F(2, df2) upper tail."""
    return (1.0 + 2.0 * f / df2) ** (-df2 / 2.0)


def f_upper_tail_mp(f: float, df1: int, df2: int) -> float:
    """High-precision upper tail via mpmath's regularized incomplete beta."""
    import mpmath

    mpmath.mp.dps = 40
    x = mpmath.mpf(df2) / (df2 + df1 * mpmath.mpf(f))
    return float(mpmath.betainc(df2 / 2, df1 / 2, 0, x, regularized=True))


def f_upper_tail_quadrature(f: float, df1: int, df2: int) -> float:
    """Upper tail by numerical integration of the F density."""
    import mpmath

    mpmath.mp.dps = 30
    d1, d2 = mpmath.mpf(df1), mpmath.mpf(df2)

    def pdf(t):
        return (
            mpmath.sqrt((d1 * t) ** d1 * d2**d2 / (d1 * t + d2) ** (d1 + d2))
            / (t * mpmath.beta(d1 / 2, d2 / 2))
        )

    return float(mpmath.quad(pdf, [f, mpmath.inf]))
