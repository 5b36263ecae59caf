"""Cubic least squares of score on element proportion, with an overall F-test.

Fits solve the design [1, x, x^2, x^3] by Householder QR rather than normal
equations: proportions near zero push x^3 toward 1e-12 magnitudes, so the
squared condition number of the normal equations would eat most of a double.
A column whose R diagonal falls below 1e-10 of its norm is treated as
collinear; the highest offending power is dropped (and recorded) until the
design has full rank, which also reduces df1.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .geo import UNZONED, ZONE_LABELS, ZoningSet, assign_zone
from .percept import SEGMENT_CLASSES

COLLINEARITY_RTOL = 1e-10

#: Reporting filter defaults: a fit is worth printing when it explains a
#: third of the variance and is significant at the 1% level.
R_SQUARE_MIN = 0.3
SIG_MAX = 0.01


@dataclass(frozen=True)
class CubicFit:
    """One fitted cubic model, mirroring a model-summary table row."""

    constant: float
    b1: float
    b2: float
    b3: float
    r_square: float
    f_stat: float
    df1: int
    df2: int
    sig: float
    n: int
    dropped_terms: tuple[int, ...] = ()

    def predict(self, x: float) -> float:
        return self.constant + self.b1 * x + self.b2 * x * x + self.b3 * x**3


def f_statistic(r_square: float, df1: int, df2: int) -> float:
    """Overall-model F from R-squared: (R2/df1) / ((1-R2)/df2)."""
    if not (0.0 <= r_square < 1.0):
        if r_square == 1.0:
            raise OverflowError("F is infinite at r_square = 1")
        raise ValueError(f"r_square out of range: {r_square}")
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be at least 1")
    return (r_square / df1) / ((1.0 - r_square) / df2)


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def f_p_value(f: float, df1: int, df2: int) -> float:
    """Upper-tail probability of the F(df1, df2) distribution."""
    if f < 0:
        raise ValueError("F must be non-negative")
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return _reg_inc_beta(df2 / 2.0, df1 / 2.0, x)


def sig_display(p: float) -> str:
    """SPSS-style significance rendering: '<.001' below a thousandth."""
    if p < 0.001:
        return "<.001"
    return f"{p:.3f}".lstrip("0")


def fit_cubic(xs: Sequence[float], ys: Sequence[float]) -> CubicFit:
    """OLS cubic fit of ys on xs with R-squared, overall F, and Sig.

    Raises on fewer than 5 points, fewer than 4 distinct x values, or
    constant y (R-squared undefined). A numerically exact fit reports
    R-squared 1 with infinite F and Sig 0.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("xs and ys must be 1-D and the same length")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs must be finite")
    n = x.size
    if n < 5:
        raise ValueError("insufficient n")
    if np.unique(x).size < 4:
        raise ValueError("fewer than 4 distinct x values")
    if float(np.ptp(y)) == 0.0:
        raise ValueError("zero variance in y")

    powers = [0, 1, 2, 3]
    dropped: list[int] = []
    while True:
        design = np.column_stack([x**p for p in powers])
        q, r = np.linalg.qr(design)
        col_norms = np.linalg.norm(design, axis=0)
        offending = [
            powers[j]
            for j in range(len(powers))
            if abs(r[j, j]) <= COLLINEARITY_RTOL * col_norms[j]
        ]
        offending = [p for p in offending if p != 0]
        if not offending:
            break
        worst = max(offending)
        powers.remove(worst)
        dropped.append(worst)
        if len(powers) == 1:
            raise ValueError("design degenerate: every power collinear")

    beta = np.linalg.solve(r, q.T @ y)
    coef = {0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0}
    for p, b in zip(powers, beta):
        coef[p] = float(b)
    resid = y - design @ beta
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    r_square = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    df1 = len(powers) - 1
    df2 = n - df1 - 1
    if r_square == 1.0:
        f_stat, sig = math.inf, 0.0
    else:
        f_stat = f_statistic(r_square, df1, df2)
        sig = f_p_value(f_stat, df1, df2)
    return CubicFit(
        constant=coef[0],
        b1=coef[1],
        b2=coef[2],
        b3=coef[3],
        r_square=r_square,
        f_stat=f_stat,
        df1=df1,
        df2=df2,
        sig=sig,
        n=n,
        dropped_terms=tuple(sorted(dropped)),
    )


# --------------------------------------------------------------------------
# Zone x element sweep


@dataclass(frozen=True)
class RegressionRow:
    epoch: int
    zone: str
    element: str
    fit: CubicFit
    reported: bool


@dataclass(frozen=True)
class SkippedCombination:
    epoch: int
    zone: str
    element: str
    reason: str


@dataclass(frozen=True)
class RegressionReport:
    rows: tuple[RegressionRow, ...]
    skipped: tuple[SkippedCombination, ...]
    r_square_min: float
    sig_max: float


def run_zone_element_regressions(
    records: Sequence,
    zones: ZoningSet,
    epochs: Sequence[int],
    r_square_min: float = R_SQUARE_MIN,
    sig_max: float = SIG_MAX,
    workers: int = 1,
) -> RegressionReport:
    """Fit every (epoch, zone, element) cubic and apply the reporting filter.

    Zone membership comes from assign_zone per record; records outside all
    polygons pool under the Unzoned label. Combinations that cannot be fit
    are listed with the reason instead of failing the sweep.
    """
    zone_order = list(ZONE_LABELS) + [UNZONED]
    by_zone: dict[str, list] = {z: [] for z in zone_order}
    for rec in sorted(records, key=lambda r: r.id):
        label = assign_zone(rec.point, zones) or UNZONED
        by_zone[label].append(rec)

    combos = [
        (epoch, zone, element)
        for epoch in sorted(epochs)
        for zone in zone_order
        for element in SEGMENT_CLASSES
    ]

    def fit_combo(combo: tuple[int, str, str]):
        epoch, zone, element = combo
        idx = SEGMENT_CLASSES.index(element)
        xs, ys = [], []
        for rec in by_zone[zone]:
            if rec.epoch == epoch:
                xs.append(rec.segments[idx])
                ys.append(rec.score)
        if not xs:
            return combo, None, "no records"
        try:
            fit = fit_cubic(xs, ys)
        except ValueError as exc:
            return combo, None, str(exc)
        return combo, fit, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit_combo, combos))
    else:
        results = [fit_combo(c) for c in combos]

    rows: list[RegressionRow] = []
    skipped: list[SkippedCombination] = []
    for (epoch, zone, element), fit, reason in results:
        if fit is None:
            skipped.append(SkippedCombination(epoch, zone, element, reason))
        else:
            reported = fit.r_square > r_square_min and fit.sig < sig_max
            rows.append(RegressionRow(epoch, zone, element, fit, reported))
    return RegressionReport(
        rows=tuple(rows),
        skipped=tuple(skipped),
        r_square_min=r_square_min,
        sig_max=sig_max,
    )


def write_regression_csv(report: RegressionReport, stream: IO[str]) -> None:
    """Model-summary CSV, one row per successful fit."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        [
            "epoch", "zone", "element", "r_square", "f", "df1", "df2", "sig",
            "constant", "b1", "b2", "b3", "n", "reported", "dropped_terms",
        ]
    )
    for row in report.rows:
        fit = row.fit
        writer.writerow(
            [
                row.epoch,
                row.zone,
                row.element,
                repr(fit.r_square),
                repr(fit.f_stat),
                fit.df1,
                fit.df2,
                repr(fit.sig),
                repr(fit.constant),
                repr(fit.b1),
                repr(fit.b2),
                repr(fit.b3),
                fit.n,
                "true" if row.reported else "false",
                ";".join(str(p) for p in fit.dropped_terms),
            ]
        )
