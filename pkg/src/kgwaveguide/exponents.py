"""Exact-rational admissibility and embedding arithmetic.

Every verdict here is computed over Fraction (with +/-inf as symbolic
sentinels); no floating arithmetic enters any decision.  The module covers
the admissible-pair conditions on the product space and on euclidean
space, the regularity/embedding exponents, the small-data exponents, the
scattering exponent ranges, and a brute-force rational witness search for
the interpolation step that converts sup-norm smallness into space-time
smallness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = [
    "INF", "Rational", "ExponentReport",
    "is_admissible_product", "s_of", "is_admissible_euclidean",
    "gamma_of", "rho_star", "small_data_exponents",
    "interpolation_witness", "alpha_range", "build_report",
]

INF = math.inf
Rational = Fraction | float  # Fraction, or +/-inf sentinel


def as_rational(value) -> Rational:
    """Coerce to Fraction; 'inf' and math.inf stay symbolic."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "+inf", "infinity", "oo"):
            return INF
        if v in ("-inf", "-infinity", "-oo"):
            return -INF
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value):
            return value
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


def _inv(x: Rational) -> Rational:
    """1/x with the conventions 1/inf = 0, 1/0 = inf."""
    if x == INF or x == -INF:
        return Fraction(0)
    if x == 0:
        return INF
    return 1 / x


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_admissible_product(q: Rational, r: Rational, d: int) -> Verdict:
    """Admissibility of (q, r) for the product-space space-time estimates.

    d = 1:   q >= 4 and 2q/(q-4) <= r   (at q = 4 the bound is +inf, so
             only r = inf passes)
    d = 2:   q > 2  and 2dq/(dq-4) <= r <= 2q(d+1)/(q(d-1)-2)
    d >= 3:  q >= 2 and the same two-sided bound (upper bound +inf when
             q(d-1) = 2).
    """
    q, r = as_rational(q), as_rational(r)
    if q < 1 or r < 1:
        return Verdict(False, "q and r must be >= 1")
    if d == 1:
        if q < 4:
            return Verdict(False, f"q={q} violates q >= 4 (d=1)")
        lower = INF if q == 4 else 2 * q / (q - 4)
        if r < lower:
            return Verdict(False, f"r={r} below lower bound {lower} (d=1)")
        return Verdict(True)
    if d == 2 and not q > 2:
        return Verdict(False, f"q={q} violates q > 2 (d=2)")
    if d >= 3 and q < 2:
        return Verdict(False, f"q={q} violates q >= 2 (d>=3)")
    if q == INF:
        lower: Rational = Fraction(2)
        upper: Rational = 2 * Fraction(d + 1, d - 1)
    else:
        lower = INF if d * q == 4 else 2 * d * q / (d * q - 4)
        denom = q * (d - 1) - 2
        upper = INF if denom <= 0 else 2 * q * (d + 1) / denom
    if r < lower:
        return Verdict(False, f"r={r} below lower bound {lower}")
    if r > upper:
        return Verdict(False, f"r={r} above upper bound {upper}")
    return Verdict(True)


def s_of(r: Rational, d: int) -> tuple[Rational, bool]:
    """Regularity index s = 1 - (1/2)(d/2+1)(1 - 2/r); flags s outside [0,1]."""
    r = as_rational(r)
    if r < 2:
        raise ValueError(f"r={r} must be >= 2")
    s = 1 - Fraction(1, 2) * (Fraction(d, 2) + 1) * (1 - 2 * _inv(r))
    return s, bool(0 <= s <= 1)


def is_admissible_euclidean(q: Rational, rho: Rational, d: int) -> Verdict:
    """Euclidean dispersive admissibility of (q, rho).

    For d >= 3 the scaling relation 2/q = d(1/2 - 1/rho) must hold exactly;
    d = 2 requires only q > 2 and d = 1 only q >= 4.
    """
    q, rho = as_rational(q), as_rational(rho)
    if q < 2 or rho < 2:
        return Verdict(False, "q and rho must be >= 2")
    if d == 1:
        return Verdict(q >= 4, "" if q >= 4 else f"q={q} violates q >= 4 (d=1)")
    if d == 2:
        return Verdict(q > 2, "" if q > 2 else f"q={q} violates q > 2 (d=2)")
    lhs = 2 * _inv(q)
    rhs = d * (Fraction(1, 2) - _inv(rho))
    if lhs != rhs:
        return Verdict(False, f"scaling relation fails: 2/q={lhs} != d(1/2-1/rho)={rhs}")
    return Verdict(True)


def gamma_of(q: Rational, r: Rational, d: int):
    """Torus-regularity exponent gamma = d/r + 1/q + 1 - d/2.

    Returns (gamma, gamma >= 0, d=1 strengthening gamma > 1/2).
    """
    q, r = as_rational(q), as_rational(r)
    if q < 1 or r < 1:
        raise ValueError("q and r must be >= 1")
    g = d * _inv(r) + _inv(q) + 1 - Fraction(d, 2)
    return g, bool(g >= 0), bool(g > Fraction(1, 2))


def rho_star(rho: Rational, s: Rational, d: int) -> Rational:
    """Critical embedding target d*rho/(d - s*rho); +inf when d <= s*rho."""
    rho, s = as_rational(rho), as_rational(s)
    if rho < 2:
        raise ValueError(f"rho={rho} must be >= 2")
    if not 0 <= s <= 1:
        raise ValueError(f"s={s} must lie in [0, 1]")
    if rho == INF:
        return INF
    if d <= s * rho:
        return INF
    return d * rho / (d - s * rho)


def sobolev_sup(d: int) -> Rational:
    """Upper Lebesgue exponent for the energy-space embedding: 2(d+1)/(d-1),
    +inf when d = 1."""
    if d == 1:
        return INF
    return 2 * Fraction(d + 1, d - 1)


def small_data_exponents(q: Rational, d: int) -> tuple[Fraction, Fraction]:
    """Exponents (e, beta) of the localized-mass interpolation step.

    e = (q-1)/(3-5q) * (q(d-1)-(d+1))/q  and  beta = 2(q-1)/(3-5q); on the
    legal domain 2q in (2, 2*) the first is positive and the second
    negative, both asserted here.
    """
    q = as_rational(q)
    two_star = sobolev_sup(d)
    if not (2 < 2 * q and (two_star == INF or 2 * q < two_star)):
        raise ValueError(f"2q={2 * q} outside legal domain (2, {two_star})")
    e = Fraction(q - 1, 3 - 5 * q) * Fraction(q * (d - 1) - (d + 1), q)
    beta = Fraction(2 * (q - 1), 3 - 5 * q)
    assert e > 0 and beta < 0
    return e, beta


def alpha_range(d: int) -> dict:
    """Valid nonlinearity exponents: strict (large-data) and closed
    (small-data) ranges."""
    if d == 1:
        return {"strict": (Fraction(4), INF), "small_data": (Fraction(4), INF),
                "small_data_closed": (True, False)}
    if 2 <= d <= 4:
        lo, hi = Fraction(4, d), Fraction(4, d - 1)
        return {"strict": (lo, hi), "small_data": (lo, hi),
                "small_data_closed": (True, True)}
    raise ValueError(f"d={d} outside supported range 1..4")


def in_alpha_range(alpha: Rational, d: int, closed: bool = False) -> bool:
    alpha = as_rational(alpha)
    rng = alpha_range(d)
    lo, hi = rng["small_data"] if closed else rng["strict"]
    lo_c, hi_c = rng["small_data_closed"] if closed else (False, False)
    above = alpha >= lo if lo_c else alpha > lo
    below = True if hi == INF else (alpha <= hi if hi_c else alpha < hi)
    return bool(above and below)


@dataclass(frozen=True)
class Witness:
    a: Fraction
    b: Fraction
    r: Fraction
    s: Fraction


def _check_witness(alpha: Fraction, d: int, q: Fraction, b: Fraction):
    """All four interpolation conditions, verified exactly; returns a
    Witness or the name of the first failing condition."""
    a = 2 * alpha + 2 - b
    if not (a > 0 and b > 0):
        return "split positivity (a > 0, b > 0)"
    r = q / a
    if not r > 1:
        return f"Hoelder exponent r = q/a = {r} must exceed 1"
    s = r / (r - 1)
    pair = is_admissible_product(b / 2, b * s, d)
    if not pair:
        return f"pair (b/2, b*s) = ({b / 2}, {b * s}) not admissible: {pair.reason}"
    return Witness(a=a, b=b, r=r, s=s)


def interpolation_witness(alpha, d: int, q, denominator_bound: int = 64):
    """Search a rational witness (a, b, r, s) splitting the space-time norm.

    b is scanned over rationals of increasing denominator inside the open
    interval proved nonempty by the interpolation analysis (so a modest
    grid always hits it); each candidate is verified exactly.  Returns a
    Witness, or a list of (b, failing condition) pairs if the scan is
    exhausted.
    """
    alpha, q = as_rational(alpha), as_rational(q)
    if not in_alpha_range(alpha, d):
        raise ValueError(f"alpha={alpha} outside the valid range for d={d}")
    two_star = sobolev_sup(d)
    if not (q > 2 and (two_star == INF or q < two_star)):
        raise ValueError(f"q={q} outside the legal window (2, {two_star})")

    hi = 2 * alpha + 2
    if d == 1:
        lo = max(Fraction(10), 2 * alpha + 2 - q)
    else:
        lo = max(Fraction(2 * d + 8, d), 2 * alpha + 2 - q,
                 alpha * (d + 1) - 2)
    failures = []
    denom = 1
    while denom <= denominator_bound:
        for num in range(int(lo * denom) + 1, math.ceil(hi * denom)):
            b = Fraction(num, denom)
            if not (lo < b < hi):
                continue
            if b.denominator != denom:
                continue  # already tried at a coarser level
            result = _check_witness(alpha, d, q, b)
            if isinstance(result, Witness):
                return result
            failures.append((b, result))
        denom *= 2
    return failures


@dataclass
class ExponentReport:
    """Exact verdicts and derived values for one (d, alpha, q, r) query."""

    d: int
    alpha: Rational
    q: Rational
    r: Rational
    rho: Rational
    admissible_product: bool = False
    admissible_product_reason: str = ""
    admissible_euclidean: bool = False
    admissible_euclidean_reason: str = ""
    s: Rational = Fraction(0)
    s_in_range: bool = True
    gamma: Rational = Fraction(0)
    gamma_nonneg: bool = False
    rho_star: Rational = Fraction(0)
    small_data_e: Rational | None = None
    small_data_beta: Rational | None = None
    witness: Witness | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def fmt(x):
            if x is None:
                return None
            if isinstance(x, float):
                return "inf" if x == INF else "-inf"
            return str(x)

        w = None
        if self.witness is not None:
            w = {k: fmt(getattr(self.witness, k)) for k in ("a", "b", "r", "s")}
        return {
            "d": self.d, "alpha": fmt(self.alpha), "q": fmt(self.q),
            "r": fmt(self.r), "rho": fmt(self.rho),
            "admissible_product": self.admissible_product,
            "admissible_product_reason": self.admissible_product_reason,
            "admissible_euclidean": self.admissible_euclidean,
            "admissible_euclidean_reason": self.admissible_euclidean_reason,
            "s": fmt(self.s), "s_in_range": self.s_in_range,
            "gamma": fmt(self.gamma), "gamma_nonneg": self.gamma_nonneg,
            "rho_star": fmt(self.rho_star),
            "small_data_e": fmt(self.small_data_e),
            "small_data_beta": fmt(self.small_data_beta),
            "witness": w, "notes": self.notes,
        }


def build_report(d: int, alpha, q, r, rho=None) -> ExponentReport:
    """Evaluate every verdict the module offers for one query."""
    alpha, q, r = as_rational(alpha), as_rational(q), as_rational(r)
    rho = r if rho is None else as_rational(rho)
    rep = ExponentReport(d=d, alpha=alpha, q=q, r=r, rho=rho)

    v = is_admissible_product(q, r, d)
    rep.admissible_product, rep.admissible_product_reason = v.ok, v.reason
    v = is_admissible_euclidean(q, rho, d)
    rep.admissible_euclidean, rep.admissible_euclidean_reason = v.ok, v.reason

    if r >= 2:
        rep.s, rep.s_in_range = s_of(r, d)
    else:
        rep.notes.append("s undefined for r < 2")
    rep.gamma, rep.gamma_nonneg, _ = gamma_of(q, r, d)
    if rep.s_in_range and rho >= 2:
        rep.rho_star = rho_star(rho, rep.s, d)
    else:
        rep.notes.append("rho_star skipped (s out of range or rho < 2)")

    try:
        rep.small_data_e, rep.small_data_beta = small_data_exponents(q, d)
    except ValueError as exc:
        rep.notes.append(f"small-data exponents: {exc}")
    try:
        result = interpolation_witness(alpha, d, q)
        if isinstance(result, Witness):
            rep.witness = result
        else:
            rep.notes.append("interpolation witness scan exhausted")
    except ValueError as exc:
        rep.notes.append(f"interpolation witness: {exc}")
    return rep
