"""Closed-form throughput and delay exponents.

Quantities are exponents of ``n``. A point carries its exponent, a power
of ``log n`` and a coefficient of the arbitrarily small ``epsilon``, kept
apart so that boundary identities hold exactly. The cell area is written
``a(n) = n**x * (log n)**y``.

Protocol comparisons use the frontiers directly, over the delay range both
protocols reach with a nonnegative throughput exponent. Log factors and
epsilon terms are ignored there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError, RangeError

REGIMES = ("A", "B", "C")
Q_GROWTH = ("constant", "growing")
_TOL = 1e-12


def classify_regime(q_growth: str, gamma: float) -> str:
    if q_growth not in Q_GROWTH:
        raise ConfigurationError(f"q_growth must be one of {Q_GROWTH}, got {q_growth!r}")
    if not gamma >= 0:
        raise ConfigurationError(f"gamma must be >= 0, got {gamma}")
    if q_growth == "growing" or gamma < 2:
        return "A"
    return "B" if gamma <= 3 else "C"


@dataclass(frozen=True)
class TradeoffPoint:
    throughput_exponent: float
    delay_exponent: float
    protocol: str
    mode: str
    params: dict = field(default_factory=dict, compare=False)
    throughput_log_power: float = 0.0
    delay_log_power: float = 0.0
    throughput_epsilon: float = 0.0
    delay_epsilon: float = 0.0

    def __post_init__(self):
        for v in (self.throughput_exponent, self.delay_exponent):
            if not math.isfinite(v):
                raise RangeError(f"non-finite exponent {v}")
        if self.delay_exponent < -_TOL:
            raise RangeError(f"delay exponent {self.delay_exponent} is negative")

    @property
    def regime(self) -> str:
        return self.params.get("regime", "")

    def evaluate(self, epsilon: float) -> tuple[float, float]:
        """Numeric ``(T, D)`` exponents for a concrete ``epsilon``."""
        return (self.throughput_exponent + self.throughput_epsilon * epsilon,
                self.delay_exponent + self.delay_epsilon * epsilon)


@dataclass(frozen=True)
class BurstyPlan:
    duty_fraction_exponent: float
    regime: str
    epsilon_coefficient: float = 1.0


def _lex_ge(a: tuple, b: tuple) -> bool:
    if abs(a[0] - b[0]) > _TOL:
        return a[0] > b[0]
    return a[1] >= b[1] - _TOL


def _default_log_power(x: float, edge: float) -> float:
    # at the smallest admissible exponent the log factor is part of a(n)
    return 1.0 if abs(x - edge) <= _TOL else 0.0


def mh_tradeoff_dense(gamma: float, q_growth: str, cell_area_exponent: float,
                      cell_area_log_power: float | None = None) -> TradeoffPoint:
    """Multihop exponents in the unit square for ``a(n) = n**x (log n)**y``.

    ``y`` defaults to 1 at ``x = -1`` (``a = log n / n``) and 0 otherwise.
    Admissible cell areas run from ``log n / n`` to a constant, further
    capped in regimes B and C so that the delay exponent stays >= 0.
    """
    x = float(cell_area_exponent)
    y = _default_log_power(x, -1.0) if cell_area_log_power is None else float(cell_area_log_power)
    if not (_lex_ge((x, y), (-1.0, 1.0)) and _lex_ge((0.0, 0.0), (x, y))):
        raise RangeError(f"cell area n^{x} log^{y} n outside [log n / n, 1]")
    regime = classify_regime(q_growth, gamma)
    if regime == "A":
        t, tl = -x / 2, -y / 2
        dd, dl = t, tl
    elif regime == "B":
        c = gamma / 2 - 1
        t, tl = c - x / 2, -c - y / 2
        dd, dl = -c - x / 2, c - y / 2
    else:
        t, tl = 0.5 - x / 2, -0.5 - y / 2
        dd, dl = -0.5 - x / 2, 0.5 - y / 2
    if not _lex_ge((dd, dl), (0.0, 0.0)):
        raise RangeError(f"cell area n^{x} log^{y} n gives a vanishing delay in regime {regime}")
    params = {"gamma": gamma, "regime": regime, "cell_area_exponent": x, "cell_area_log_power": y}
    return TradeoffPoint(t, max(dd, 0.0), "MH", "dense", params, tl, dl)


def mh_tradeoff_extended(gamma: float, q_growth: str, alpha: float, cell_area_exponent: float,
                         cell_area_log_power: float | None = None) -> TradeoffPoint:
    """Multihop exponents at unit density; ``a(n)`` runs from ``log n`` upwards.

    ``y`` defaults to 1 at ``x = 0`` (``a = log n``) and 0 otherwise.
    """
    if not alpha >= 2:
        raise ConfigurationError(f"alpha must be >= 2, got {alpha}")
    x = float(cell_area_exponent)
    y = _default_log_power(x, 0.0) if cell_area_log_power is None else float(cell_area_log_power)
    if not (_lex_ge((x, y), (0.0, 1.0)) and _lex_ge((1.0, 0.0), (x, y))):
        raise RangeError(f"cell area n^{x} log^{y} n outside [log n, n]")
    regime = classify_regime(q_growth, gamma)
    k = (alpha + 1) / 2
    if regime == "C":
        t, tl = 1 - k * x, -0.5 - k * y
        dd, dl = -x / 2, 0.5 - y / 2
    else:
        c = gamma / 2 - 1 if regime == "B" else 0.0
        t, tl = 0.5 - k * x + c, -k * y - c
        dd, dl = 0.5 - x / 2 - c, -y / 2 + c
    if not _lex_ge((dd, dl), (0.0, 0.0)):
        raise RangeError(f"cell area n^{x} log^{y} n gives a vanishing delay in regime {regime}")
    params = {"gamma": gamma, "alpha": alpha, "regime": regime,
              "cell_area_exponent": x, "cell_area_log_power": y}
    return TradeoffPoint(t, max(dd, 0.0), "MH", "extended", params, tl, dl)


def hierarchy_bound(h: int) -> float:
    """Largest ``b`` reachable with ``h`` hierarchy levels."""
    if h < 1:
        raise ConfigurationError(f"hierarchy level must be >= 1, got {h}")
    return h / (h + 1)


def _check_b(b: float, h: int | None):
    if not 0 <= b < 1:
        raise ConfigurationError(f"b must be in [0, 1), got {b}")
    if h is not None and b > hierarchy_bound(h) + _TOL:
        raise ConfigurationError(f"b = {b} exceeds h/(h+1) for h = {h}")


def hc_tradeoff_dense(gamma: float, q_growth: str, b: float, h: int | None = None) -> TradeoffPoint:
    _check_b(b, h)
    regime = classify_regime(q_growth, gamma)
    if regime == "A":
        t, dd = b, b
    elif regime == "B":
        t, dd = b - (gamma - 2) * (b - 1), (3 - gamma) * b
    else:
        t, dd = 1.0, 0.0
    params = {"gamma": gamma, "regime": regime, "b": b, "h": h}
    return TradeoffPoint(t, dd, "HC", "dense", params, throughput_epsilon=-1.0, delay_epsilon=1.0)


def hc_tradeoff_extended(gamma: float, q_growth: str, alpha: float, b: float,
                         h: int | None = None) -> TradeoffPoint:
    if not alpha >= 2:
        raise ConfigurationError(f"alpha must be >= 2, got {alpha}")
    _check_b(b, h)
    regime = classify_regime(q_growth, gamma)
    if regime == "A":
        t, dd = b - alpha / 2 + 1, b
    elif regime == "B":
        t, dd = (b - alpha / 2) * (3 - gamma) + 1, (3 - gamma) * b
    else:
        t, dd = 1.0, 0.0
    params = {"gamma": gamma, "alpha": alpha, "regime": regime, "b": b, "h": h}
    return TradeoffPoint(t, dd, "HC", "extended", params, throughput_epsilon=-1.0, delay_epsilon=1.0)


def bursty_fraction(regime: str, gamma: float, alpha: float) -> BurstyPlan:
    """Exponent ``f`` of the active-time fraction ``n**-f`` (plus ``epsilon``)."""
    if regime not in REGIMES:
        raise ConfigurationError(f"regime must be one of {REGIMES}, got {regime!r}")
    if not alpha >= 2:
        raise ConfigurationError(f"alpha must be >= 2, got {alpha}")
    if regime == "A":
        f = alpha / 2 - 1
    elif regime == "B":
        f = (1 - alpha / 2) * (gamma - 3)
    else:
        f = 0.0
    return BurstyPlan(f + 0.0, regime)


def mh_dominance_threshold(alpha: float) -> float:
    """Largest ``gamma`` in regime B for which multihop wins at unit density."""
    return (3 * alpha ** 2 - 2 * alpha - 6) / (alpha ** 2 - 2)


MH_WINS = "MH"
HC_WINS = "HC"
CROSSOVER = "crossover"
TIE = "tie"


@dataclass(frozen=True)
class Dominance:
    winner: str
    description: str
    threshold: float | None = None


def dominant_protocol(gamma: float, q_growth: str, alpha: float, mode: str) -> Dominance:
    """Which protocol has the better frontier, from the closed-form conditions."""
    regime = classify_regime(q_growth, gamma)
    if not alpha >= 2:
        raise ConfigurationError(f"alpha must be >= 2, got {alpha}")
    if regime == "C" or (regime == "B" and gamma >= 3):
        return Dominance(TIE, "both reach (1 - eps, eps)")
    if mode == "dense":
        return Dominance(HC_WINS, "frontiers coincide where both exist; HC extends to larger delays")
    if mode != "extended":
        raise ConfigurationError(f"mode must be dense or extended, got {mode!r}")
    if alpha <= 2 + _TOL:
        return Dominance(HC_WINS, "HC at least as good at every delay")
    if regime == "A":
        thr = 1 + math.sqrt(3)
        if alpha > thr:
            return Dominance(MH_WINS, f"alpha > 1 + sqrt(3) = {thr:.6g}", thr)
        return Dominance(CROSSOVER, f"HC better at large delay, MH at small delay (alpha <= {thr:.6g})", thr)
    thr = mh_dominance_threshold(alpha)
    if gamma <= thr + _TOL:
        return Dominance(MH_WINS, f"gamma <= {thr:.6g}", thr)
    return Dominance(CROSSOVER, f"HC better at large delay, MH at small delay (gamma > {thr:.6g})", thr)


def mh_frontier(gamma: float, q_growth: str, mode: str, alpha: float = 2.0) -> list[tuple[float, float]]:
    """End points ``(D, T)`` of the multihop frontier (it is a segment)."""
    fn = (lambda x: mh_tradeoff_dense(gamma, q_growth, x)) if mode == "dense" else \
         (lambda x: mh_tradeoff_extended(gamma, q_growth, alpha, x))
    lo = -1.0 if mode == "dense" else 0.0
    hi = _largest_cell_exponent(gamma, q_growth, mode, alpha)
    pts = {fn(x) for x in (lo, hi)}
    return sorted((p.delay_exponent, p.throughput_exponent) for p in pts)


def _largest_cell_exponent(gamma, q_growth, mode, alpha) -> float:
    regime = classify_regime(q_growth, gamma)
    # delay exponent is affine in x with slope -1/2; find where it reaches 0
    if mode == "dense":
        d0 = {"A": 0.0, "B": -(gamma / 2 - 1), "C": -0.5}[regime]
        return min(0.0, 2 * d0)
    d0 = {"A": 0.5, "B": 0.5 - (gamma / 2 - 1), "C": 0.0}[regime]
    return min(1.0, 2 * d0)


def hc_frontier(gamma: float, q_growth: str, mode: str, alpha: float = 2.0) -> list[tuple[float, float]]:
    """End points ``(D, T)`` of the HC frontier over ``b`` in ``[0, 1]``."""
    def at(b):
        if mode == "dense":
            p = hc_tradeoff_dense(gamma, q_growth, min(b, 1 - 1e-15))
        else:
            p = hc_tradeoff_extended(gamma, q_growth, alpha, min(b, 1 - 1e-15))
        return p.delay_exponent, p.throughput_exponent
    if classify_regime(q_growth, gamma) == "B":
        # b = 1 is the supremum; evaluate the affine form there exactly
        t1 = 1.0 if mode == "dense" else (1 - alpha / 2) * (3 - gamma) + 1
        return sorted({at(0.0), (3 - gamma, t1)})
    if classify_regime(q_growth, gamma) == "A":
        t1 = 1.0 if mode == "dense" else 2 - alpha / 2
        return sorted({at(0.0), (1.0, t1)})
    return [at(0.0)]


def _interp(seg, d):
    (d0, t0), (d1, t1) = seg[0], seg[-1]
    if d1 - d0 <= _TOL:
        return t0
    return t0 + (t1 - t0) * (d - d0) / (d1 - d0)


def _nonnegative_from(seg) -> float:
    """Smallest delay at which the segment's throughput exponent is >= 0."""
    (d0, t0), (d1, t1) = seg[0], seg[-1]
    if t0 >= 0 or d1 - d0 <= _TOL or t1 <= t0:
        return d0
    return min(d1, d0 + (0 - t0) * (d1 - d0) / (t1 - t0))


def dominance_by_frontiers(gamma: float, q_growth: str, alpha: float, mode: str) -> str:
    """Winner label from a direct comparison of the two frontiers.

    The frontiers are compared on their common delay range (from where both
    throughput exponents are >= 0). Equal frontiers there go to the one
    reaching larger delays, or tie if neither does.
    """
    mh = mh_frontier(gamma, q_growth, mode, alpha)
    hc = hc_frontier(gamma, q_growth, mode, alpha)
    hi = min(mh[-1][0], hc[-1][0])
    lo = min(hi, max(_nonnegative_from(mh), _nonnegative_from(hc)))
    diff = [_interp(mh, d) - _interp(hc, d) for d in (lo, hi)]
    mh_ge = all(x >= -1e-9 for x in diff)
    hc_ge = all(x <= 1e-9 for x in diff)
    if mh_ge and hc_ge:
        if hc[-1][0] > mh[-1][0] + _TOL:
            return HC_WINS
        if mh[-1][0] > hc[-1][0] + _TOL:
            return MH_WINS
        return TIE
    if mh_ge:
        return MH_WINS
    if hc_ge:
        return HC_WINS
    return CROSSOVER
