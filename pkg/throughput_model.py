"""
Closed-form wafer-test time and throughput model.

A touchdown costs the index time t_i plus the test application time t_a,
which is the contact test t_c followed by the manufacturing test t_m.
With abort-on-fail, t_m is charged only when at least one of the n sites
still passes both tests (a lower bound that treats failing dies as free).

Probabilities are computed in log space (log1p / expm1) so that high
contact yields over many terminals keep their precision.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from errors import ModelInputError

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0

# Past this many expected failing contacts per SOC the single-failure
# approximation behind the unique throughput is no longer trustworthy.
RETEST_MODEL_LIMIT = 0.5


def _check_probability(label, value):
    if not 0.0 <= value <= 1.0:
        raise ModelInputError(f"{label} must lie in [0, 1], got {value}")


def _check_count(label, value):
    if value < 1:
        raise ModelInputError(f"{label} must be at least 1, got {value}")


def contact_pass(p_c: float, k: int, n: int) -> float:
    """P_c: probability that at least one of n SOCs with k contacted terminals passes the contact test."""
    _check_probability("p_c", p_c)
    _check_count("k", k)
    _check_count("n", n)
    if p_c == 1.0:
        return 1.0
    if p_c == 0.0:
        return 0.0
    # 1 - p_c^k, without cancellation when p_c^k is close to 1
    single_fail = -math.expm1(k * math.log1p(p_c - 1.0))
    return -math.expm1(n * math.log(single_fail))


def manuf_pass(p_m: float, n: int) -> float:
    """P_m: probability that at least one of n SOCs passes the manufacturing test."""
    _check_probability("p_m", p_m)
    _check_count("n", n)
    if p_m == 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-p_m))


def test_application_time(t_c: float, t_m: float, prob_contact: float, prob_manuf: float,
                          abort_on_fail: bool) -> float:
    """t_a in seconds; the abort-on-fail variant is the lower bound t_c + P_c * P_m * t_m."""
    if t_c < 0 or t_m < 0:
        raise ModelInputError("test times must not be negative")
    if not abort_on_fail:
        return t_c + t_m
    _check_probability("P_c", prob_contact)
    _check_probability("P_m", prob_manuf)
    return t_c + prob_contact * prob_manuf * t_m


test_application_time.__test__ = False


def throughput(n: int, t_i: float, t_a: float) -> float:
    """D_th: devices tested per hour at full ATE utilization."""
    _check_count("n", n)
    total = t_i + t_a
    if total <= 0:
        raise ModelInputError("index time plus test time must be positive")
    return SECONDS_PER_HOUR * n / total


def retest_model_strained(p_c: float, k: int) -> bool:
    return (1.0 - p_c) * k > RETEST_MODEL_LIMIT


def unique_throughput(p_c: float, k: int, d_th: float) -> float:
    """D_th^u: unique devices per hour when contact failures are re-tested once."""
    _check_probability("p_c", p_c)
    _check_count("k", k)
    if retest_model_strained(p_c, k):
        logger.warning(
            "re-test model strained: (1 - p_c) * k = %.3f expected failing contacts per SOC",
            (1.0 - p_c) * k,
        )
    return max(0.0, 1.0 - (1.0 - p_c) * k) * d_th


def retest_rate(p_c: float, k: int, d_th: float) -> float:
    """SOCs per hour that come back for a re-test after a contact failure."""
    return (1.0 - p_c) * k * d_th


@dataclass(frozen=True)
class ThroughputPoint:
    t_m: float
    t_a: float
    d_th: float
    d_th_unique: float
    prob_contact: float
    prob_manuf: float
    retest_rate: float


def evaluate(n, k, cycles, ate, params) -> ThroughputPoint:
    """Evaluate n sites, each with k channels and a test of ``cycles`` clock cycles."""
    t_m = cycles / ate.freq
    prob_contact = contact_pass(params.p_c, k, n)
    prob_manuf = manuf_pass(params.p_m, n)
    t_a = test_application_time(ate.contact_time, t_m, prob_contact, prob_manuf, params.abort_on_fail)
    d_th = throughput(n, ate.index_time, t_a)
    return ThroughputPoint(
        t_m=t_m,
        t_a=t_a,
        d_th=d_th,
        d_th_unique=unique_throughput(params.p_c, k, d_th),
        prob_contact=prob_contact,
        prob_manuf=prob_manuf,
        retest_rate=retest_rate(params.p_c, k, d_th),
    )
