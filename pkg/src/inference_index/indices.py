"""The inference-index family: efficiency, consistency, accuracy and their weighted mean.

Maps the statistics recorded during one evaluation session (attempts, queries,
server-busy responses, response times) plus the averaged prediction MAPE to a
set of [0, 1] indices and the scalar inference index (InI):

    e_sbr = 1 - SB/N                      server-busy index
    e_art = step(ARTpQ; art1, art2)       response-time index, values {1, 0.5, 0}
    e     = (e_sbr + e_art) / 2           efficiency
    c     = 1 / (1 + m * ln(Q))           consistency
    a     = 1 - min(MAPE_av, 100) / 100   accuracy
    ini   = w_e*e + w_c*c + w_a*a

All functions are pure; ``evaluate`` composes them into one report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class IndexConfig:
    """Tunables of the index family.

    ``art1_s``/``art2_s`` are the response-time thresholds in seconds, ``m``
    the problem-difficulty multiplier of the consistency decay, and the three
    weights must sum to one (they are validated, never silently normalized).
    ``include_sb_in_artpq`` optionally counts the wait spent on server-busy
    round-trips in the average response time; by default a busy response has
    no substantive answer and contributes only to ``e_sbr``.
    """

    art1_s: float = 10.0
    art2_s: float = 30.0
    m: float = 1.0
    w_e: float = 1.0 / 3.0
    w_c: float = 1.0 / 3.0
    w_a: float = 1.0 / 3.0
    mape_clamp_pct: float = 100.0
    mask_eps: float = 0.1
    include_sb_in_artpq: bool = False

    def __post_init__(self) -> None:
        if self.art1_s <= 0:
            raise ValueError(f"art1_s must be > 0, got {self.art1_s}")
        if self.art2_s <= self.art1_s:
            raise ValueError(
                f"art2_s must exceed art1_s, got art1_s={self.art1_s} art2_s={self.art2_s}"
            )
        if self.m <= 0:
            raise ValueError(f"m must be > 0, got {self.m}")
        if min(self.w_e, self.w_c, self.w_a) < 0:
            raise ValueError("weights must be non-negative")
        total = self.w_e + self.w_c + self.w_a
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        if self.mape_clamp_pct <= 0:
            raise ValueError(f"mape_clamp_pct must be > 0, got {self.mape_clamp_pct}")
        if self.mask_eps < 0:
            raise ValueError(f"mask_eps must be >= 0, got {self.mask_eps}")

    def to_dict(self) -> dict:
        return {
            "art1_s": self.art1_s,
            "art2_s": self.art2_s,
            "m": self.m,
            "w_e": self.w_e,
            "w_c": self.w_c,
            "w_a": self.w_a,
            "mape_clamp_pct": self.mape_clamp_pct,
            "mask_eps": self.mask_eps,
            "include_sb_in_artpq": self.include_sb_in_artpq,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IndexConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass(frozen=True)
class SessionStats:
    """Counters and timings distilled from one session log.

    ``attempts_q`` is the number of distinct questions asked (Q),
    ``total_queries_n`` the number of submissions including retries after a
    server-busy response (N). ``response_times_s`` holds one latency per
    answered query; server-busy waits, when recorded, live separately in
    ``sb_wait_times_s``.
    """

    attempts_q: int
    total_queries_n: int
    sb_count: int
    response_times_s: tuple[float, ...]
    sb_wait_times_s: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.attempts_q < 1:
            raise ValueError(f"attempts_q must be >= 1, got {self.attempts_q}")
        if self.total_queries_n < self.attempts_q:
            raise ValueError(
                f"total_queries_n ({self.total_queries_n}) < attempts_q ({self.attempts_q})"
            )
        if not 0 <= self.sb_count <= self.total_queries_n:
            raise ValueError(
                f"sb_count ({self.sb_count}) outside [0, {self.total_queries_n}]"
            )
        answered = self.total_queries_n - self.sb_count
        if len(self.response_times_s) != answered:
            raise ValueError(
                f"expected {answered} response times (answered queries), "
                f"got {len(self.response_times_s)}"
            )
        if any(t <= 0 for t in self.response_times_s):
            raise ValueError("response times must be > 0")
        if any(t <= 0 for t in self.sb_wait_times_s):
            raise ValueError("server-busy wait times must be > 0")


@dataclass(frozen=True)
class InIReport:
    """The derived indices for one framework's session."""

    e_sbr: float
    e_art: float
    e: float
    c: float
    a: float
    ini: float
    artpq_s: float
    mape_av_pct: float

    def to_dict(self) -> dict:
        return {
            "e_sbr": self.e_sbr,
            "e_art": self.e_art,
            "e": self.e,
            "c": self.c,
            "a": self.a,
            "ini": self.ini,
            "artpq_s": self.artpq_s,
            "mape_av_pct": self.mape_av_pct,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InIReport":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def artpq(response_times_s: Sequence[float]) -> float:
    """Average response time per answered query, in seconds."""
    if len(response_times_s) == 0:
        raise ValueError("cannot average an empty list of response times")
    if any(t <= 0 for t in response_times_s):
        raise ValueError("response times must be > 0")
    return float(sum(response_times_s) / len(response_times_s))


def server_busy_index(sb_count: int, total_queries: int) -> float:
    """1 minus the fraction of queries that came back server-busy."""
    if total_queries < 1:
        raise ValueError(f"total_queries must be >= 1, got {total_queries}")
    if not 0 <= sb_count <= total_queries:
        raise ValueError(f"sb_count ({sb_count}) outside [0, {total_queries}]")
    return 1.0 - sb_count / total_queries


def response_time_index(artpq_s: float, cfg: IndexConfig) -> float:
    """Step-graded response time: 1 at or under art1, 0.5 between, 0 at or over art2."""
    if artpq_s < 0:
        raise ValueError(f"artpq_s must be >= 0, got {artpq_s}")
    if artpq_s <= cfg.art1_s:
        return 1.0
    if artpq_s >= cfg.art2_s:
        return 0.0
    return 0.5


def efficiency(e_sbr: float, e_art: float) -> float:
    """Mean of the server-busy and response-time indices."""
    return (e_sbr + e_art) / 2.0


def consistency(attempts_q: int, m: float = 1.0) -> float:
    """Consistency index 1 / (1 + m * ln(Q)); equals 1 when one attempt sufficed."""
    if attempts_q < 1:
        raise ValueError(f"attempts_q must be >= 1, got {attempts_q}")
    if m <= 0:
        raise ValueError(f"m must be > 0, got {m}")
    return 1.0 / (1.0 + m * math.log(attempts_q))


def accuracy(mape_av_pct: float, clamp_pct: float = 100.0) -> float:
    """Accuracy index 1 - min(MAPE, clamp)/clamp; 0 for any MAPE at or past the clamp."""
    if mape_av_pct < 0:
        raise ValueError(f"mape_av_pct must be >= 0, got {mape_av_pct}")
    return 1.0 - min(mape_av_pct, clamp_pct) / clamp_pct


def inference_index(e: float, c: float, a: float, cfg: IndexConfig) -> float:
    """Weighted average of efficiency, consistency and accuracy."""
    for name, value in (("e", e), ("c", c), ("a", a)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return cfg.w_e * e + cfg.w_c * c + cfg.w_a * a


def evaluate(stats: SessionStats, mape_av_pct: float, cfg: IndexConfig) -> InIReport:
    """Compose the full index report for one session.

    Server-busy waits are folded into the response-time average only when the
    config's ``include_sb_in_artpq`` flag is set.
    """
    times: tuple[float, ...] = stats.response_times_s
    if cfg.include_sb_in_artpq:
        times = times + stats.sb_wait_times_s
    artpq_s = artpq(times)
    e_sbr = server_busy_index(stats.sb_count, stats.total_queries_n)
    e_art = response_time_index(artpq_s, cfg)
    e = efficiency(e_sbr, e_art)
    c = consistency(stats.attempts_q, cfg.m)
    a = accuracy(mape_av_pct, cfg.mape_clamp_pct)
    return InIReport(
        e_sbr=e_sbr,
        e_art=e_art,
        e=e,
        c=c,
        a=a,
        ini=inference_index(e, c, a, cfg),
        artpq_s=artpq_s,
        mape_av_pct=mape_av_pct,
    )
