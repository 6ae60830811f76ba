"""Distance-based social groups and source-destination pairing.

A source ``s`` forms a group ``S`` of ``q`` other nodes with probability
proportional to the product of ``d(s, v) ** -gamma`` over ``v`` in ``S``.
This is the conditional-Poisson (fixed-size product-weight) design and it
is sampled exactly with elementary symmetric polynomials of the weights.
Plain sequential weighted sampling without replacement gives a different
distribution and is not used.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DegeneratePairError
from .geometry import (STREAM_DESTINATION, STREAM_SOCIAL, STREAM_SOURCES,
                       Deployment, substream)

# exp() of anything below this relative log-level underflows to 0
_UNDERFLOW_GUARD = -700.0
_BATCH_ELEMENTS = 1 << 17


@dataclass(frozen=True)
class SocialParams:
    gamma: float
    q: int = 1
    q_growth: str = "constant"

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ConfigurationError(f"gamma must be >= 0, got {self.gamma}")
        if int(self.q) != self.q or self.q < 1:
            raise ConfigurationError(f"q must be a positive integer, got {self.q}")
        if self.q_growth not in ("constant", "growing"):
            raise ConfigurationError(f"q_growth must be 'constant' or 'growing', got {self.q_growth!r}")
        object.__setattr__(self, "q", int(self.q))

    def check(self, n: int):
        if self.q > n - 1:
            raise ConfigurationError(f"q={self.q} exceeds n-1={n - 1}")


@dataclass(frozen=True)
class SocialAssignment:
    """Social groups and chosen destinations, one entry per source.

    ``sources[i]`` owns ``groups[i]`` (sorted ids) and sends to
    ``destinations[i]``.
    """

    sources: np.ndarray
    groups: tuple
    destinations: np.ndarray

    def __post_init__(self):
        if not (len(self.sources) == len(self.groups) == len(self.destinations)):
            raise ConfigurationError("sources, groups and destinations differ in length")
        for s, g, v in zip(self.sources, self.groups, self.destinations):
            if s in g or len(set(g)) != len(g) or v not in g:
                raise ConfigurationError(f"inconsistent social group for source {s}")

    def __len__(self):
        return len(self.sources)

    def subset(self, index) -> "SocialAssignment":
        """Entries selected by an index array or boolean mask."""
        idx = np.arange(len(self))[np.asarray(index)]
        return SocialAssignment(np.asarray(self.sources)[idx],
                                tuple(self.groups[i] for i in idx),
                                np.asarray(self.destinations)[idx])

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(int(s), int(v)) for s, v in zip(self.sources, self.destinations)]

    def to_csv(self) -> str:
        q = max((len(g) for g in self.groups), default=0)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source_id", *[f"contact_{k + 1}" for k in range(q)], "destination_id"])
        for s, g, v in zip(self.sources, self.groups, self.destinations):
            writer.writerow([int(s), *map(int, g), int(v)])
        return buf.getvalue()

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path

    @classmethod
    def from_csv(cls, text: str) -> "SocialAssignment":
        rows = list(csv.reader(io.StringIO(text)))
        body = rows[1:]
        sources = np.array([int(r[0]) for r in body], dtype=np.int64)
        groups = tuple(tuple(int(x) for x in r[1:-1]) for r in body)
        dests = np.array([int(r[-1]) for r in body], dtype=np.int64)
        return cls(sources, groups, dests)

    @classmethod
    def load(cls, path: str | Path) -> "SocialAssignment":
        return cls.from_csv(Path(path).read_text())


def log_esp_suffix(logw: np.ndarray, q: int) -> np.ndarray:
    """Log elementary symmetric polynomials of every suffix of the weights.

    Returns ``E`` with shape ``(..., q + 1, N + 1)`` where
    ``E[..., k, i] = log e_k(w[i:])``; ``-inf`` marks an empty sum.
    Leading axes of ``logw`` are treated as a batch.
    """
    logw = np.asarray(logw, dtype=float)
    *batch, N = logw.shape
    E = np.full((*batch, q + 1, N + 1), -np.inf)
    E[..., 0, :] = 0.0
    for k in range(1, q + 1):
        # e_k(w[i:]) = sum_{j >= i} w_j * e_{k-1}(w[j+1:])
        terms = logw + E[..., k - 1, 1:]
        E[..., k, :N] = _reverse_logcumsumexp(terms)
    return E


def _reverse_logcumsumexp(terms: np.ndarray) -> np.ndarray:
    """``out[..., i] = log sum_{j >= i} exp(terms[..., j])`` along the last axis."""
    m = np.max(terms, axis=-1, keepdims=True)
    finite_m = np.where(np.isfinite(m), m, 0.0)
    rel = terms - finite_m
    with np.errstate(divide="ignore", invalid="ignore"):
        lowest = np.min(np.where(np.isfinite(rel), rel, 0.0), axis=-1)
        out = np.log(np.cumsum(np.exp(rel)[..., ::-1], axis=-1)[..., ::-1]) + finite_m
    risky = np.atleast_1d(lowest < _UNDERFLOW_GUARD)
    if np.any(risky):
        flat_terms = terms.reshape(-1, terms.shape[-1])
        flat_out = out.reshape(-1, terms.shape[-1])
        for r in np.flatnonzero(risky.reshape(-1)):
            flat_out[r] = np.logaddexp.accumulate(flat_terms[r, ::-1])[::-1]
        out = flat_out.reshape(terms.shape)
    return out


def sample_from_log_weights(logw: np.ndarray, q: int, rng: np.random.Generator,
                            table: np.ndarray | None = None) -> np.ndarray:
    """Draw ``q`` distinct indices with Pr(S) proportional to prod_{i in S} w_i.

    Equivalent to the sequential scan that includes item ``i`` with
    probability ``w_i e_{k-1}(w[i+1:]) / e_k(w[i:])`` (``k`` slots left);
    the gap to the next included item is drawn at once by inverse CDF.
    Items with ``logw = -inf`` (zero weight) are never returned.
    """
    logw = np.asarray(logw, dtype=float)
    N = logw.size
    support = int(np.count_nonzero(np.isfinite(logw)))
    if q > support:
        raise ConfigurationError(f"cannot choose {q} of {support} items")
    if q == support:
        return np.flatnonzero(np.isfinite(logw))
    E = log_esp_suffix(logw, q) if table is None else table
    chosen = np.empty(q, dtype=np.int64)
    pos = 0
    for slot, k in enumerate(range(q, 0, -1)):
        while True:
            u = rng.random()
            # next pick j: first j >= pos with e_k(w[j+1:]) <= (1 - u) e_k(w[pos:])
            threshold = math.log1p(-u) + E[k, pos]
            tail = E[k, pos + 1:N + 1]
            j = pos + int(np.searchsorted(-tail, -threshold, side="left"))
            j = min(j, N - 1)
            # a zero-weight pick only happens on a probability-zero tie; redraw
            if np.isfinite(logw[j]) and np.isfinite(E[k - 1, j + 1]):
                break
        chosen[slot] = j
        pos = j + 1
    return chosen


def _log_weights_rows(pos: np.ndarray, sources: np.ndarray, gamma: float) -> np.ndarray:
    """Log weights ``-gamma * log d(s, v)`` for each source row; self is ``-inf``."""
    x, y = pos[:, 0], pos[:, 1]
    dx = x[None, :] - x[sources][:, None]
    dy = y[None, :] - y[sources][:, None]
    d2 = dx * dx + dy * dy
    rows = np.arange(len(sources))
    d2[rows, sources] = np.inf
    if np.any(d2 == 0.0):
        r, c = np.argwhere(d2 == 0.0)[0]
        raise DegeneratePairError(f"nodes {sources[r]} and {c} coincide")
    with np.errstate(invalid="ignore"):
        logw = np.log(d2)
        logw *= -0.5 * gamma
    logw[rows, sources] = -np.inf
    return logw


def _check_distinct(pos: np.ndarray):
    uniq = np.unique(pos, axis=0)
    if len(uniq) != len(pos):
        raise DegeneratePairError("two nodes coincide")


def sample_social_group(d: Deployment, p: SocialParams, s: int,
                        rng: np.random.Generator | None = None) -> tuple[int, ...]:
    """Exact draw of the social group of source ``s`` (sorted node ids)."""
    p.check(d.n)
    if not 0 <= s < d.n:
        raise ConfigurationError(f"source id {s} out of range")
    if rng is None:
        rng = substream(d.config.seed, STREAM_SOCIAL, 0, s)
    logw = _log_weights_rows(d.positions, np.array([s]), p.gamma)[0]
    if p.gamma == 0:
        picked = rng.choice(d.n - 1, size=p.q, replace=False)
        picked = picked + (picked >= s)
    else:
        picked = sample_from_log_weights(logw, p.q, rng)
    return tuple(sorted(int(x) for x in picked))


def select_destination(group, rng: np.random.Generator) -> int:
    group = tuple(group)
    if not group:
        raise ConfigurationError("cannot select a destination from an empty group")
    return int(group[int(rng.integers(len(group)))])


def assign_social(d: Deployment, p: SocialParams, sources=None, trial: int = 0) -> SocialAssignment:
    """Social groups and destinations for ``sources`` (default: every node).

    Each source uses its own substreams keyed by ``(trial, source)``, so
    the result for a source does not depend on which other sources are
    sampled alongside it.
    """
    p.check(d.n)
    n = d.n
    sources = np.arange(n) if sources is None else np.asarray(sources, dtype=np.int64)
    seed = d.config.seed
    pos = d.positions
    groups = []
    dests = np.empty(len(sources), dtype=np.int64)
    if p.gamma == 0:
        _check_distinct(pos)
        for k, s in enumerate(sources):
            # all weights equal: a uniform q-subset of the other nodes
            rng = substream(seed, STREAM_SOCIAL, trial, s)
            picked = rng.choice(n - 1, size=p.q, replace=False)
            picked = picked + (picked >= s)
            group = tuple(sorted(int(x) for x in picked))
            groups.append(group)
            dests[k] = select_destination(group, substream(seed, STREAM_DESTINATION, trial, s))
        return SocialAssignment(sources.copy(), tuple(groups), dests)
    batch = max(1, _BATCH_ELEMENTS // max(n * (p.q + 1), 1))
    for start in range(0, len(sources), batch):
        chunk = sources[start:start + batch]
        logw = _log_weights_rows(pos, chunk, p.gamma)
        table = log_esp_suffix(logw, p.q) if p.q < n - 1 else None
        for b, s in enumerate(chunk):
            rng = substream(seed, STREAM_SOCIAL, trial, s)
            picked = sample_from_log_weights(
                logw[b], p.q, rng, None if table is None else table[b])
            group = tuple(sorted(int(x) for x in picked))
            groups.append(group)
            dests[start + b] = select_destination(
                group, substream(seed, STREAM_DESTINATION, trial, s))
    return SocialAssignment(sources.copy(), tuple(groups), dests)


def pair_distances(d: Deployment, social: SocialAssignment) -> np.ndarray:
    diff = d.positions[social.sources] - d.positions[social.destinations]
    return np.hypot(diff[:, 0], diff[:, 1])


@dataclass(frozen=True)
class DistanceEstimate:
    mean: float
    stderr: float
    samples: int


def _sampled_distances(d: Deployment, p: SocialParams, trials: int,
                       sources_per_trial: int | None) -> np.ndarray:
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    out = []
    for t in range(trials):
        if sources_per_trial is None or sources_per_trial >= d.n:
            sources = None
        else:
            rng = substream(d.config.seed, STREAM_SOURCES, t)
            sources = rng.choice(d.n, size=sources_per_trial, replace=False)
        out.append(pair_distances(d, assign_social(d, p, sources, trial=t)))
    return np.concatenate(out)


def empirical_mean_sd_distance(d: Deployment, p: SocialParams, trials: int = 1,
                               sources_per_trial: int | None = None) -> DistanceEstimate:
    """Monte Carlo mean source-destination distance over fresh social draws.

    Each trial re-samples groups and destinations for ``sources_per_trial``
    randomly chosen sources (all nodes when ``None``).
    """
    x = _sampled_distances(d, p, trials, sources_per_trial)
    stderr = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return DistanceEstimate(float(np.mean(x)), stderr, int(x.size))


@dataclass(frozen=True)
class TailEstimate:
    fraction: float
    stderr: float
    mean_distance: float
    samples: int


def sd_tail_fraction(d: Deployment, p: SocialParams, threshold_multiplier: float,
                     trials: int = 1, sources_per_trial: int | None = None) -> TailEstimate:
    """Empirical Pr{d_sv >= k * mean d_sv}; Markov bounds it by 1/k."""
    if not threshold_multiplier >= 1:
        raise ConfigurationError(f"threshold multiplier must be >= 1, got {threshold_multiplier}")
    x = _sampled_distances(d, p, trials, sources_per_trial)
    mean = float(np.mean(x))
    hits = x >= threshold_multiplier * mean
    frac = float(np.mean(hits))
    stderr = math.sqrt(max(frac * (1 - frac), 1e-300) / x.size)
    return TailEstimate(frac, stderr, mean, int(x.size))
