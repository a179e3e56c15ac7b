"""Burst segmentation of paired message streams.

Inter-message times between two users are bimodal: a power-law head
(messages inside one conversation) and an exponential tail (silences
between conversations).  For every candidate cutoff tau, the head
exponent is fitted by maximum likelihood for a power law truncated to
[t_min, tau]; the chosen tau minimizes the Kolmogorov-Smirnov distance
between the fitted two-regime model and the empirical distribution.
Silences longer than tau then split the stream into dialogues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .ingest import Message
from .metrics import Dialogue, DialogueSet

RESOLUTION_FLOOR = 1.0  # seconds; duplicate timestamps collapse to this gap

# Smallest number of head gaps a candidate cutoff must retain for its
# truncated fit to be considered.
MIN_HEAD_SIZE = 10

ALPHA_LO, ALPHA_HI = 1.01, 5.0
ALPHA_REL_TOL = 1e-6


class FitError(ValueError):
    """The gap sample cannot support a bimodal fit."""


@dataclass
class BimodalFit:
    alpha: float        # power-law exponent of the head
    tau: float          # seconds; cutoff between intra- and inter-burst
    beta: float         # 1/seconds; tail rate (inf when no tail gaps)
    ks_distance: float
    n_head: int         # gaps <= tau
    t_min: float
    n_total: int = 0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "tau": self.tau,
                "beta": self.beta if math.isfinite(self.beta) else None,
                "ks": self.ks_distance, "n_head": self.n_head,
                "t_min": self.t_min, "n_total": self.n_total}


def pair_stream(messages: Iterable[Message],
                pair: tuple[str, str]) -> list[Message]:
    """Messages authored by either member and mentioning the other, by time."""
    a, b = pair
    sel = [m for m in messages
           if (m.author_id == a and b in m.mentioned_ids)
           or (m.author_id == b and a in m.mentioned_ids)]
    sel.sort(key=lambda m: (m.timestamp, m.msg_id))
    return sel


def index_pair_streams(messages: Iterable[Message],
                       pairs: Iterable[tuple[str, str]]) -> dict[tuple[str, str], list[Message]]:
    """One pass over the corpus building the sorted stream of every pair.

    Equivalent to calling pair_stream per pair, but linear in the corpus
    size instead of pairs x messages.
    """
    buckets: dict[tuple[str, str], list[Message]] = {
        (p[0], p[1]) if p[0] < p[1] else (p[1], p[0]): [] for p in pairs}
    for msg in messages:
        a = msg.author_id
        for b in set(msg.mentioned_ids):
            if b == a:
                continue
            key = (a, b) if a < b else (b, a)
            bucket = buckets.get(key)
            if bucket is not None:
                bucket.append(msg)
    for bucket in buckets.values():
        bucket.sort(key=lambda m: (m.timestamp, m.msg_id))
    return buckets


def _gaps_of(stream: Sequence[Message]) -> list[float]:
    gaps = []
    for prev, cur in zip(stream, stream[1:]):
        dt = float(cur.timestamp - prev.timestamp)
        gaps.append(dt if dt > 0 else RESOLUTION_FLOOR)
    return gaps


def inter_event_gaps(messages: Iterable[Message],
                     pair: tuple[str, str]) -> list[float]:
    """Successive inter-message times of the pair stream, in seconds.

    Identical timestamps yield the resolution floor (1 s) instead of zero.
    Fewer than two messages give an empty list.
    """
    return _gaps_of(pair_stream(messages, pair))


# ---------------------------------------------------------------------------
# Truncated power-law fitting.

def _mean_log_truncated(alpha: np.ndarray, a: float,
                        b: np.ndarray) -> np.ndarray:
    """E[ln T] of a power law with exponent alpha truncated to [a, b]."""
    u = 1.0 - alpha
    au = a ** u
    bu = b ** u
    la = math.log(a)
    lb = np.log(b)
    num = bu * (u * lb - 1.0) - au * (u * la - 1.0)
    den = u * (bu - au)
    return num / den


def _solve_alpha(mean_ln: np.ndarray, a: float, b: np.ndarray) -> np.ndarray:
    """Truncated-MLE exponent: E_alpha[ln T] on [a, b] equals the observed
    mean log gap.  E[ln T] decreases in alpha, so bisection on
    (ALPHA_LO, ALPHA_HI] converges monotonically; targets outside the
    bracket clamp to its ends.
    """
    lo = np.full_like(mean_ln, ALPHA_LO)
    hi = np.full_like(mean_ln, ALPHA_HI)
    # 60 halvings shrink the bracket below ALPHA_REL_TOL * ALPHA_LO
    iters = max(1, math.ceil(math.log2(
        (ALPHA_HI - ALPHA_LO) / (ALPHA_REL_TOL * ALPHA_LO))))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        too_flat = _mean_log_truncated(mid, a, b) > mean_ln
        lo = np.where(too_flat, mid, lo)
        hi = np.where(too_flat, hi, mid)
    return 0.5 * (lo + hi)


def truncated_alpha_mle(gaps: Sequence[float], t_min: float, tau: float) -> float:
    """ML exponent of a power law truncated (and normalized) to [t_min, tau].

    Only gaps inside the window enter the estimate, so adding or removing
    gaps beyond tau cannot change it.
    """
    if t_min <= 0 or tau <= t_min:
        raise ValueError("need 0 < t_min < tau")
    data = np.asarray(gaps, dtype=float)
    window = data[(data >= t_min) & (data <= tau)]
    if len(window) < 2:
        raise FitError(f"only {len(window)} gaps inside [{t_min}, {tau}]")
    mean_ln = float(np.mean(np.log(window)))
    return float(_solve_alpha(np.asarray([mean_ln]), t_min,
                              np.asarray([tau]))[0])


def fit_bimodal(gaps: Sequence[float], t_min: float = 1.0,
                min_gaps: int = 50, max_candidates: int | None = None,
                max_sample: int | None = None, seed: int = 0) -> BimodalFit:
    """Fit the bimodal inter-event model and locate the cutoff tau.

    Candidate cutoffs are the distinct observed gap values between the 5th
    and 99th percentiles.  For each candidate, the head exponent is the
    maximum-likelihood estimate for a power law truncated (and normalized)
    to [t_min, tau] and the tail rate is the shifted-exponential MLE
    beta = 1 / mean(gap - tau) over gaps > tau.  The chosen tau minimizes
    the KS distance between the empirical CDF and the full two-regime
    model (head and tail weighted by the empirical head fraction): a
    head-only KS would reward arbitrarily small windows, losing the
    cutoff entirely.

    `max_candidates` thins the cutoff grid to evenly spaced quantiles and
    `max_sample` fits on a seeded subsample; both default to the exact,
    exhaustive scan and exist for very large pooled corpora.
    """
    data = np.asarray(gaps, dtype=float)
    if t_min <= 0:
        raise ValueError("t_min must be positive")
    if len(data) < max(min_gaps, 2):
        raise FitError(f"insufficient data: {len(data)} gaps < {min_gaps}")
    if float(np.min(data)) == float(np.max(data)):
        raise FitError("degenerate distribution: all gaps equal")

    n_total = len(data)
    fit_data = data
    if max_sample is not None and len(data) > max_sample:
        rng = np.random.default_rng(seed)
        fit_data = rng.choice(data, size=max_sample, replace=False)
    # the truncated model's lower bound must sit on the data support:
    # a t_min below every observed gap would assign phantom mass there
    # and drag the exponent toward 1
    t_min = max(t_min, float(np.min(fit_data)))
    s = np.sort(fit_data)
    s = s[s >= t_min]
    n = len(s)
    if n < MIN_HEAD_SIZE:
        raise FitError(f"insufficient data: only {n} gaps at or above t_min")

    lo_val, hi_val = np.percentile(s, (5.0, 99.0))
    distinct = np.unique(s)
    cand = distinct[(distinct >= lo_val) & (distinct <= hi_val)
                    & (distinct > t_min)]
    if max_candidates is not None and len(cand) > max_candidates:
        idx = np.unique(np.round(
            np.linspace(0, len(cand) - 1, max_candidates)).astype(int))
        cand = cand[idx]

    ends = np.searchsorted(s, cand, side="right")  # head sizes per candidate
    ok = ends >= MIN_HEAD_SIZE
    cand, ends = cand[ok], ends[ok]
    if len(cand) == 0:
        raise FitError("insufficient data: no candidate cutoff keeps "
                       f"{MIN_HEAD_SIZE} gaps above t_min")

    log_prefix = np.concatenate(([0.0], np.cumsum(np.log(s))))
    sum_prefix = np.concatenate(([0.0], np.cumsum(s)))
    mean_ln = log_prefix[ends] / ends
    alphas = _solve_alpha(mean_ln, t_min, cand)

    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    best: tuple[float, int] | None = None
    model_cdf = np.empty(n)
    for i in range(len(cand)):
        tau_i = float(cand[i])
        k = int(ends[i])
        u = 1.0 - float(alphas[i])
        au = t_min ** u
        w = k / n
        model_cdf[:k] = w * (s[:k] ** u - au) / (tau_i ** u - au)
        if k < n:
            tail_mean = (sum_prefix[n] - sum_prefix[k]) / (n - k) - tau_i
            model_cdf[k:] = w + (1.0 - w) * (
                1.0 - np.exp((s[k:] - tau_i) / -tail_mean))
        d = max(float(np.max(steps_hi - model_cdf)),
                float(np.max(model_cdf - steps_lo)))
        if best is None or d < best[0]:
            best = (d, i)
    ks, i = best
    tau = float(cand[i])
    alpha = float(alphas[i])

    tail = data[data > tau]
    beta = float(1.0 / np.mean(tail - tau)) if len(tail) else math.inf
    n_head = int(np.count_nonzero(data <= tau))
    return BimodalFit(alpha=alpha, tau=tau, beta=beta, ks_distance=ks,
                      n_head=n_head, t_min=t_min, n_total=n_total)


# ---------------------------------------------------------------------------
# Stream splitting.

def split_stream_dialogues(messages: Iterable[Message], pair: tuple[str, str],
                           tau: float,
                           refdet: Callable[[str], tuple[int, int]],
                           genders: Mapping[str, str]) -> DialogueSet:
    """Cut the pair stream at silences strictly longer than tau.

    A gap exactly equal to tau stays inside the dialogue.  Each dialogue
    carries the pair's user genders and the reference flags detected over
    its concatenated texts.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    stream = pair_stream(messages, pair)
    return DialogueSet(_split_sorted(stream, pair, tau, refdet, genders),
                       label=f"{pair[0]}|{pair[1]}")


def _split_sorted(stream: Sequence[Message], pair: tuple[str, str],
                  tau: float, refdet, genders) -> list[Dialogue]:
    g1 = genders.get(pair[0], "U")
    g2 = genders.get(pair[1], "U")
    dialogues: list[Dialogue] = []

    def flush(chunk: list[Message]) -> None:
        if not chunk:
            return
        m, f = refdet(" ".join(msg.text for msg in chunk))
        dialogues.append(Dialogue(
            g1=g1, g2=g2, m=m, f=f,
            participant_ids=pair,
            source_ids=tuple(msg.msg_id for msg in chunk),
            origin="stream", ordered=False))

    chunk: list[Message] = []
    for msg in stream:
        if chunk and msg.timestamp - chunk[-1].timestamp > tau:
            flush(chunk)
            chunk = []
        chunk.append(msg)
    flush(chunk)
    return dialogues


def pooled_gaps(messages: Iterable[Message],
                pairs: Iterable[tuple[str, str]]) -> list[float]:
    """Concatenated inter-event gaps over pairs (sorted for determinism)."""
    streams = index_pair_streams(messages, pairs)
    gaps: list[float] = []
    for pair in sorted(streams):
        gaps.extend(_gaps_of(streams[pair]))
    return gaps


def segment_corpus(messages: Iterable[Message],
                   pairs: Iterable[tuple[str, str]], tau: float,
                   refdet: Callable[[str], tuple[int, int]],
                   genders: Mapping[str, str],
                   label: str = "stream") -> DialogueSet:
    """Split every pair stream at tau and merge into one dialogue set."""
    streams = index_pair_streams(messages, pairs)
    dialogues: list[Dialogue] = []
    for pair in sorted(streams):
        dialogues.extend(
            _split_sorted(streams[pair], pair, tau, refdet, genders))
    return DialogueSet(dialogues, label=label)
