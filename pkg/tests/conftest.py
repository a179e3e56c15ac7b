"""Shared fixtures and independent oracles used across the suite.

The oracles here deliberately avoid the library's own code paths: counts
are linear scans over plain tuples, splitting is a direct gap walk, and
synthetic power-law samples come from the closed-form inverse CDF.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from bechdelkit.metrics import Dialogue, DialogueSet

DATA_DIR = Path(__file__).parent / "data"


# ---------------------------------------------------------------------------
# Random dialogue sets.

GENDER_WEIGHTS = (("M", 0.4), ("F", 0.4), ("U", 0.2))


def random_dialogues(rng: np.random.Generator, n: int) -> list[Dialogue]:
    genders = [g for g, _ in GENDER_WEIGHTS]
    probs = [p for _, p in GENDER_WEIGHTS]
    g1 = rng.choice(genders, size=n, p=probs)
    g2 = rng.choice(genders, size=n, p=probs)
    m = rng.integers(0, 2, size=n)
    f = rng.integers(0, 2, size=n)
    return [Dialogue(g1=str(g1[i]), g2=str(g2[i]), m=int(m[i]), f=int(f[i]),
                     participant_ids=(f"u{2 * i}", f"u{2 * i + 1}"))
            for i in range(n)]


def random_dialogue_set(rng: np.random.Generator, max_n: int = 500) -> DialogueSet:
    n = int(rng.integers(0, max_n + 1))
    return DialogueSet(random_dialogues(rng, n))


# ---------------------------------------------------------------------------
# Brute-force metric oracles (linear scans, no caching, no library calls).

def brute_select_count(dialogues, pattern, unordered=False) -> int:
    p1, p2, pm, pf = (str(s) for s in pattern)

    def fits(sym, val):
        return sym == "*" or sym == str(val)

    count = 0
    for d in dialogues:
        if not (fits(pm, d.m) and fits(pf, d.f)):
            continue
        if (fits(p1, d.g1) and fits(p2, d.g2)) or (
                unordered and fits(p1, d.g2) and fits(p2, d.g1)):
            count += 1
    return count


def brute_metrics(dialogues) -> dict:
    """All metric numerators/denominators as exact integer pairs."""
    n = len(dialogues)
    ff = brute_select_count(dialogues, ("F", "F", "*", "*"))
    ff_m0 = brute_select_count(dialogues, ("F", "F", "0", "*"))
    mm = brute_select_count(dialogues, ("M", "M", "*", "*"))
    mm_f0 = brute_select_count(dialogues, ("M", "M", "*", "0"))
    cross = brute_select_count(dialogues, ("F", "M", "*", "*"), unordered=True)
    f_any = brute_select_count(dialogues, ("F", "*", "*", "*"), unordered=True)
    m_any = brute_select_count(dialogues, ("M", "*", "*", "*"), unordered=True)
    return {
        "b_f": (ff_m0, n), "b_m": (mm_f0, n),
        "x_f": (cross, f_any), "x_m": (mm, m_any),
        "i_f": (ff_m0, ff), "i_m": (mm_f0, mm),
    }


def as_fraction(pair) -> Fraction | None:
    num, den = pair
    return Fraction(num, den) if den > 0 else None


# ---------------------------------------------------------------------------
# Synthetic gap sampling and splitting oracle.

def sample_truncated_power_law(rng: np.random.Generator, n: int,
                               alpha: float, a: float, b: float) -> np.ndarray:
    """Inverse-CDF samples of a power law t^-alpha truncated to [a, b]."""
    u = 1.0 - alpha
    r = rng.random(n)
    return (a ** u + r * (b ** u - a ** u)) ** (1.0 / u)


def brute_split(timestamps, tau) -> list[list[int]]:
    """Index groups from a direct scan: new group when gap > tau."""
    groups: list[list[int]] = []
    for i, t in enumerate(timestamps):
        if groups and t - timestamps[groups[-1][-1]] <= tau:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


# ---------------------------------------------------------------------------
# Exact rank-sum null by combination enumeration (independent of the
# library's enumeration path).

def enumerate_exact_p(a, b) -> float:
    from itertools import combinations

    pooled = list(a) + list(b)
    n1, n = len(a), len(pooled)
    order = sorted(range(n), key=lambda i: pooled[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    mu = n1 * (n - n1) / 2

    def u_of(idx):
        return sum(ranks[i] for i in idx) - n1 * (n1 + 1) / 2

    d_obs = abs(u_of(range(n1)) - mu)
    hits = total = 0
    for combo in combinations(range(n), n1):
        if abs(u_of(combo) - mu) >= d_obs - 1e-12:
            hits += 1
        total += 1
    return hits / total


# ---------------------------------------------------------------------------
# A small reference lexicon for text-bearing tests.

@pytest.fixture(scope="session")
def tiny_reflex():
    from bechdelkit.gender import build_lexicon, make_reference_lexicon

    lex = build_lexicon([
        ("mary", "F", 5000), ("mary", "M", 10),
        ("john", "M", 6000),
        ("linda", "F", 4000),
        ("mike", "M", 3500),
        ("jordan", "M", 600), ("jordan", "F", 400),  # dropped: ambiguous
    ])
    return make_reference_lexicon(lex)
