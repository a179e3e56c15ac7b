"""Dialogue tuples and the gender-asymmetry metrics computed over them.

A dialogue is a tuple (g1, g2, m, f): the genders of the two participants
plus two binary flags recording whether the dialogue text references men
and/or women.  Three metric families are computed over a set of dialogues:

* Bechdel scores  B_F = |D(F,F,0,*)| / |D|,  B_M = |D(M,M,*,0)| / |D|
* dialogue imbalance  X_F = |cross-gender| / |female-involving|,
  X_M = |D(M,M)| / |male-involving|
* gender independence  I_F = |D(F,F,0,*)| / |D(F,F)|,
  I_M = |D(M,M,*,0)| / |D(M,M)|,  asymmetry = I_M - I_F

Ratios with an empty denominator are reported as undefined (None), never
as zero.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Sequence

from .stats import wilson_ci

GENDERS = ("M", "F", "U")

# Independence ratios need this many same-gender dialogues before they are
# considered reliable; smaller sets report undefined.
DEFAULT_MIN_ALIGNED = 50


@dataclass(frozen=True)
class Dialogue:
    """One dialogue: two participants, two reference flags, provenance."""

    g1: str
    g2: str
    m: int
    f: int
    participant_ids: tuple[str, str] = ("", "")
    source_ids: tuple[str, ...] = ()
    origin: str = "stream"  # "movie" or "stream"
    ordered: bool = False   # True when g1 is the first speaker (scripts)

    def __post_init__(self):
        if self.g1 not in GENDERS or self.g2 not in GENDERS:
            raise ValueError(f"bad gender pair ({self.g1!r}, {self.g2!r})")
        if self.m not in (0, 1) or self.f not in (0, 1):
            raise ValueError(f"reference flags must be 0/1, got ({self.m}, {self.f})")

    def swapped_genders(self) -> "Dialogue":
        """Relabel M<->F and m<->f (U is a fixed point)."""
        flip = {"M": "F", "F": "M", "U": "U"}
        return replace(self, g1=flip[self.g1], g2=flip[self.g2], m=self.f, f=self.m)


def make_dialogue(g1, g2, text, refdet, participant_ids=("", ""),
                  source_ids=(), origin="stream", ordered=False) -> Dialogue:
    """Build a Dialogue from raw text, deriving (m, f) with `refdet`.

    `refdet` is a callable text -> (m, f), normally
    ``ReferenceLexicon.detect`` from :mod:`bechdelkit.gender`.
    """
    m, f = refdet(text)
    return Dialogue(g1=g1, g2=g2, m=int(m), f=int(f),
                    participant_ids=tuple(participant_ids),
                    source_ids=tuple(source_ids), origin=origin, ordered=ordered)


class DialogueSet:
    """An immutable collection of dialogues with a pattern-count cache.

    Counting by (g1, g2, m, f) pattern is O(#distinct patterns) regardless
    of the number of dialogues, which keeps repeated metric queries cheap
    on large corpora.
    """

    def __init__(self, dialogues: Iterable[Dialogue], label: str = ""):
        self._dialogues: tuple[Dialogue, ...] = tuple(dialogues)
        self.label = label
        self._counts: Counter = Counter(
            (d.g1, d.g2, d.m, d.f) for d in self._dialogues
        )

    def __len__(self) -> int:
        return len(self._dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self._dialogues)

    def __getitem__(self, i):
        return self._dialogues[i]

    def __eq__(self, other):
        return (isinstance(other, DialogueSet)
                and self._dialogues == other._dialogues)

    @property
    def dialogues(self) -> tuple[Dialogue, ...]:
        return self._dialogues

    @property
    def pattern_counts(self) -> Counter:
        return Counter(self._counts)

    def subset(self, pred: Callable[[Dialogue], bool], label: str = "") -> "DialogueSet":
        return DialogueSet((d for d in self._dialogues if pred(d)),
                           label=label or self.label)

    def merged(self, other: "DialogueSet", label: str = "") -> "DialogueSet":
        return DialogueSet(self._dialogues + other._dialogues,
                           label=label or self.label)


def _sym_matches(sym: str, value) -> bool:
    return sym == "*" or str(sym) == str(value)


def select_count(ds: DialogueSet, pattern: Sequence, unordered: bool = False) -> int:
    """Count dialogues matching a (g1, g2, m, f) pattern.

    Pattern symbols are genders / 0 / 1, or "*" for any value.  With
    ``unordered=True`` a dialogue matches if either orientation of its
    gender pair fits the pattern (each dialogue still counts once).
    """
    p1, p2, pm, pf = (str(s) for s in pattern)
    for s in (p1, p2):
        if s not in ("M", "F", "U", "*"):
            raise ValueError(f"bad gender pattern symbol {s!r}")
    for s in (pm, pf):
        if s not in ("0", "1", "*"):
            raise ValueError(f"bad reference pattern symbol {s!r}")
    total = 0
    for (g1, g2, m, f), n in ds.pattern_counts.items():
        if not (_sym_matches(pm, m) and _sym_matches(pf, f)):
            continue
        direct = _sym_matches(p1, g1) and _sym_matches(p2, g2)
        flipped = unordered and _sym_matches(p1, g2) and _sym_matches(p2, g1)
        if direct or flipped:
            total += n
    return total


@dataclass
class MetricCounts:
    """Raw pattern counts behind the metric ratios."""

    n_total: int = 0
    n_ff: int = 0
    n_ff_m0: int = 0
    n_mm: int = 0
    n_mm_f0: int = 0
    n_cross: int = 0
    n_female_involving: int = 0
    n_male_involving: int = 0

    @classmethod
    def of(cls, ds: DialogueSet) -> "MetricCounts":
        return cls(
            n_total=len(ds),
            n_ff=select_count(ds, ("F", "F", "*", "*")),
            n_ff_m0=select_count(ds, ("F", "F", "0", "*")),
            n_mm=select_count(ds, ("M", "M", "*", "*")),
            n_mm_f0=select_count(ds, ("M", "M", "*", "0")),
            n_cross=select_count(ds, ("F", "M", "*", "*"), unordered=True),
            n_female_involving=select_count(ds, ("F", "*", "*", "*"), unordered=True),
            n_male_involving=select_count(ds, ("M", "*", "*", "*"), unordered=True),
        )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def bechdel_scores(ds: DialogueSet) -> tuple[float | None, float | None]:
    """(B_F, B_M); undefined (None) on an empty dialogue set."""
    n = len(ds)
    return (_ratio(select_count(ds, ("F", "F", "0", "*")), n),
            _ratio(select_count(ds, ("M", "M", "*", "0")), n))


def dialogue_imbalance(ds: DialogueSet) -> tuple[float | None, float | None]:
    """(X_F, X_M); a side is undefined when no dialogue involves that gender."""
    c = MetricCounts.of(ds)
    return (_ratio(c.n_cross, c.n_female_involving),
            _ratio(c.n_mm, c.n_male_involving))


@dataclass
class IndependenceResult:
    i_f: float | None
    i_m: float | None
    asymmetry: float | None
    ci_f: tuple[float, float] | None
    ci_m: tuple[float, float] | None
    n_ff: int
    n_ff_m0: int
    n_mm: int
    n_mm_f0: int
    reasons: dict = field(default_factory=dict)


def gender_independence(ds: DialogueSet,
                        min_aligned: int = DEFAULT_MIN_ALIGNED) -> IndependenceResult:
    """I_F, I_M and their asymmetry, with Wilson 95% confidence intervals.

    Either side is undefined when fewer than ``min_aligned`` gender-aligned
    dialogues support it.
    """
    c = MetricCounts.of(ds)
    reasons: dict[str, str] = {}
    i_f = ci_f = None
    if c.n_ff >= min_aligned and c.n_ff > 0:
        i_f = c.n_ff_m0 / c.n_ff
        ci_f = wilson_ci(c.n_ff_m0, c.n_ff)
    else:
        reasons["i_f"] = f"only {c.n_ff} F-F dialogues (< {min_aligned})"
    i_m = ci_m = None
    if c.n_mm >= min_aligned and c.n_mm > 0:
        i_m = c.n_mm_f0 / c.n_mm
        ci_m = wilson_ci(c.n_mm_f0, c.n_mm)
    else:
        reasons["i_m"] = f"only {c.n_mm} M-M dialogues (< {min_aligned})"
    asym = i_m - i_f if i_f is not None and i_m is not None else None
    return IndependenceResult(i_f=i_f, i_m=i_m, asymmetry=asym,
                              ci_f=ci_f, ci_m=ci_m,
                              n_ff=c.n_ff, n_ff_m0=c.n_ff_m0,
                              n_mm=c.n_mm, n_mm_f0=c.n_mm_f0,
                              reasons=reasons)


@dataclass
class MetricReport:
    """All metric families over one unit of analysis (movie, state, cohort)."""

    label: str
    b_f: float | None
    b_m: float | None
    x_f: float | None
    x_m: float | None
    i_f: float | None
    i_m: float | None
    asymmetry: float | None
    counts: MetricCounts
    ci: dict[str, tuple[float, float]]
    reasons: dict[str, str]

    CSV_FIELDS = ("label", "b_f", "b_m", "x_f", "x_m", "i_f", "i_m",
                  "asymmetry", "n_total", "n_ff", "n_ff_m0", "n_mm",
                  "n_mm_f0", "n_cross", "n_female_involving",
                  "n_male_involving")

    def to_dict(self) -> dict:
        d = {
            "label": self.label,
            "b_f": self.b_f, "b_m": self.b_m,
            "x_f": self.x_f, "x_m": self.x_m,
            "i_f": self.i_f, "i_m": self.i_m,
            "asymmetry": self.asymmetry,
            "counts": vars(self.counts).copy(),
            "ci": {k: list(v) for k, v in self.ci.items()},
            "reasons": dict(self.reasons),
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> list:
        c = self.counts
        return [self.label, self.b_f, self.b_m, self.x_f, self.x_m,
                self.i_f, self.i_m, self.asymmetry,
                c.n_total, c.n_ff, c.n_ff_m0, c.n_mm, c.n_mm_f0,
                c.n_cross, c.n_female_involving, c.n_male_involving]


def metric_report(ds: DialogueSet, min_aligned: int = DEFAULT_MIN_ALIGNED,
                  label: str = "") -> MetricReport:
    """Compute every metric family over `ds` into one report."""
    c = MetricCounts.of(ds)
    b_f, b_m = bechdel_scores(ds)
    x_f, x_m = dialogue_imbalance(ds)
    ind = gender_independence(ds, min_aligned=min_aligned)
    ci: dict[str, tuple[float, float]] = {}
    reasons: dict[str, str] = dict(ind.reasons)
    if c.n_total > 0:
        ci["b_f"] = wilson_ci(c.n_ff_m0, c.n_total)
        ci["b_m"] = wilson_ci(c.n_mm_f0, c.n_total)
    else:
        reasons["b_f"] = reasons["b_m"] = "empty dialogue set"
    if c.n_female_involving > 0:
        ci["x_f"] = wilson_ci(c.n_cross, c.n_female_involving)
    else:
        reasons["x_f"] = "no dialogues involving females"
    if c.n_male_involving > 0:
        ci["x_m"] = wilson_ci(c.n_mm, c.n_male_involving)
    else:
        reasons["x_m"] = "no dialogues involving males"
    if ind.ci_f is not None:
        ci["i_f"] = ind.ci_f
    if ind.ci_m is not None:
        ci["i_m"] = ind.ci_m
    return MetricReport(label=label or ds.label, b_f=b_f, b_m=b_m,
                        x_f=x_f, x_m=x_m, i_f=ind.i_f, i_m=ind.i_m,
                        asymmetry=ind.asymmetry, counts=c, ci=ci,
                        reasons=reasons)


# ---------------------------------------------------------------------------
# Serialization: one dialogue per line, JSON-encoded.

def dialogue_to_json(d: Dialogue) -> str:
    return json.dumps({
        "g1": d.g1, "g2": d.g2, "m": d.m, "f": d.f,
        "participant_ids": list(d.participant_ids),
        "source_ids": list(d.source_ids),
        "origin": d.origin, "ordered": d.ordered,
    }, sort_keys=True)


def dialogue_from_json(line: str) -> Dialogue:
    obj = json.loads(line)
    return Dialogue(g1=obj["g1"], g2=obj["g2"], m=int(obj["m"]), f=int(obj["f"]),
                    participant_ids=tuple(obj.get("participant_ids", ("", ""))),
                    source_ids=tuple(obj.get("source_ids", ())),
                    origin=obj.get("origin", "stream"),
                    ordered=bool(obj.get("ordered", False)))


def write_dialogues(path, ds: DialogueSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in ds:
            fh.write(dialogue_to_json(d) + "\n")


def read_dialogues(path, label: str = "") -> DialogueSet:
    with open(path, "r", encoding="utf-8") as fh:
        return DialogueSet((dialogue_from_json(line) for line in fh if line.strip()),
                           label=label)
