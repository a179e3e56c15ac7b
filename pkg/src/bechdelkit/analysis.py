"""Study recipes composing metrics and statistics over whole corpora.

These functions reproduce the section-level analyses on any supplied
corpus: share-cohort comparisons by sharer gender, per-user dialogue
imbalance against movie pass status, cohort and state independence maps,
and the geographic correlation table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .gender import UserAttributes
from .ingest import GeoTables, MovieRecord, ShareRecord
from .metrics import (DEFAULT_MIN_ALIGNED, DialogueSet, MetricReport,
                      metric_report)
from .stats import (BootstrapSummary, StatResult, bootstrap_score_centroids,
                    proportion_test, partial_pearson, pearson, spearman,
                    wilcoxon_ranksum)

DEFAULT_MIN_EGO_DIALOGUES = 25


@dataclass
class CohortSpec:
    """A named, total predicate over profile-derived user attributes."""

    label: str
    predicate: Callable[[UserAttributes], bool]

    def member(self, attrs: UserAttributes) -> bool:
        return bool(self.predicate(attrs))


def _pass(b: int | None) -> bool | None:
    return None if b is None else b == 3


# ---------------------------------------------------------------------------
# Share comparisons.

@dataclass
class ShareComparison:
    tests: dict[str, StatResult]
    counts: dict[str, int]
    skipped: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"tests": {k: v.to_dict() for k, v in self.tests.items()},
                "counts": dict(self.counts),
                "skipped": dict(self.skipped)}


def compare_shares_by_sharer_gender(
        shares: Iterable[ShareRecord],
        movies: Mapping[str, MovieRecord],
        attributes: Mapping[str, UserAttributes],
        movie_scores: Mapping[str, tuple[float | None, float | None]] | None = None,
) -> ShareComparison:
    """Compare what female and male users share: b, B_F, B_M, pass rate.

    Works per share, not per unique movie.  Rank-sum tests compare the
    female-sharer and male-sharer distributions; a chi-squared test
    compares the rates of sharing a movie that passes all three rules.
    `movie_scores` maps movie_id -> (B_F, B_M) when script scores exist.
    """
    by_gender: dict[str, dict[str, list[float]]] = {
        "F": {"b": [], "b_f": [], "b_m": [], "pass": []},
        "M": {"b": [], "b_f": [], "b_m": [], "pass": []},
    }
    n_shares = {"F": 0, "M": 0}
    for share in shares:
        attrs = attributes.get(share.user_id)
        movie = movies.get(share.movie_id)
        if attrs is None or movie is None or attrs.gender not in ("F", "M"):
            continue
        bucket = by_gender[attrs.gender]
        n_shares[attrs.gender] += 1
        if movie.bechdel_b is not None and not movie.disputed:
            bucket["b"].append(float(movie.bechdel_b))
            bucket["pass"].append(1.0 if movie.bechdel_b == 3 else 0.0)
        if movie_scores is not None:
            score = movie_scores.get(share.movie_id)
            if score is not None:
                b_f, b_m = score
                if b_f is not None:
                    bucket["b_f"].append(b_f)
                if b_m is not None:
                    bucket["b_m"].append(b_m)

    tests: dict[str, StatResult] = {}
    skipped: dict[str, str] = {}
    for key in ("b", "b_f", "b_m"):
        fa, ma = by_gender["F"][key], by_gender["M"][key]
        if fa and ma:
            tests[key] = wilcoxon_ranksum(fa, ma)
        else:
            skipped[key] = f"no data for one gender (F={len(fa)}, M={len(ma)})"
    fp, mp = by_gender["F"]["pass"], by_gender["M"]["pass"]
    if fp and mp:
        tests["pass_rate"] = proportion_test(int(sum(fp)), len(fp),
                                             int(sum(mp)), len(mp))
    else:
        skipped["pass_rate"] = "no tested shares for one gender"
    counts = {"shares_f": n_shares["F"], "shares_m": n_shares["M"],
              "tested_f": len(fp), "tested_m": len(mp)}
    return ShareComparison(tests=tests, counts=counts, skipped=skipped)


def compare_popularity_by_pass(movies: Iterable[MovieRecord]) -> ShareComparison:
    """Rank-sum tests of trailer views/likes/dislikes: pass vs fail movies.

    Movies without a test result or with disputed annotations are
    excluded; each field is tested over the movies that carry it.
    """
    groups: dict[bool, dict[str, list[float]]] = {
        True: {"views": [], "likes": [], "dislikes": []},
        False: {"views": [], "likes": [], "dislikes": []},
    }
    n_movies = {True: 0, False: 0}
    for movie in movies:
        passed = _pass(movie.bechdel_b)
        if passed is None or movie.disputed:
            continue
        n_movies[passed] += 1
        for key in ("views", "likes", "dislikes"):
            value = getattr(movie, key)
            if value is not None:
                groups[passed][key].append(float(value))
    tests: dict[str, StatResult] = {}
    skipped: dict[str, str] = {}
    for key in ("views", "likes", "dislikes"):
        a, b = groups[True][key], groups[False][key]
        if a and b:
            tests[key] = wilcoxon_ranksum(a, b)
        else:
            skipped[key] = f"missing data (pass={len(a)}, fail={len(b)})"
    counts = {"movies_pass": n_movies[True], "movies_fail": n_movies[False]}
    return ShareComparison(tests=tests, counts=counts, skipped=skipped)


def ego_imbalance(ds: DialogueSet,
                  attributes: Mapping[str, UserAttributes],
                  min_dialogues: int = DEFAULT_MIN_EGO_DIALOGUES) -> dict[str, float]:
    """Per-user share of dialogues whose partner is male.

    For a female user this is her X_F, for a male user his X_M (the
    imbalance ratios restricted to the user's ego network).  Users with
    fewer than `min_dialogues` dialogues are excluded.
    """
    totals: dict[str, int] = {}
    with_male: dict[str, int] = {}
    for d in ds:
        u1, u2 = d.participant_ids
        for me, other_gender in ((u1, d.g2), (u2, d.g1)):
            totals[me] = totals.get(me, 0) + 1
            if other_gender == "M":
                with_male[me] = with_male.get(me, 0) + 1
    return {u: with_male.get(u, 0) / n
            for u, n in totals.items()
            if n >= min_dialogues and u in attributes}


@dataclass
class ImbalanceByPass:
    cells: dict[tuple[str, str], list[float]]   # (gender, "pass"/"fail") -> values
    tests: dict[str, StatResult]
    skipped: dict[str, str] = field(default_factory=dict)

    def medians(self) -> dict[str, float]:
        import statistics
        return {f"{g}_{p}": statistics.median(v)
                for (g, p), v in sorted(self.cells.items()) if v}

    def to_dict(self) -> dict:
        return {"cell_sizes": {f"{g}_{p}": len(v)
                               for (g, p), v in sorted(self.cells.items())},
                "medians": self.medians(),
                "tests": {k: v.to_dict() for k, v in self.tests.items()},
                "skipped": dict(self.skipped)}


def sharer_imbalance_by_pass(
        shares: Iterable[ShareRecord],
        movies: Mapping[str, MovieRecord],
        ds: DialogueSet,
        attributes: Mapping[str, UserAttributes],
        min_dialogues: int = DEFAULT_MIN_EGO_DIALOGUES) -> ImbalanceByPass:
    """Ego imbalance distributions split by sharer gender x movie pass status.

    Each share contributes its sharer's ego imbalance to one of four
    cells; rank-sum tests compare pass vs fail within each gender and
    female vs male within each pass status.
    """
    ego = ego_imbalance(ds, attributes, min_dialogues=min_dialogues)
    cells: dict[tuple[str, str], list[float]] = {
        (g, p): [] for g in ("F", "M") for p in ("pass", "fail")}
    for share in shares:
        attrs = attributes.get(share.user_id)
        movie = movies.get(share.movie_id)
        if attrs is None or movie is None or attrs.gender not in ("F", "M"):
            continue
        passed = _pass(movie.bechdel_b)
        if passed is None or movie.disputed or share.user_id not in ego:
            continue
        cells[(attrs.gender, "pass" if passed else "fail")].append(
            ego[share.user_id])

    comparisons = {
        "f_pass_vs_fail": (("F", "pass"), ("F", "fail")),
        "m_pass_vs_fail": (("M", "pass"), ("M", "fail")),
        "pass_f_vs_m": (("F", "pass"), ("M", "pass")),
        "fail_f_vs_m": (("F", "fail"), ("M", "fail")),
    }
    tests: dict[str, StatResult] = {}
    skipped: dict[str, str] = {}
    for name, (ka, kb) in comparisons.items():
        a, b = cells[ka], cells[kb]
        if a and b:
            tests[name] = wilcoxon_ranksum(a, b)
        else:
            skipped[name] = f"empty cell ({len(a)} vs {len(b)})"
    return ImbalanceByPass(cells=cells, tests=tests, skipped=skipped)


# ---------------------------------------------------------------------------
# Cohorts.

def _split_by_cohort(ds: DialogueSet, attributes: Mapping[str, UserAttributes],
                     cohort: CohortSpec) -> tuple[DialogueSet, DialogueSet]:
    """Cohort membership needs BOTH endpoints inside (or outside) the cohort.

    Dialogues with one endpoint in and one out, or with an unresolvable
    endpoint, belong to neither side.
    """
    inside, outside = [], []
    for d in ds:
        u1, u2 = d.participant_ids
        a1, a2 = attributes.get(u1), attributes.get(u2)
        if a1 is None or a2 is None:
            continue
        m1, m2 = cohort.member(a1), cohort.member(a2)
        if m1 and m2:
            inside.append(d)
        elif not m1 and not m2:
            outside.append(d)
    return (DialogueSet(inside, label=cohort.label),
            DialogueSet(outside, label=f"not-{cohort.label}"))


@dataclass
class CohortComparison:
    cohort: MetricReport
    complement: MetricReport
    tests: dict[str, StatResult]
    skipped: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"cohort": self.cohort.to_dict(),
                "complement": self.complement.to_dict(),
                "tests": {k: v.to_dict() for k, v in self.tests.items()},
                "skipped": dict(self.skipped)}


def cohort_independence(ds: DialogueSet,
                        attributes: Mapping[str, UserAttributes],
                        cohort: CohortSpec,
                        min_aligned: int = DEFAULT_MIN_ALIGNED) -> CohortComparison:
    """Independence ratios inside a cohort vs its complement.

    Proportion tests compare each gender's independence ratio between the
    two sides whenever both sides have gender-aligned dialogues.
    """
    inside, outside = _split_by_cohort(ds, attributes, cohort)
    rep_in = metric_report(inside, min_aligned=min_aligned, label=cohort.label)
    rep_out = metric_report(outside, min_aligned=min_aligned,
                            label=f"not-{cohort.label}")
    tests: dict[str, StatResult] = {}
    skipped: dict[str, str] = {}
    ci, co = rep_in.counts, rep_out.counts
    if ci.n_ff > 0 and co.n_ff > 0:
        tests["i_f"] = proportion_test(ci.n_ff_m0, ci.n_ff, co.n_ff_m0, co.n_ff)
    else:
        skipped["i_f"] = f"F-F dialogues: cohort {ci.n_ff}, complement {co.n_ff}"
    if ci.n_mm > 0 and co.n_mm > 0:
        tests["i_m"] = proportion_test(ci.n_mm_f0, ci.n_mm, co.n_mm_f0, co.n_mm)
    else:
        skipped["i_m"] = f"M-M dialogues: cohort {ci.n_mm}, complement {co.n_mm}"
    return CohortComparison(cohort=rep_in, complement=rep_out,
                            tests=tests, skipped=skipped)


def builtin_cohorts() -> list[CohortSpec]:
    return [
        CohortSpec("mothers", lambda a: a.mother),
        CohortSpec("fathers", lambda a: a.father),
        CohortSpec("students", lambda a: a.student),
        CohortSpec("urban", lambda a: a.urbanity == "urban"),
        CohortSpec("rural", lambda a: a.urbanity == "rural"),
    ]


# ---------------------------------------------------------------------------
# Geography.

def state_independence_map(ds: DialogueSet,
                           attributes: Mapping[str, UserAttributes],
                           geo: GeoTables,
                           min_aligned: int = DEFAULT_MIN_ALIGNED) -> dict[str, MetricReport]:
    """Per-state metric reports over dialogues internal to each state.

    Every state in the geographic table gets a report; states with too
    few gender-aligned dialogues carry undefined ratios (map them gray).
    """
    by_state: dict[str, list] = {s.code: [] for s in geo.states}
    for d in ds:
        u1, u2 = d.participant_ids
        a1, a2 = attributes.get(u1), attributes.get(u2)
        if a1 is None or a2 is None:
            continue
        if a1.state == a2.state and a1.state in by_state:
            by_state[a1.state].append(d)
    return {state: metric_report(DialogueSet(dialogues, label=state),
                                 min_aligned=min_aligned, label=state)
            for state, dialogues in sorted(by_state.items())}


@dataclass
class CorrelationRow:
    metric: str
    covariate: str
    method: str
    control: str
    r: float | None
    p: float | None
    n: int
    note: str = ""

    CSV_FIELDS = ("metric", "covariate", "method", "control", "r", "p",
                  "n", "note")

    def csv_row(self) -> list:
        return [self.metric, self.covariate, self.method, self.control,
                self.r, self.p, self.n, self.note]


def state_correlates(state_reports: Mapping[str, MetricReport],
                     geo: GeoTables) -> list[CorrelationRow]:
    """Correlate per-state independence ratios with geographic covariates.

    For I_F and I_M against income, Gini, latitude, longitude and the
    other independence ratio: Pearson, Spearman, and partial Pearson
    controlling for each other covariate singly.  States without a
    defined ratio drop out of the rows involving it.
    """
    geo_cols = {"avg_income": {}, "gini": {}, "latitude": {}, "longitude": {}}
    for s in geo.states:
        geo_cols["avg_income"][s.code] = s.avg_income
        geo_cols["gini"][s.code] = s.gini
        geo_cols["latitude"][s.code] = float(s.latitude_seconds)
        geo_cols["longitude"][s.code] = float(s.longitude_seconds)
    metric_cols = {
        "i_f": {st: r.i_f for st, r in state_reports.items() if r.i_f is not None},
        "i_m": {st: r.i_m for st, r in state_reports.items() if r.i_m is not None},
    }
    all_cols = {**geo_cols, **metric_cols}

    def aligned(names: Sequence[str]) -> tuple[list[list[float]], int]:
        states = sorted(set.intersection(*(set(all_cols[n]) for n in names)))
        return [[all_cols[n][st] for st in states] for n in names], len(states)

    rows: list[CorrelationRow] = []
    for metric in ("i_f", "i_m"):
        covariates = ["avg_income", "gini", "latitude", "longitude",
                      "i_m" if metric == "i_f" else "i_f"]
        for cov in covariates:
            (x, y), n = aligned((metric, cov))
            for method, fn in (("pearson", pearson), ("spearman", spearman)):
                try:
                    res = fn(x, y)
                    rows.append(CorrelationRow(metric, cov, method, "",
                                               res.statistic, res.p_value, n))
                except ValueError as exc:
                    rows.append(CorrelationRow(metric, cov, method, "",
                                               None, None, n, note=str(exc)))
            for ctrl in covariates:
                if ctrl == cov:
                    continue
                (x, y, z), n = aligned((metric, cov, ctrl))
                try:
                    res = partial_pearson(x, y, [z])
                    rows.append(CorrelationRow(metric, cov, "partial-pearson",
                                               ctrl, res.statistic,
                                               res.p_value, n))
                except ValueError as exc:
                    rows.append(CorrelationRow(metric, cov, "partial-pearson",
                                               ctrl, None, None, n,
                                               note=str(exc)))
    return rows


# ---------------------------------------------------------------------------
# Stream vs movie-group comparison (distance table + centroid data).

@dataclass
class GroupDistance:
    group: str            # "pass" (b=3) or "fail" (b<3)
    n_movies: int
    delta_b_f: float | None
    p_b_f: float | None
    delta_b_m: float | None
    p_b_m: float | None
    euclidean: float | None
    centroid: tuple[float, float] | None
    sd: tuple[float, float] | None = None

    CSV_FIELDS = ("group", "n_movies", "delta_b_f", "p_b_f", "delta_b_m",
                  "p_b_m", "euclidean", "centroid_b_f", "centroid_b_m",
                  "sd_b_f", "sd_b_m")

    def csv_row(self) -> list:
        cf, cm = self.centroid if self.centroid else (None, None)
        sf, sm = self.sd if self.sd else (None, None)
        return [self.group, self.n_movies, self.delta_b_f, self.p_b_f,
                self.delta_b_m, self.p_b_m, self.euclidean, cf, cm, sf, sm]


@dataclass
class StreamMovieComparison:
    bootstrap: BootstrapSummary
    groups: list[GroupDistance]

    def to_dict(self) -> dict:
        return {"bootstrap": self.bootstrap.to_dict(),
                "groups": [dict(zip(g.CSV_FIELDS, g.csv_row()))
                           for g in self.groups]}


def compare_to_movie_groups(stream_ds: DialogueSet,
                            movie_points: Iterable[tuple[int | None, float | None, float | None]],
                            sample_size: int = 225, n_samples: int = 200,
                            seed: int = 0) -> StreamMovieComparison:
    """Distance table between a stream corpus and pass/fail movie groups.

    `movie_points` holds (b, B_F, B_M) per movie; movies without a test
    result are excluded.  The stream is bootstrapped into movie-sized
    subsets; per axis the distance is the absolute Hodges-Lehmann shift
    between the subset scores and the group's per-movie scores, and the
    Euclidean distance compares bivariate centroids.
    """
    boot = bootstrap_score_centroids(stream_ds, sample_size=sample_size,
                                     n_samples=n_samples, seed=seed,
                                     keep_samples=True)
    samples = boot.samples
    groups: list[GroupDistance] = []
    for name, keep in (("pass", lambda b: b == 3), ("fail", lambda b: b is not None and b < 3)):
        pts = [(bf, bm) for b, bf, bm in movie_points
               if keep(b) and bf is not None and bm is not None]
        if not pts:
            groups.append(GroupDistance(group=name, n_movies=0,
                                        delta_b_f=None, p_b_f=None,
                                        delta_b_m=None, p_b_m=None,
                                        euclidean=None, centroid=None))
            continue
        bfs = np.asarray([p[0] for p in pts], dtype=float)
        bms = np.asarray([p[1] for p in pts], dtype=float)
        t_f = wilcoxon_ranksum(list(samples[:, 0]), list(bfs))
        t_m = wilcoxon_ranksum(list(samples[:, 1]), list(bms))
        centroid = (float(bfs.mean()), float(bms.mean()))
        sd = ((float(bfs.std(ddof=1)), float(bms.std(ddof=1)))
              if len(pts) > 1 else (0.0, 0.0))
        euclid = ((boot.centroid[0] - centroid[0]) ** 2
                  + (boot.centroid[1] - centroid[1]) ** 2) ** 0.5
        groups.append(GroupDistance(
            group=name, n_movies=len(pts),
            delta_b_f=abs(t_f.effect), p_b_f=t_f.p_value,
            delta_b_m=abs(t_m.effect), p_b_m=t_m.p_value,
            euclidean=euclid, centroid=centroid, sd=sd))
    return StreamMovieComparison(bootstrap=boot, groups=groups)
