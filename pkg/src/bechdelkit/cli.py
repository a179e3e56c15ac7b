"""Command line: parse-scripts, segment, score, compare, report.

Options resolve in three layers: built-in defaults, then a key=value
config file (--config), then explicit flags.  Outputs are deterministic
for a fixed seed: rows are sorted, JSON keys are sorted, and figures are
rendered with a fixed hash salt.  Exit codes: 0 ok, 1 unexpected error,
2 missing input, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analysis, gender, ingest, metrics, screenplay, segmentation

EXIT_OK, EXIT_ERROR, EXIT_MISSING_INPUT, EXIT_INVALID = 0, 1, 2, 3

DEFAULTS = {
    "min_mentions": 10,
    "min_aligned": 50,
    "min_ego_dialogues": 25,
    "sample_size": 225,
    "n_samples": 200,
    "ratio": 5.0,
    "t_min": 1.0,
    "min_gaps": 50,
    "seed": 0,
    "jobs": 1,
    "tau_seconds": None,
    "max_tau_candidates": None,
    "max_fit_sample": None,
    "out": "out",
}

_POSITIVE_KEYS = ("min_mentions", "min_aligned", "min_ego_dialogues",
                  "sample_size", "n_samples", "t_min", "min_gaps", "jobs")


class MissingInputError(Exception):
    pass


class ValidationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration.

def load_config_file(path: Path) -> dict[str, str]:
    """Parse a simple key=value config file (# starts a comment line)."""
    values: dict[str, str] = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}: bad config line {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class RunConfig:
    """Effective options: defaults <- config file <- explicit flags."""

    _CASTS = {"min_mentions": int, "min_aligned": int,
              "min_ego_dialogues": int, "sample_size": int, "n_samples": int,
              "ratio": float, "t_min": float, "min_gaps": int, "seed": int,
              "jobs": int, "tau_seconds": float, "max_tau_candidates": int,
              "max_fit_sample": int}

    def __init__(self, args: argparse.Namespace):
        self._args = args
        self._file: dict[str, str] = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.exists():
                raise MissingInputError(f"config file not found: {path}")
            self._file = load_config_file(path)
        for key in _POSITIVE_KEYS:
            value = self.get(key)
            if value is not None and value <= 0:
                raise ValidationError(f"{key} must be positive, got {value}")
        ratio = self.get("ratio")
        if ratio is not None and ratio <= 1:
            raise ValidationError(f"ratio must be > 1, got {ratio}")

    def get(self, key: str):
        explicit = getattr(self._args, key, None)
        if explicit is not None:
            return explicit
        if key in self._file:
            cast = self._CASTS.get(key, str)
            return cast(self._file[key])
        return DEFAULTS.get(key)

    def path(self, key: str, required: bool = False) -> Path | None:
        value = getattr(self._args, key, None)
        if value is None:
            value = self._file.get(key)
        if value is None:
            if required:
                raise MissingInputError(f"--{key.replace('_', '-')} is required")
            return None
        path = Path(value)
        if not path.exists():
            raise MissingInputError(f"input not found: {path}")
        return path

    def paths(self, key: str) -> list[Path]:
        value = getattr(self._args, key, None)
        if value is None:
            raw = self._file.get(key)
            value = [p.strip() for p in raw.split(",") if p.strip()] if raw else []
        result = []
        for item in value:
            path = Path(item)
            if not path.exists():
                raise MissingInputError(f"input not found: {path}")
            result.append(path)
        return result

    def out_dir(self) -> Path:
        out = Path(self.get("out"))
        out.mkdir(parents=True, exist_ok=True)
        return out


# ---------------------------------------------------------------------------
# Small IO helpers.

def _cell(value):
    return "" if value is None else value

def _write_csv(path: Path, fields, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def _opt_float(text: str) -> float | None:
    return float(text) if text not in (None, "") else None


def _opt_int(text: str) -> int | None:
    return int(text) if text not in (None, "") else None


def _fmt(value, width=8) -> str:
    if value is None:
        return "-".rjust(width)
    if isinstance(value, float):
        return f"{value:.4f}".rjust(width)
    return str(value).rjust(width)


def _build_reflex(cfg: RunConfig) -> gender.ReferenceLexicon:
    names_path = cfg.path("names")
    stoplists = [gender.load_wordlist(p) for p in cfg.paths("stoplist")]
    if names_path is not None:
        records = gender.read_name_records(names_path)
        lex = gender.build_lexicon(records, stoplists, ratio=cfg.get("ratio"))
    else:
        lex = gender.GenderLexicon(entries={}, ratio=cfg.get("ratio"))
    return gender.make_reference_lexicon(lex)


def _load_geo(cfg: RunConfig) -> ingest.GeoTables | None:
    states = cfg.path("geo_states")
    cities = cfg.path("geo_cities")
    if states is None or cities is None:
        return None
    return ingest.read_geo(states, cities)


def _load_attributes(cfg: RunConfig, lex: gender.GenderLexicon,
                     geo: ingest.GeoTables | None,
                     required: bool = False) -> dict[str, gender.UserAttributes] | None:
    profiles_path = cfg.path("profiles", required=required)
    if profiles_path is None:
        return None
    profiles = ingest.read_profiles(profiles_path)
    resolver = gender.LocationResolver(geo=geo) if geo is not None else None
    return {p.user_id: gender.derive_attributes(p, lex, resolver)
            for p in profiles}


# ---------------------------------------------------------------------------
# parse-scripts

_WORKER_REFLEX: list = []


def _init_script_worker(reflex):
    _WORKER_REFLEX.clear()
    _WORKER_REFLEX.append(reflex)


def _parse_one_script(path_str: str, cast_map: dict, min_aligned: int):
    reflex = _WORKER_REFLEX[0]
    movie_id = Path(path_str).stem
    text = Path(path_str).read_text(encoding="utf-8", errors="replace")
    try:
        doc = screenplay.parse_script(text, title=movie_id)
    except screenplay.NotAScreenplayError as exc:
        return (movie_id, None, None, None, str(exc))
    ds = screenplay.build_script_dialogues(doc, cast_map, reflex.detect)
    b = screenplay.classic_bechdel(ds, cast_map)
    report = metrics.metric_report(ds, min_aligned=min_aligned, label=movie_id)
    return (movie_id, list(ds.dialogues), report, b, None)


MOVIE_SCORE_FIELDS = ("movie_id", "b_classic") + metrics.MetricReport.CSV_FIELDS[1:]


def cmd_parse_scripts(cfg: RunConfig) -> int:
    scripts_dir = cfg.path("scripts", required=True)
    script_files = sorted(scripts_dir.glob("*.txt")) if scripts_dir.is_dir() \
        else [scripts_dir]
    if not script_files:
        raise MissingInputError(f"no .txt scripts under {scripts_dir}")
    cast_path = cfg.path("cast")
    cast = screenplay.read_cast(cast_path) if cast_path else {}
    reflex = _build_reflex(cfg)
    min_aligned = cfg.get("min_aligned")
    jobs = cfg.get("jobs")

    tasks = [(str(p), cast.get(p.stem, {}), min_aligned) for p in script_files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs,
                                 initializer=_init_script_worker,
                                 initargs=(reflex,)) as pool:
            results = list(pool.map(_parse_one_script, *zip(*tasks)))
    else:
        _init_script_worker(reflex)
        results = [_parse_one_script(*task) for task in tasks]
    results.sort(key=lambda r: r[0])

    out = cfg.out_dir()
    dia_dir = out / "movie_dialogues"
    dia_dir.mkdir(exist_ok=True)
    rows = []
    bundle = {}
    errors = {}
    print(f"{'movie':<24}{'b':>3}{'B_F':>9}{'B_M':>9}{'dialogues':>11}")
    for movie_id, dialogues, report, b, error in results:
        if error is not None:
            errors[movie_id] = error
            print(f"{movie_id:<24}  skipped: {error}", file=sys.stderr)
            continue
        ds = metrics.DialogueSet(dialogues, label=movie_id)
        metrics.write_dialogues(dia_dir / f"{movie_id}.jsonl", ds)
        rows.append([movie_id, b] + report.csv_row()[1:])
        bundle[movie_id] = {"b_classic": b, **report.to_dict()}
        print(f"{movie_id:<24}{b:>3}{_fmt(report.b_f, 9)}{_fmt(report.b_m, 9)}"
              f"{len(ds):>11}")
    if not rows:
        raise ValidationError("no script could be parsed: "
                              + "; ".join(f"{k}: {v}" for k, v in errors.items()))
    _write_csv(out / "movie_scores.csv", MOVIE_SCORE_FIELDS, rows)
    _write_json(out / "movie_scores.json", {"movies": bundle, "errors": errors})
    return EXIT_OK


# ---------------------------------------------------------------------------
# segment

def cmd_segment(cfg: RunConfig) -> int:
    messages_path = cfg.path("messages", required=True)
    loaded = ingest.read_messages(messages_path)
    reflex = _build_reflex(cfg)
    geo = _load_geo(cfg)
    attributes = _load_attributes(cfg, reflex.lexicon, geo)
    genders = {u: a.gender for u, a in attributes.items()} if attributes else {}

    pairs = ingest.filter_interacting_pairs(loaded.messages,
                                            min_mentions=cfg.get("min_mentions"))
    tau_override = cfg.get("tau_seconds")
    fit = None
    per_pair_fits: dict[str, dict] = {}
    if tau_override is not None:
        tau = tau_override
    else:
        gaps = segmentation.pooled_gaps(loaded.messages, pairs)
        try:
            fit = segmentation.fit_bimodal(
                gaps, t_min=cfg.get("t_min"), min_gaps=cfg.get("min_gaps"),
                max_candidates=cfg.get("max_tau_candidates"),
                max_sample=cfg.get("max_fit_sample"), seed=cfg.get("seed"))
        except segmentation.FitError as exc:
            raise ValidationError(f"bimodal fit failed: {exc}") from exc
        tau = fit.tau

    if getattr(cfg._args, "per_pair_fit", False) and tau_override is None:
        streams = segmentation.index_pair_streams(loaded.messages, pairs)
        dialogues = []
        for pair in sorted(streams):
            pair_gaps = segmentation._gaps_of(streams[pair])
            pair_tau = tau
            if len(pair_gaps) >= cfg.get("min_gaps"):
                try:
                    pf = segmentation.fit_bimodal(
                        pair_gaps, t_min=cfg.get("t_min"),
                        min_gaps=cfg.get("min_gaps"), seed=cfg.get("seed"))
                    pair_tau = pf.tau
                    per_pair_fits["|".join(pair)] = pf.to_dict()
                except segmentation.FitError:
                    pass
            dialogues.extend(segmentation._split_sorted(
                streams[pair], pair, pair_tau, reflex.detect, genders))
        ds = metrics.DialogueSet(dialogues, label="stream")
    else:
        ds = segmentation.segment_corpus(loaded.messages, pairs, tau,
                                         reflex.detect, genders)

    out = cfg.out_dir()
    metrics.write_dialogues(out / "dialogues_stream.jsonl", ds)
    _write_json(out / "fit.json", {
        "corpus": fit.to_dict() if fit else None,
        "tau_used": tau,
        "tau_override": tau_override,
        "per_pair": per_pair_fits,
    })
    _write_json(out / "segment_summary.json", {
        "messages": len(loaded.messages),
        "skipped_lines": loaded.skipped,
        "pairs": len(pairs),
        "dialogues": len(ds),
    })
    print(f"{'messages':>10}{'skipped':>9}{'pairs':>7}{'dialogues':>11}"
          f"{'tau (s)':>12}{'alpha':>8}")
    print(f"{len(loaded.messages):>10}{loaded.skipped:>9}{len(pairs):>7}"
          f"{len(ds):>11}{_fmt(tau, 12)}"
          f"{_fmt(fit.alpha if fit else None, 8)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# score

STATE_FIELDS = metrics.MetricReport.CSV_FIELDS + (
    "ci_i_f_lo", "ci_i_f_hi", "ci_i_m_lo", "ci_i_m_hi",
    "avg_income", "gini", "latitude", "longitude")

COHORT_FIELDS = ("cohort", "side") + metrics.MetricReport.CSV_FIELDS[1:] + (
    "ci_i_f_lo", "ci_i_f_hi", "ci_i_m_lo", "ci_i_m_hi")


def _ci_cells(report: metrics.MetricReport) -> list:
    ci_f = report.ci.get("i_f")
    ci_m = report.ci.get("i_m")
    return [ci_f[0] if ci_f else None, ci_f[1] if ci_f else None,
            ci_m[0] if ci_m else None, ci_m[1] if ci_m else None]


def read_movie_scores(path: Path) -> dict[str, dict]:
    """Load movie_scores.csv into movie_id -> {b, b_f, b_m}."""
    scores = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            scores[row["movie_id"]] = {
                "b": _opt_int(row.get("b_classic")),
                "b_f": _opt_float(row.get("b_f")),
                "b_m": _opt_float(row.get("b_m")),
            }
    return scores


def cmd_score(cfg: RunConfig) -> int:
    dialogues_path = cfg.path("dialogues", required=True)
    ds = metrics.read_dialogues(dialogues_path, label="corpus")
    min_aligned = cfg.get("min_aligned")
    reflex = _build_reflex(cfg)
    geo = _load_geo(cfg)
    attributes = _load_attributes(cfg, reflex.lexicon, geo)

    out = cfg.out_dir()
    corpus = metrics.metric_report(ds, min_aligned=min_aligned, label="corpus")
    _write_json(out / "corpus_report.json", corpus.to_dict())
    _write_csv(out / "corpus_report.csv", metrics.MetricReport.CSV_FIELDS,
               [corpus.csv_row()])
    print(f"{'':<10}{'B_F':>9}{'B_M':>9}{'X_F':>9}{'X_M':>9}{'I_F':>9}"
          f"{'I_M':>9}{'I_M-I_F':>9}")
    print(f"{'corpus':<10}{_fmt(corpus.b_f, 9)}{_fmt(corpus.b_m, 9)}"
          f"{_fmt(corpus.x_f, 9)}{_fmt(corpus.x_m, 9)}{_fmt(corpus.i_f, 9)}"
          f"{_fmt(corpus.i_m, 9)}{_fmt(corpus.asymmetry, 9)}")

    if attributes is not None:
        cohort_rows = []
        cohort_bundle = {}
        print(f"\n{'cohort':<24}{'I_F':>9}{'I_M':>9}{'I_M-I_F':>9}{'n':>7}")
        for spec in analysis.builtin_cohorts():
            comp = analysis.cohort_independence(ds, attributes, spec,
                                                min_aligned=min_aligned)
            cohort_bundle[spec.label] = comp.to_dict()
            for side, rep in (("cohort", comp.cohort),
                              ("complement", comp.complement)):
                cohort_rows.append([spec.label, side] + rep.csv_row()[1:]
                                   + _ci_cells(rep))
                name = spec.label if side == "cohort" else f"  not {spec.label}"
                print(f"{name:<24}{_fmt(rep.i_f, 9)}{_fmt(rep.i_m, 9)}"
                      f"{_fmt(rep.asymmetry, 9)}{rep.counts.n_total:>7}")
        _write_csv(out / "cohorts.csv", COHORT_FIELDS, cohort_rows)
        _write_json(out / "cohorts.json", cohort_bundle)

    if attributes is not None and geo is not None:
        state_reports = analysis.state_independence_map(ds, attributes, geo,
                                                        min_aligned=min_aligned)
        by_code = geo.states_by_code()
        state_rows = []
        print(f"\n{'state':<8}{'I_F':>9}{'I_M':>9}{'I_M-I_F':>9}{'n':>7}")
        for state, rep in sorted(state_reports.items()):
            srow = by_code[state]
            state_rows.append(rep.csv_row() + _ci_cells(rep)
                              + [srow.avg_income, srow.gini,
                                 srow.latitude_seconds, srow.longitude_seconds])
            print(f"{state:<8}{_fmt(rep.i_f, 9)}{_fmt(rep.i_m, 9)}"
                  f"{_fmt(rep.asymmetry, 9)}{rep.counts.n_total:>7}")
        _write_csv(out / "states.csv", STATE_FIELDS, state_rows)
        corr = analysis.state_correlates(state_reports, geo)
        _write_csv(out / "state_correlations.csv",
                   analysis.CorrelationRow.CSV_FIELDS,
                   [r.csv_row() for r in corr])

    shares_path = cfg.path("shares")
    movies_path = cfg.path("movies")
    if shares_path and movies_path and attributes is not None:
        shares = ingest.read_shares(shares_path)
        movies = {m.movie_id: m for m in ingest.read_movies(movies_path)}
        ingest.check_share_references(shares, attributes.keys(), movies.keys())
        movie_scores_path = cfg.path("movie_scores")
        movie_scores = None
        if movie_scores_path:
            movie_scores = {mid: (row["b_f"], row["b_m"])
                            for mid, row in read_movie_scores(movie_scores_path).items()}
        share_cmp = analysis.compare_shares_by_sharer_gender(
            shares, movies, attributes, movie_scores)
        imbalance = analysis.sharer_imbalance_by_pass(
            shares, movies, ds, attributes,
            min_dialogues=cfg.get("min_ego_dialogues"))
        popularity = analysis.compare_popularity_by_pass(movies.values())
        _write_json(out / "share_tests.json", {
            "by_sharer_gender": share_cmp.to_dict(),
            "imbalance_by_pass": imbalance.to_dict(),
            "popularity_by_pass": popularity.to_dict(),
        })
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare

def cmd_compare(cfg: RunConfig) -> int:
    dialogues_path = cfg.path("dialogues", required=True)
    scores_path = cfg.path("movie_scores", required=True)
    ds = metrics.read_dialogues(dialogues_path, label="stream")
    scores = read_movie_scores(scores_path)
    points = [(row["b"], row["b_f"], row["b_m"]) for row in scores.values()]
    try:
        result = analysis.compare_to_movie_groups(
            ds, points, sample_size=cfg.get("sample_size"),
            n_samples=cfg.get("n_samples"), seed=cfg.get("seed"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    out = cfg.out_dir()
    boot = result.bootstrap
    centroid_rows = [["stream", boot.centroid[0], boot.centroid[1],
                      boot.sd[0], boot.sd[1], boot.n_samples]]
    for g in result.groups:
        cf, cm = g.centroid if g.centroid else (None, None)
        sf, sm = g.sd if g.sd else (None, None)
        centroid_rows.append([f"movies_{g.group}", cf, cm, sf, sm, g.n_movies])
    _write_csv(out / "centroids.csv",
               ("label", "b_f", "b_m", "sd_b_f", "sd_b_m", "n"), centroid_rows)
    _write_csv(out / "distances.csv", analysis.GroupDistance.CSV_FIELDS,
               [g.csv_row() for g in result.groups])
    _write_json(out / "compare.json", result.to_dict())
    print(f"{'group':<14}{'n':>5}{'dB_F':>9}{'p':>11}{'dB_M':>9}{'p':>11}"
          f"{'euclid':>9}")
    for g in result.groups:
        print(f"{g.group:<14}{g.n_movies:>5}{_fmt(g.delta_b_f, 9)}"
              f"{_fmt(g.p_b_f, 11)}{_fmt(g.delta_b_m, 9)}{_fmt(g.p_b_m, 11)}"
              f"{_fmt(g.euclidean, 9)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report

def _read_csv_dicts(path: Path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(cfg: RunConfig) -> int:
    from . import plotting  # deferred: pulls in matplotlib

    in_dir = cfg.path("in_dir", required=True)
    out = cfg.out_dir()
    figures: list[str] = []
    bundle: dict = {"figures": figures, "sources": []}

    scores_csv = in_dir / "movie_scores.csv"
    if scores_csv.exists():
        rows = _read_csv_dicts(scores_csv)
        pts = [(_opt_float(r["b_f"]), _opt_float(r["b_m"]),
                _opt_int(r["b_classic"])) for r in rows]
        path = out / "score_scatter.svg"
        plotting.score_scatter(pts, path)
        figures.append(path.name)
        bundle["sources"].append(scores_csv.name)

    compare_json = in_dir / "compare.json"
    if compare_json.exists():
        comp = json.loads(compare_json.read_text(encoding="utf-8"))
        boot = comp["bootstrap"]
        groups = [("stream", tuple(boot["centroid"]), tuple(boot["sd"]),
                   "#ff7f00")]
        palette = {"pass": "#08306b", "fail": "#99000d"}
        for g in comp["groups"]:
            if g["centroid_b_f"] is None:
                continue
            groups.append((f"movies {g['group']}",
                           (g["centroid_b_f"], g["centroid_b_m"]),
                           (g["sd_b_f"], g["sd_b_m"]),
                           palette.get(g["group"], "#555555")))
        path = out / "centroid_ellipses.svg"
        plotting.centroid_ellipses(groups, path)
        figures.append(path.name)
        bundle["sources"].append(compare_json.name)

    states_csv = in_dir / "states.csv"
    if states_csv.exists():
        rows = _read_csv_dicts(states_csv)
        asym = [(r["label"], _opt_float(r["asymmetry"])) for r in rows]
        path = out / "state_asymmetry.svg"
        plotting.state_asymmetry_chart(asym, path)
        figures.append(path.name)
        for metric, covariate, xlabel in (
                ("i_f", "avg_income", "state average income"),
                ("i_m", "latitude", "largest-city latitude (s N)")):
            pts = [(float(r[covariate]), _opt_float(r[metric]), r["label"])
                   for r in rows
                   if r[covariate] not in ("", None) and _opt_float(r[metric]) is not None]
            if len(pts) >= 2:
                path = out / f"independence_{metric}_vs_{covariate}.svg"
                plotting.trend_scatter([p[0] for p in pts], [p[1] for p in pts],
                                       [p[2] for p in pts], path,
                                       xlabel=xlabel,
                                       ylabel=f"${metric[0].upper()}_{{{metric[2].upper()}}}$")
                figures.append(path.name)
        bundle["sources"].append(states_csv.name)

    cohorts_csv = in_dir / "cohorts.csv"
    if cohorts_csv.exists():
        rows = _read_csv_dicts(cohorts_csv)
        bars = []
        for r in rows:
            ci_f = (_opt_float(r["ci_i_f_lo"]), _opt_float(r["ci_i_f_hi"]))
            ci_m = (_opt_float(r["ci_i_m_lo"]), _opt_float(r["ci_i_m_hi"]))
            bars.append((f"{r['cohort']}:{r['side']}",
                         _opt_float(r["i_f"]),
                         ci_f if ci_f[0] is not None else None,
                         _opt_float(r["i_m"]),
                         ci_m if ci_m[0] is not None else None))
        path = out / "cohort_independence.svg"
        plotting.cohort_errorbars(bars, path)
        figures.append(path.name)
        bundle["sources"].append(cohorts_csv.name)

    corpus_json = in_dir / "corpus_report.json"
    if corpus_json.exists():
        bundle["corpus"] = json.loads(corpus_json.read_text(encoding="utf-8"))
        bundle["sources"].append(corpus_json.name)

    if not bundle["sources"]:
        raise MissingInputError(f"no report inputs found under {in_dir}")
    _write_json(out / "report.json", bundle)
    print(f"report.json + {len(figures)} figure(s) written to {out}")
    for name in figures:
        print(f"  {name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing.

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="random seed (default: 0)")


def _add_lexicon_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--names", help="name-frequency CSV (name,gender,count)")
    p.add_argument("--stoplist", action="append",
                   help="stoplist file, one token per line (repeatable)")
    p.add_argument("--ratio", type=float,
                   help="gender dominance ratio for the lexicon (default: 5)")


def _add_geo_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--geo-states", dest="geo_states",
                   help="per-state CSV (income, gini, coordinates)")
    p.add_argument("--geo-cities", dest="geo_cities",
                   help="largest-cities CSV (city,state)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bechdelkit",
        description="Gender-asymmetry metrics for dialogue corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse-scripts",
                       help="parse screenplays into dialogues and scores")
    p.add_argument("--scripts", help="directory of .txt screenplays (or one file)")
    p.add_argument("--cast", help="cast CSV (movie_id,character_cue,gender)")
    p.add_argument("--min-aligned", dest="min_aligned", type=int)
    p.add_argument("--jobs", type=int, help="parallel workers (default: 1)")
    _add_lexicon_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_parse_scripts)

    p = sub.add_parser("segment",
                       help="fit the burst model and split message streams")
    p.add_argument("--messages", help="line-delimited message file")
    p.add_argument("--profiles", help="profiles CSV")
    p.add_argument("--min-mentions", dest="min_mentions", type=int)
    p.add_argument("--tau-seconds", dest="tau_seconds", type=float,
                   help="skip fitting and split at this cutoff")
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--min-gaps", dest="min_gaps", type=int)
    p.add_argument("--per-pair-fit", dest="per_pair_fit", action="store_true",
                   help="fit tau per pair when a pair has enough gaps")
    p.add_argument("--max-tau-candidates", dest="max_tau_candidates", type=int,
                   help="thin the cutoff grid for very large corpora")
    p.add_argument("--max-fit-sample", dest="max_fit_sample", type=int,
                   help="fit on a subsample of at most this many gaps")
    _add_lexicon_opts(p)
    _add_geo_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("score", help="metric reports: corpus, cohorts, states")
    p.add_argument("--dialogues", help="dialogues JSONL (from segment/parse-scripts)")
    p.add_argument("--profiles", help="profiles CSV")
    p.add_argument("--shares", help="shares CSV (user_id,movie_id)")
    p.add_argument("--movies", help="movies CSV")
    p.add_argument("--movie-scores", dest="movie_scores",
                   help="movie_scores.csv from parse-scripts")
    p.add_argument("--min-aligned", dest="min_aligned", type=int)
    p.add_argument("--min-ego-dialogues", dest="min_ego_dialogues", type=int)
    _add_lexicon_opts(p)
    _add_geo_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare",
                       help="distance table stream vs pass/fail movie groups")
    p.add_argument("--dialogues", help="stream dialogues JSONL")
    p.add_argument("--movie-scores", dest="movie_scores",
                   help="movie_scores.csv from parse-scripts")
    p.add_argument("--sample-size", dest="sample_size", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="render figures and the report bundle")
    p.add_argument("--in", dest="in_dir",
                   help="directory holding outputs of the other commands")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args)
        return args.func(cfg)
    except (MissingInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ValidationError, ValueError) as exc:
        # CorpusError is a ValueError; any other ValueError from parsing
        # user-supplied data is a validation failure too
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BrokenPipeError:
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
