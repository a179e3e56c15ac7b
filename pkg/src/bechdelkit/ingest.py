"""Readers for the external data files and corpus-level filters.

Message streams arrive as line-delimited JSON (one object per line);
profiles, movies, shares and geographic tables are CSV with a header row.
Sparsely corrupted message files stay usable: malformed lines are skipped
and counted, never fatal.  Metadata CSVs are curated inputs, so their
validation failures raise :class:`CorpusError`.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    """A fatal problem with an input file (duplicates, range violations)."""


@dataclass(slots=True)
class Message:
    """One timestamped utterance by one author, possibly mentioning others."""

    msg_id: str
    author_id: str
    timestamp: int
    text: str
    mentioned_ids: tuple[str, ...]


@dataclass(slots=True)
class UserProfile:
    user_id: str
    full_name: str
    bio: str
    location_raw: str


@dataclass(slots=True)
class MovieRecord:
    movie_id: str
    title: str
    bechdel_b: int | None = None
    disputed: bool = False
    views: int | None = None
    likes: int | None = None
    dislikes: int | None = None


@dataclass(slots=True)
class ShareRecord:
    user_id: str
    movie_id: str


@dataclass(slots=True)
class StateRow:
    code: str
    avg_income: float
    gini: float
    latitude_seconds: int   # north of the Equator
    longitude_seconds: int  # west of Greenwich


@dataclass
class GeoTables:
    top_cities: tuple[tuple[str, str], ...]
    states: tuple[StateRow, ...]

    def states_by_code(self) -> dict[str, StateRow]:
        return {s.code: s for s in self.states}


@dataclass
class LoadedMessages:
    """Messages plus the count of malformed lines that were skipped."""

    messages: list[Message]
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)


def read_messages(path) -> LoadedMessages:
    """Read a line-delimited message file, skipping malformed lines.

    Each line must be a JSON object with msg_id, author_id, timestamp
    (non-negative integer epoch seconds), text and mentioned_ids.  Lines
    that fail to parse or violate those invariants are counted, not fatal.
    """
    messages: list[Message] = []
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                author = obj["author_id"]
                ts = obj["timestamp"]
                if not isinstance(author, str) or not author:
                    raise ValueError("empty author_id")
                if not isinstance(ts, int) or isinstance(ts, bool) or ts < 0:
                    raise ValueError("bad timestamp")
                mentioned = tuple(str(u) for u in obj.get("mentioned_ids", ()))
                messages.append(Message(msg_id=str(obj["msg_id"]),
                                        author_id=author,
                                        timestamp=ts,
                                        text=str(obj.get("text", "")),
                                        mentioned_ids=mentioned))
            except (ValueError, KeyError, TypeError):
                skipped += 1
    if skipped:
        log.warning("%s: skipped %d malformed message line(s)", path, skipped)
    return LoadedMessages(messages=messages, skipped=skipped)


def mention_counts(messages: Iterable[Message]) -> Counter:
    """Unordered-pair counter of messages in which one member mentions the other."""
    counts: Counter = Counter()
    for msg in messages:
        a = msg.author_id
        for b in set(msg.mentioned_ids):
            if b != a:
                counts[(a, b) if a < b else (b, a)] += 1
    return counts


def filter_interacting_pairs(messages: Iterable[Message],
                             min_mentions: int = 10) -> set[tuple[str, str]]:
    """Unordered author pairs that exchanged at least `min_mentions` mentions.

    The threshold applies to the two directions summed; a one-sided
    exchange of `min_mentions` messages qualifies.  Self-mentions never
    count.
    """
    if min_mentions < 1:
        raise ValueError("min_mentions must be >= 1")
    counts = mention_counts(messages)
    return {pair for pair, n in counts.items() if n >= min_mentions}


# ---------------------------------------------------------------------------
# CSV readers.

def _open_csv(path, required: Sequence[str]):
    fh = open(path, "r", encoding="utf-8", newline="")
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        fh.close()
        raise CorpusError(f"{path}: missing column(s) {missing}")
    return fh, reader


def _check_unique(path, kind: str, ids: list[str]) -> None:
    dupes = sorted({i for i, n in Counter(ids).items() if n > 1})
    if dupes:
        shown = ", ".join(dupes[:10])
        raise CorpusError(f"{path}: duplicate {kind} id(s): {shown}")


def read_profiles(path) -> list[UserProfile]:
    fh, reader = _open_csv(path, ("user_id", "full_name", "bio", "location_raw"))
    with fh:
        profiles = [UserProfile(user_id=row["user_id"],
                                full_name=row["full_name"],
                                bio=row["bio"],
                                location_raw=row["location_raw"])
                    for row in reader]
    for p in profiles:
        if not p.user_id:
            raise CorpusError(f"{path}: profile with empty user_id")
    _check_unique(path, "user", [p.user_id for p in profiles])
    return profiles


def _opt_int(value: str, what: str, path, minimum: int = 0) -> int | None:
    if value is None or value == "":
        return None
    try:
        n = int(value)
    except ValueError:
        raise CorpusError(f"{path}: bad {what} value {value!r}") from None
    if n < minimum:
        raise CorpusError(f"{path}: {what} must be >= {minimum}, got {n}")
    return n


_TRUE = {"true", "1", "yes", "y"}
_FALSE = {"false", "0", "no", "n", ""}


def _parse_bool(value: str, path) -> bool:
    v = (value or "").strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise CorpusError(f"{path}: bad boolean value {value!r}")


def read_movies(path) -> list[MovieRecord]:
    fh, reader = _open_csv(path, ("movie_id", "title", "bechdel_b", "disputed",
                                  "views", "likes", "dislikes"))
    movies = []
    with fh:
        for row in reader:
            b = _opt_int(row["bechdel_b"], "bechdel_b", path)
            if b is not None and not 0 <= b <= 3:
                raise CorpusError(f"{path}: bechdel_b out of range 0..3: {b} "
                                  f"(movie {row['movie_id']!r})")
            movies.append(MovieRecord(
                movie_id=row["movie_id"], title=row["title"],
                bechdel_b=b, disputed=_parse_bool(row["disputed"], path),
                views=_opt_int(row["views"], "views", path),
                likes=_opt_int(row["likes"], "likes", path),
                dislikes=_opt_int(row["dislikes"], "dislikes", path)))
    _check_unique(path, "movie", [m.movie_id for m in movies])
    return movies


def read_shares(path) -> list[ShareRecord]:
    fh, reader = _open_csv(path, ("user_id", "movie_id"))
    with fh:
        return [ShareRecord(user_id=row["user_id"], movie_id=row["movie_id"])
                for row in reader]


def check_share_references(shares: Iterable[ShareRecord],
                           user_ids: Iterable[str],
                           movie_ids: Iterable[str]) -> list[ShareRecord]:
    """Shares whose user or movie id is unknown (reported, not fatal)."""
    users = set(user_ids)
    movies = set(movie_ids)
    dangling = [s for s in shares
                if s.user_id not in users or s.movie_id not in movies]
    if dangling:
        log.warning("%d share(s) reference unknown users or movies", len(dangling))
    return dangling


MAX_LATITUDE_SECONDS = 90 * 3600


def read_geo(states_path, cities_path) -> GeoTables:
    """Read the per-state table and the largest-cities table.

    State rows carry average income, Gini index, and the largest city's
    coordinates in integer seconds north of the Equator / west of
    Greenwich.
    """
    fh, reader = _open_csv(states_path, ("state", "avg_income", "gini",
                                         "largest_city_latitude",
                                         "largest_city_longitude"))
    states = []
    with fh:
        for row in reader:
            try:
                gini = float(row["gini"])
                income = float(row["avg_income"])
                lat = int(row["largest_city_latitude"])
                lon = int(row["largest_city_longitude"])
            except ValueError as exc:
                raise CorpusError(f"{states_path}: bad numeric cell in state "
                                  f"row {row['state']!r}: {exc}") from None
            if not 0.0 <= gini <= 1.0:
                raise CorpusError(f"{states_path}: gini out of [0,1]: {gini}")
            if not 0 <= lat <= MAX_LATITUDE_SECONDS:
                raise CorpusError(f"{states_path}: latitude out of range: {lat}")
            states.append(StateRow(code=row["state"].strip().upper(),
                                   avg_income=income, gini=gini,
                                   latitude_seconds=lat,
                                   longitude_seconds=lon))
    _check_unique(states_path, "state", [s.code for s in states])
    fh, reader = _open_csv(cities_path, ("city", "state"))
    with fh:
        cities = tuple((row["city"], row["state"].strip().upper())
                       for row in reader)
    return GeoTables(top_cities=cities, states=tuple(states))
