"""Name-based gender inference, gender-reference detection, profile flags.

The lexicon is built from name-frequency records (the public national
baby-name format): a name is assigned to a gender only when it is used at
least `ratio` times more often for that gender than for the other, and
names on the supplied stoplists (dictionary words, toponyms) are removed
entirely.  Reference detection extends the lexicon with closed-class
gendered words ("her", "him", ...), which always win over name counts.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .ingest import GeoTables, UserProfile

MALE, FEMALE, UNKNOWN = "M", "F", "U"
DROPPED = "dropped"

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_STRIP_RE = re.compile(r"[\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased unicode word tokens; possessives split off naturally."""
    return _WORD_RE.findall(text.lower())


def _data_path(name: str):
    return resources.files("bechdelkit").joinpath("data", name)


def load_wordlist(source) -> frozenset[str]:
    """Read a one-token-per-line UTF-8 word list (path or traversable)."""
    if hasattr(source, "read_text"):
        text = source.read_text(encoding="utf-8")
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(line.strip().lower() for line in text.splitlines()
                     if line.strip())


def default_wordlist(name: str) -> frozenset[str]:
    return load_wordlist(_data_path(name))


# ---------------------------------------------------------------------------
# Lexicon.

@dataclass(frozen=True)
class LexiconEntry:
    male_count: int
    female_count: int
    assigned: str  # MALE, FEMALE or DROPPED


@dataclass
class GenderLexicon:
    """Token -> (counts, assignment).  Stoplisted tokens are absent."""

    entries: dict[str, LexiconEntry]
    ratio: float = 5.0

    def assignment(self, token: str) -> str:
        entry = self.entries.get(token)
        if entry is None or entry.assigned == DROPPED:
            return UNKNOWN
        return entry.assigned

    def __len__(self) -> int:
        return len(self.entries)


def build_lexicon(name_records: Iterable[tuple[str, str, int]],
                  stoplists: Sequence[Iterable[str]] = (),
                  ratio: float = 5.0) -> GenderLexicon:
    """Aggregate (name, gender, count) records into a gender lexicon.

    A name is assigned M when male_count >= ratio * female_count, F when
    female_count >= ratio * male_count, and dropped otherwise (including
    zero counts on both sides).
    """
    if ratio <= 1:
        raise ValueError("ratio must be > 1")
    stop: set[str] = set()
    for lst in stoplists:
        stop.update(t.strip().lower() for t in lst)
    counts: dict[str, list[int]] = {}
    for name, gender, count in name_records:
        if count < 0:
            raise ValueError(f"negative count for name {name!r}")
        token = name.strip().lower()
        if not token or token in stop:
            continue
        g = gender.strip().upper()
        if g not in (MALE, FEMALE):
            raise ValueError(f"name record gender must be M or F, got {gender!r}")
        mc_fc = counts.setdefault(token, [0, 0])
        mc_fc[0 if g == MALE else 1] += count
    entries = {}
    for token, (mc, fc) in counts.items():
        if mc + fc == 0:
            assigned = DROPPED
        elif mc >= ratio * fc:
            assigned = MALE
        elif fc >= ratio * mc:
            assigned = FEMALE
        else:
            assigned = DROPPED
        entries[token] = LexiconEntry(male_count=mc, female_count=fc,
                                      assigned=assigned)
    return GenderLexicon(entries=entries, ratio=ratio)


def read_name_records(path) -> list[tuple[str, str, int]]:
    """Read the name-frequency CSV (columns: name, gender, count)."""
    from .ingest import CorpusError

    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("name", "gender", "count")
                   if c not in (reader.fieldnames or [])]
        if missing:
            raise CorpusError(f"{path}: missing column(s) {missing}")
        for row in reader:
            try:
                count = int(row["count"])
            except ValueError:
                raise CorpusError(f"{path}: bad count for name "
                                  f"{row['name']!r}: {row['count']!r}") from None
            records.append((row["name"], row["gender"], count))
    return records


def infer_gender(full_name: str, lex: GenderLexicon) -> str:
    """Gender of the first name token, or U when the lexicon is silent."""
    parts = full_name.split()
    if not parts:
        return UNKNOWN
    token = _STRIP_RE.sub("", parts[0]).lower()
    if not token:
        return UNKNOWN
    return lex.assignment(token)


# ---------------------------------------------------------------------------
# Reference detection.

@dataclass
class ReferenceLexicon:
    """Gender lexicon plus closed-class gendered word sets.

    The word sets win over name counts: a token in a gendered word set is
    classified by that set even if the name lexicon disagrees.
    """

    lexicon: GenderLexicon
    male_words: frozenset[str]
    female_words: frozenset[str]

    def __post_init__(self):
        overlap = self.male_words & self.female_words
        if overlap:
            raise ValueError(f"gendered word sets overlap: {sorted(overlap)[:5]}")

    def classify(self, token: str) -> str:
        if token in self.male_words:
            return MALE
        if token in self.female_words:
            return FEMALE
        return self.lexicon.assignment(token)

    def detect(self, text: str) -> tuple[int, int]:
        return detect_references(text, self)

    def swapped(self) -> "ReferenceLexicon":
        """M<->F mirror of this lexicon (for symmetry checks)."""
        entries = {}
        flip = {MALE: FEMALE, FEMALE: MALE, DROPPED: DROPPED}
        for tok, e in self.lexicon.entries.items():
            entries[tok] = LexiconEntry(male_count=e.female_count,
                                        female_count=e.male_count,
                                        assigned=flip[e.assigned])
        return ReferenceLexicon(
            lexicon=GenderLexicon(entries=entries, ratio=self.lexicon.ratio),
            male_words=self.female_words, female_words=self.male_words)


def make_reference_lexicon(lex: GenderLexicon,
                           male_words: Iterable[str] | None = None,
                           female_words: Iterable[str] | None = None) -> ReferenceLexicon:
    """Attach gendered word sets to a lexicon (bundled defaults if None)."""
    mw = frozenset(male_words) if male_words is not None \
        else default_wordlist("male_words.txt")
    fw = frozenset(female_words) if female_words is not None \
        else default_wordlist("female_words.txt")
    return ReferenceLexicon(lexicon=lex, male_words=mw, female_words=fw)


def detect_references(text: str, lex: ReferenceLexicon) -> tuple[int, int]:
    """(m, f) flags: does the text mention either gender at all?"""
    m = f = 0
    for token in tokenize(text):
        g = lex.classify(token)
        if g == MALE:
            m = 1
        elif g == FEMALE:
            f = 1
        if m and f:
            break
    return m, f


# ---------------------------------------------------------------------------
# Profile flags.

DEFAULT_FLAG_FILES = {"mother": "mother_words.txt",
                      "father": "father_words.txt",
                      "student": "student_words.txt"}


def default_flag_sets() -> dict[str, frozenset[str]]:
    return {flag: default_wordlist(fname)
            for flag, fname in DEFAULT_FLAG_FILES.items()}


def profile_flags(bio: str,
                  flag_sets: Mapping[str, frozenset[str]] | None = None) -> dict[str, bool]:
    """Keyword flags (mother/father/student by default) from a profile bio."""
    sets = flag_sets if flag_sets is not None else default_flag_sets()
    tokens = set(tokenize(bio))
    return {flag: bool(tokens & words) for flag, words in sets.items()}


# ---------------------------------------------------------------------------
# Location resolution.

URBAN, RURAL = "urban", "rural"


def _norm_phrase(s: str) -> str:
    return " ".join(re.findall(r"[^\W_]+", s.lower(), re.UNICODE))


def load_state_names(path=None) -> dict[str, str]:
    """Normalized state name -> code (bundled US table by default)."""
    src = path if path is not None else _data_path("us_states.csv")
    if hasattr(src, "open"):
        fh = src.open("r", encoding="utf-8")
    else:
        fh = open(src, "r", encoding="utf-8", newline="")
    with fh:
        return {_norm_phrase(row["name"]): row["code"].strip().upper()
                for row in csv.DictReader(fh)}


def load_city_aliases(path=None) -> dict[str, str]:
    """Normalized alias -> normalized city name (bundled table by default)."""
    src = path if path is not None else _data_path("city_aliases.csv")
    if hasattr(src, "open"):
        fh = src.open("r", encoding="utf-8")
    else:
        fh = open(src, "r", encoding="utf-8", newline="")
    with fh:
        return {_norm_phrase(row["alias"]): _norm_phrase(row["city"])
                for row in csv.DictReader(fh)}


@dataclass
class LocationResolver:
    """Matches free-text locations against the largest-cities table.

    Substring matching is normalized and longest-first.  Two-letter state
    codes are matched case-sensitively (uppercase tokens only) to avoid
    colliding with common words such as "in" or "me"; full state names
    match case-insensitively.
    """

    geo: GeoTables
    aliases: dict[str, str] = field(default_factory=load_city_aliases)
    state_names: dict[str, str] = field(default_factory=load_state_names)

    def __post_init__(self):
        self._city_states: dict[str, set[str]] = {}
        for city, state in self.geo.top_cities:
            self._city_states.setdefault(_norm_phrase(city), set()).add(state.upper())
        self._candidates: list[tuple[str, set[str]]] = []
        for name, states in self._city_states.items():
            self._candidates.append((name, states))
        for alias, city in self.aliases.items():
            if city in self._city_states:
                self._candidates.append((alias, self._city_states[city]))
        self._candidates.sort(key=lambda item: len(item[0]), reverse=True)
        self._codes = {s.code.upper() for s in self.geo.states}

    def _explicit_state(self, raw: str, norm: str) -> str | None:
        padded = f" {norm} "
        for name in sorted(self.state_names, key=len, reverse=True):
            if f" {name} " in padded:
                code = self.state_names[name]
                if code in self._codes:
                    return code
        for token in re.findall(r"[A-Za-z]+", raw):
            if token.isupper() and token in self._codes:
                return token
        return None

    def resolve(self, location_raw: str) -> tuple[str, str]:
        """(state code or "unknown", "urban" | "rural" | "unknown")."""
        norm = _norm_phrase(location_raw)
        if not norm:
            return ("unknown", "unknown")
        padded = f" {norm} "
        explicit = self._explicit_state(location_raw, norm)
        for name, states in self._candidates:
            if f" {name} " not in padded:
                continue
            if explicit is not None:
                if explicit in states:
                    return (explicit, URBAN)
                continue  # conflicting city, trust the explicit state
            if len(states) == 1:
                return (next(iter(states)), URBAN)
            # ambiguous city with no disambiguating state token
        if explicit is not None:
            return (explicit, RURAL)
        return ("unknown", "unknown")


def locate_user(location_raw: str, geo: GeoTables,
                resolver: LocationResolver | None = None) -> tuple[str, str]:
    """Resolve a raw location string to (state, urbanity).

    Building a LocationResolver once and reusing it is cheaper for bulk
    lookups; this wrapper constructs one per call for convenience.
    """
    if resolver is None:
        resolver = LocationResolver(geo=geo)
    return resolver.resolve(location_raw)


# ---------------------------------------------------------------------------
# Profile-derived attributes consumed by the analysis recipes.

@dataclass(frozen=True)
class UserAttributes:
    user_id: str
    gender: str
    mother: bool
    father: bool
    student: bool
    state: str
    urbanity: str


def derive_attributes(profile: UserProfile, lex: GenderLexicon,
                      resolver: LocationResolver | None = None,
                      flag_sets: Mapping[str, frozenset[str]] | None = None) -> UserAttributes:
    flags = profile_flags(profile.bio, flag_sets)
    if resolver is not None:
        state, urbanity = resolver.resolve(profile.location_raw)
    else:
        state, urbanity = "unknown", "unknown"
    return UserAttributes(user_id=profile.user_id,
                          gender=infer_gender(profile.full_name, lex),
                          mother=flags.get("mother", False),
                          father=flags.get("father", False),
                          student=flags.get("student", False),
                          state=state, urbanity=urbanity)
