"""Plain-text screenplay parsing and script-level dialogue construction.

Scene headings (INT./EXT./EST. prefixes) and transitions ("CUT TO:" and
friends) separate scenes.  A character cue is an uppercase line followed
by one or more non-empty dialogue lines; parenthetical-only lines between
cue and dialogue are skipped, everything else is action and discarded.
Within a scene, consecutive lines group into maximal two-speaker runs;
each run of two distinct speakers becomes one dialogue.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from typing import Callable, Mapping

from .metrics import Dialogue, DialogueSet

_HEADING_RE = re.compile(r"^(?:INT|EXT|EST)[.\s/]", re.IGNORECASE)
_TRANSITIONS = {"FADE IN:", "FADE OUT.", "FADE OUT:", "FADE TO BLACK.",
                "THE END"}
_PARENS_RE = re.compile(r"\([^)]*\)")


class NotAScreenplayError(ValueError):
    """Raised when a text contains no detectable character lines."""


@dataclass(frozen=True)
class ScriptLine:
    character_cue: str  # normalized: parentheticals stripped, uppercased
    utterance: str


@dataclass(frozen=True)
class Scene:
    heading: str
    lines: tuple[ScriptLine, ...]


@dataclass(frozen=True)
class ScriptDocument:
    title: str
    scenes: tuple[Scene, ...]

    def character_line_count(self) -> int:
        return sum(len(s.lines) for s in self.scenes)


def normalize_cue(raw: str) -> str:
    """Strip parentheticals ((V.O.), (CONT'D), ...) and uppercase."""
    base = _PARENS_RE.sub(" ", raw)
    return " ".join(base.split()).upper()


def is_scene_heading(line: str) -> bool:
    return bool(_HEADING_RE.match(line.strip()))


def is_transition(line: str) -> bool:
    s = line.strip()
    if not s or s != s.upper():
        return False
    return s.endswith("TO:") or s in _TRANSITIONS


def _is_parenthetical(line: str) -> bool:
    s = line.strip()
    return s.startswith("(") and s.endswith(")") and len(s) >= 2


def _is_cue_candidate(line: str) -> bool:
    s = line.strip()
    if not s or is_scene_heading(s) or is_transition(s) or _is_parenthetical(s):
        return False
    base = normalize_cue(s)
    if not base or not any(ch.isalpha() for ch in base):
        return False
    return s == s.upper()


def parse_script(text: str, title: str = "") -> ScriptDocument:
    """Parse screenplay text into scenes of (cue, utterance) lines.

    Lines appearing before the first heading form an implicit scene with
    an empty heading.  Raises NotAScreenplayError when no character line
    is found.
    """
    lines = text.splitlines()
    n = len(lines)
    scenes: list[tuple[str, list[ScriptLine]]] = []

    def current_scene() -> list[ScriptLine]:
        if not scenes:
            scenes.append(("", []))
        return scenes[-1][1]

    i = 0
    while i < n:
        stripped = lines[i].strip()
        if not stripped:
            i += 1
            continue
        if is_scene_heading(stripped) or is_transition(stripped):
            scenes.append((stripped, []))
            i += 1
            continue
        if _is_cue_candidate(stripped):
            # dialogue starts at the next non-parenthetical line
            j = i + 1
            while j < n and _is_parenthetical(lines[j].strip()):
                j += 1
            if j < n:
                nxt = lines[j].strip()
                starts_dialogue = (nxt and not is_scene_heading(nxt)
                                   and not is_transition(nxt)
                                   and not _is_cue_candidate(nxt))
            else:
                starts_dialogue = False
            if starts_dialogue:
                parts = []
                while j < n:
                    s = lines[j].strip()
                    if not s or is_scene_heading(s) or is_transition(s) \
                            or _is_cue_candidate(s):
                        break
                    if not _is_parenthetical(s):
                        parts.append(s)
                    j += 1
                current_scene().append(ScriptLine(
                    character_cue=normalize_cue(stripped),
                    utterance=" ".join(parts)))
                i = j
                continue
        # action line: discarded
        i += 1

    doc = ScriptDocument(
        title=title,
        scenes=tuple(Scene(heading=h, lines=tuple(ls)) for h, ls in scenes))
    if doc.character_line_count() == 0:
        raise NotAScreenplayError("not a screenplay: no character lines detected")
    return doc


def render_script(doc: ScriptDocument) -> str:
    """Canonical text rendering; parse_script(render_script(d)) == d."""
    out: list[str] = []
    for scene in doc.scenes:
        if scene.heading:
            out.append(scene.heading)
            out.append("")
        for line in scene.lines:
            out.append(line.character_cue)
            out.append(line.utterance)
            out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Dialogue construction.

def build_script_dialogues(doc: ScriptDocument,
                           cast: Mapping[str, str],
                           refdet: Callable[[str], tuple[int, int]]) -> DialogueSet:
    """Group each scene's lines into maximal two-speaker runs.

    A run ends at a scene boundary or when a line's speaker falls outside
    the current pair (that line starts the next candidate run).  Runs with
    a single distinct speaker yield no dialogue.  Cues missing from `cast`
    get gender U.
    """
    dialogues: list[Dialogue] = []

    def flush(speakers: list[str], run: list[tuple[str, ScriptLine]]) -> None:
        if len(speakers) != 2:
            return
        text = " ".join(line.utterance for _, line in run)
        m, f = refdet(text)
        dialogues.append(Dialogue(
            g1=cast.get(speakers[0], "U"), g2=cast.get(speakers[1], "U"),
            m=m, f=f,
            participant_ids=(speakers[0], speakers[1]),
            source_ids=tuple(ref for ref, _ in run),
            origin="movie", ordered=True))

    for si, scene in enumerate(doc.scenes):
        speakers: list[str] = []
        run: list[tuple[str, ScriptLine]] = []
        for li, line in enumerate(scene.lines):
            spk = line.character_cue
            if spk not in speakers and len(speakers) >= 2:
                flush(speakers, run)
                speakers, run = [], []
            if spk not in speakers:
                speakers.append(spk)
            run.append((f"{si}:{li}", line))
        flush(speakers, run)
    return DialogueSet(dialogues, label=doc.title)


def classic_bechdel(ds: DialogueSet, cast: Mapping[str, str],
                    speaking_only: bool = False) -> int:
    """Classic 0-3 test: b is the highest k with rules 1..k all passing.

    Rule 1 needs two female characters, rule 2 a female-female dialogue,
    rule 3 a female-female dialogue without male references.  By default
    every cast entry counts toward rule 1; with ``speaking_only`` only
    characters appearing in a dialogue do.
    """
    if speaking_only:
        cues = {c for d in ds for c in d.participant_ids}
        females = [c for c in cues if cast.get(c, "U") == "F"]
    else:
        females = [c for c, g in cast.items() if g == "F"]
    rule1 = len(females) >= 2
    rule2 = any(d.g1 == "F" and d.g2 == "F" for d in ds)
    rule3 = any(d.g1 == "F" and d.g2 == "F" and d.m == 0 for d in ds)
    b = 0
    for passed in (rule1, rule2, rule3):
        if not passed:
            break
        b += 1
    return b


def read_cast(path) -> dict[str, dict[str, str]]:
    """Cast CSV (movie_id, character_cue, gender) -> per-movie cue maps."""
    from .ingest import CorpusError

    cast: dict[str, dict[str, str]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("movie_id", "character_cue", "gender")
                   if c not in (reader.fieldnames or [])]
        if missing:
            raise CorpusError(f"{path}: missing column(s) {missing}")
        for row in reader:
            g = row["gender"].strip().upper()
            if g not in ("M", "F", "U"):
                raise CorpusError(f"{path}: cast gender must be M/F/U, got {g!r}")
            cast.setdefault(row["movie_id"], {})[normalize_cue(row["character_cue"])] = g
    return cast
