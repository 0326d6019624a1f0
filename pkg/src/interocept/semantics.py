"""Rule-based extraction of operator rationale into hypergraph attributes.

Free text becomes (subject, relation, object) triples through closed
lexicons rather than a learned extractor, so identical input always yields
identical structure. Triples classify as terrain features or task-sequence
constraints, both mapped onto hypergraph edges over operator-selected
anchor cells; anything else is preserved verbatim as episodic knowledge.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyText, MissingAnchor
from .task_hypergraph import (
    INFINITE,
    OccupancyFlag,
    TaskHypergraph,
    TaskPrecondition,
    TerrainFeature,
)

# Closed lexicons. Extraction quality is bounded by these lists on purpose:
# a fixed vocabulary keeps the pipeline deterministic and auditable.
VERBS = frozenset({
    "is", "are", "was", "were", "be", "been", "has", "have", "blocks",
    "block", "deliver", "unload", "load", "wait", "clear", "move", "keep",
    "avoid", "stay", "park", "stack", "carry", "go", "needs", "stop",
})
PREPOSITIONS = frozenset({
    "before", "after", "near", "at", "in", "on", "under", "over", "behind",
    "between", "until", "by", "to", "from", "with", "around",
})
PARTICLES = frozenset({"up", "down", "off", "out", "away"})
STOPWORDS = frozenset({
    "the", "a", "an", "this", "that", "these", "those", "it", "its",
    "please", "very",
})

DEFAULT_TERRAIN_LEXICON = frozenset({
    "mud", "gravel", "slope", "ramp", "wet", "slippery", "rough", "soft", "ice",
})
DEFAULT_SEQUENCE_LEXICON = frozenset({
    "before", "after", "wait", "until", "deliver", "unload", "load",
    "clear", "first", "then",
})


@dataclass(frozen=True)
class Triple:
    subject: str
    relation: str
    object: str
    raw_text: str
    tick: int = 0

    def to_json_dict(self) -> dict:
        return {
            "subject": self.subject,
            "relation": self.relation,
            "object": self.object,
            "raw_text": self.raw_text,
            "tick": self.tick,
        }

    def tokens(self) -> list[str]:
        return f"{self.subject} {self.relation} {self.object}".split()


class AttributeKind(Enum):
    TERRAIN_FEATURE = "terrain_feature"
    TASK_SEQUENCE = "task_sequence"
    EPISODIC = "episodic"


@dataclass(frozen=True)
class AttributeClass:
    kind: AttributeKind
    confidence_keywords: tuple[str, ...] = ()


def _tokenize(sentence: str) -> list[str]:
    return re.findall(r"[a-z0-9']+", sentence.lower())


def _strip_stopwords(tokens: list[str]) -> list[str]:
    # Leading only: trailing short words can be names ("dock a").
    start = 0
    while start < len(tokens) and tokens[start] in STOPWORDS:
        start += 1
    return tokens[start:]


def _triple_from_sentence(tokens: list[str], raw: str, tick: int) -> Triple | None:
    if not tokens:
        return None
    if tokens[0] in VERBS:
        # Imperative: the action itself is the subject and the first
        # preposition carries the ordering constraint. Tokens between the
        # two (direct objects like "panels") are deliberately dropped.
        for i, tok in enumerate(tokens[1:], start=1):
            if tok in PREPOSITIONS:
                obj = _strip_stopwords(tokens[i + 1:])
                if obj:
                    return Triple(tokens[0], tok, " ".join(obj), raw, tick)
                return None
        return None
    for i, tok in enumerate(tokens):
        if tok in VERBS:
            subject = _strip_stopwords(tokens[:i])
            relation = [tok]
            rest = tokens[i + 1:]
            if rest and rest[0] in PARTICLES:
                relation.append(rest[0])
                rest = rest[1:]
            obj = _strip_stopwords(rest)
            if subject and obj:
                return Triple(" ".join(subject), " ".join(relation), " ".join(obj), raw, tick)
            return None
    return None


def extract_triples(text: str, tick: int = 0) -> list[Triple]:
    """Split on sentence boundaries and run the lexicon rules on each."""
    if not text or not text.strip():
        raise EmptyText("no rationale text supplied")
    if len(text) > 1000:
        raise ValueError("rationale text capped at 1000 characters")
    triples = []
    for sentence in re.split(r"[.;]", text):
        raw = sentence.strip()
        if not raw:
            continue
        triple = _triple_from_sentence(_tokenize(sentence), raw, tick)
        if triple is not None:
            triples.append(triple)
    return triples


def classify_attribute(
    triple: Triple,
    terrain_lexicon=DEFAULT_TERRAIN_LEXICON,
    sequence_lexicon=DEFAULT_SEQUENCE_LEXICON,
) -> AttributeClass:
    """Terrain beats sequence on a double match; episodic is the fallback."""
    if not terrain_lexicon or not sequence_lexicon:
        raise ValueError("lexicons must be nonempty")
    tokens = triple.tokens()
    terrain_hits = tuple(dict.fromkeys(t for t in tokens if t in terrain_lexicon))
    if terrain_hits:
        return AttributeClass(AttributeKind.TERRAIN_FEATURE, terrain_hits)
    sequence_hits = tuple(dict.fromkeys(t for t in tokens if t in sequence_lexicon))
    if sequence_hits:
        return AttributeClass(AttributeKind.TASK_SEQUENCE, sequence_hits)
    return AttributeClass(AttributeKind.EPISODIC)


class EpisodicArchive:
    """Append-only store for knowledge that maps to no edge."""

    def __init__(self, path: str | None = None):
        self.path = path
        self.records: list[dict] = []

    def append(self, triple: Triple) -> None:
        record = {"tick": triple.tick, "raw_text": triple.raw_text,
                  "triple": triple.to_json_dict()}
        self.records.append(record)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class EncodeParams:
    default_multiplier: float = 2.0
    keyword_multipliers: dict[str, float] = field(default_factory=dict)
    archive: EpisodicArchive = field(default_factory=EpisodicArchive)


def encode_to_hypergraph(
    hg: TaskHypergraph,
    attr: AttributeClass,
    triple: Triple,
    anchor_cells,
    params: EncodeParams,
) -> int | None:
    """Attach classified knowledge to the graph; returns the new edge id.

    Episodic triples go to the archive and return None, leaving the graph
    untouched.
    """
    if attr.kind is AttributeKind.EPISODIC:
        params.archive.append(triple)
        return None
    if not anchor_cells:
        raise MissingAnchor(f"{attr.kind.value} attribute needs anchor cells")
    members = [hg.vertex_for_cell(c) for c in anchor_cells]
    if attr.kind is AttributeKind.TERRAIN_FEATURE:
        keyword = attr.confidence_keywords[0]
        multiplier = params.keyword_multipliers.get(keyword, params.default_multiplier)
        return hg.add_hyperedge(members, TerrainFeature(keyword, multiplier))
    return hg.add_hyperedge(
        members, TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE)
    )
