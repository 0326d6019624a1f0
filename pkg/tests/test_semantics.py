import pytest

from interocept.errors import EmptyText, MissingAnchor
from interocept.grid_map import CellCoord, build_grid
from interocept.semantics import (
    AttributeClass,
    AttributeKind,
    EncodeParams,
    EpisodicArchive,
    Triple,
    classify_attribute,
    encode_to_hypergraph,
    extract_triples,
)
from interocept.task_hypergraph import (
    INFINITE,
    OccupancyFlag,
    TaskHypergraph,
    TaskPrecondition,
)


def test_declarative_sentence():
    triples = extract_triples("the ramp near dock A is slippery")
    assert len(triples) == 1
    t = triples[0]
    assert t.subject == "ramp near dock a"
    assert t.relation == "is"
    assert t.object == "slippery"
    assert t.raw_text == "the ramp near dock A is slippery"


def test_imperative_sentence():
    triples = extract_triples("deliver panels before facade installation")
    assert triples == [
        Triple("deliver", "before", "facade installation",
               "deliver panels before facade installation")
    ]


def test_no_verb_yields_nothing():
    assert extract_triples("hello") == []


def test_multiple_sentences_split():
    text = "the ramp is wet. deliver panels before facade installation; hello"
    triples = extract_triples(text)
    assert len(triples) == 2
    assert triples[0].subject == "ramp"
    assert triples[1].relation == "before"


def test_empty_text_rejected():
    with pytest.raises(EmptyText):
        extract_triples("")
    with pytest.raises(EmptyText):
        extract_triples("   ")


def test_overlong_text_rejected():
    with pytest.raises(ValueError):
        extract_triples("the ramp is wet " * 100)


def test_verb_with_particle():
    triples = extract_triples("the crane backs off the pathway")
    assert triples == []  # "backs" is not in the verb lexicon
    triples = extract_triples("the loader is off the pathway")
    assert triples[0].relation == "is off"
    assert triples[0].object == "pathway"


def test_tick_is_attached():
    triples = extract_triples("the ramp is wet", tick=42)
    assert triples[0].tick == 42


def test_extraction_is_deterministic():
    text = "the ramp near dock A is slippery. deliver panels before facade installation"
    assert extract_triples(text) == extract_triples(text)


def triple(subject, relation, obj):
    return Triple(subject, relation, obj, f"{subject} {relation} {obj}")


def test_classify_terrain():
    attr = classify_attribute(triple("ramp near dock a", "is", "slippery"))
    assert attr.kind is AttributeKind.TERRAIN_FEATURE
    assert attr.confidence_keywords == ("ramp", "slippery")


def test_classify_sequence():
    attr = classify_attribute(triple("deliver", "before", "facade installation"))
    assert attr.kind is AttributeKind.TASK_SEQUENCE
    assert attr.confidence_keywords == ("deliver", "before")


def test_classify_episodic_fallback():
    attr = classify_attribute(triple("sky", "is", "blue"))
    assert attr.kind is AttributeKind.EPISODIC
    assert attr.confidence_keywords == ()


def test_terrain_wins_double_match():
    attr = classify_attribute(triple("mud", "is", "before the dock"))
    assert attr.kind is AttributeKind.TERRAIN_FEATURE


def test_empty_lexicon_rejected():
    with pytest.raises(ValueError):
        classify_attribute(triple("sky", "is", "blue"), terrain_lexicon=frozenset())


def test_encode_terrain_edge():
    hg = TaskHypergraph()
    t = triple("ramp", "is", "slippery")
    attr = classify_attribute(t)
    eid = encode_to_hypergraph(hg, attr, t, [CellCoord(3, 1), CellCoord(3, 2)], EncodeParams())
    edge = hg.edges[eid]
    assert len(edge.members) == 2
    assert edge.attribute.label == "ramp"
    assert edge.attribute.multiplier == 2.0


def test_encode_respects_keyword_multipliers():
    hg = TaskHypergraph()
    t = triple("ramp", "is", "slippery")
    params = EncodeParams(keyword_multipliers={"ramp": 3.5})
    eid = encode_to_hypergraph(hg, classify_attribute(t), t, [CellCoord(0, 0)], params)
    assert hg.edges[eid].attribute.multiplier == 3.5


def test_encode_sequence_edge():
    hg = TaskHypergraph()
    t = triple("deliver", "before", "facade installation")
    eid = encode_to_hypergraph(hg, classify_attribute(t), t, [CellCoord(2, 1)], EncodeParams())
    attr = hg.edges[eid].attribute
    assert attr == TaskPrecondition(None, OccupancyFlag.CLEAR, INFINITE)


def test_encode_episodic_archives_without_graph_change():
    hg = TaskHypergraph()
    params = EncodeParams()
    t = triple("sky", "is", "blue")
    before = dict(hg.edges)
    result = encode_to_hypergraph(hg, classify_attribute(t), t, [], params)
    assert result is None
    assert hg.edges == before
    assert len(params.archive) == 1
    assert params.archive.records[0]["raw_text"] == t.raw_text


def test_encode_requires_anchors_for_declarative():
    hg = TaskHypergraph()
    t = triple("ramp", "is", "slippery")
    with pytest.raises(MissingAnchor):
        encode_to_hypergraph(hg, classify_attribute(t), t, [], EncodeParams())


def test_encode_only_grows_the_graph():
    hg = TaskHypergraph()
    t1 = triple("ramp", "is", "slippery")
    e1 = encode_to_hypergraph(hg, classify_attribute(t1), t1, [CellCoord(0, 0)], EncodeParams())
    snapshot = hg.edges[e1]
    t2 = triple("deliver", "before", "staging")
    encode_to_hypergraph(hg, classify_attribute(t2), t2, [CellCoord(1, 1)], EncodeParams())
    assert hg.edges[e1] is snapshot
    assert len(hg.edges) == 2


def test_encoded_terrain_raises_move_cost():
    grid = build_grid(5, 5, 1.0)
    hg = TaskHypergraph()
    target = CellCoord(2, 2)
    before = hg.effective_move_cost(grid, target, 1.0)
    t = triple("ramp", "is", "slippery")
    encode_to_hypergraph(hg, classify_attribute(t), t, [target], EncodeParams())
    after = hg.effective_move_cost(grid, target, 1.0)
    assert after > before
    assert after == pytest.approx(2.0, rel=1e-12)


def test_archive_jsonl_round_trip(tmp_path):
    import json

    path = tmp_path / "episodes.jsonl"
    archive = EpisodicArchive(str(path))
    t = Triple("sky", "is", "blue", "the sky is very blue", tick=7)
    archive.append(t)
    archive.append(t)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    record = json.loads(lines[0])
    assert record["raw_text"] == "the sky is very blue"
    assert record["tick"] == 7
    assert record["triple"]["subject"] == "sky"
