import pytest

from vpg import corpus, dump
from vpg.grammar import TaggedCfg
from vpg.parser import run_parser
from vpg.recognizer import run_recognizer
from vpg.translate import translate
from vpg.generators import json_tokens


def built(name):
    g = corpus.load(name)
    if isinstance(g, TaggedCfg):
        tr = translate(g)
        return dump.build(tr.vpg, tr.actions)
    return dump.build(g)


@pytest.mark.parametrize("name", corpus.NAMES)
def test_dump_round_trip(name):
    b = built(name)
    text = dump.dumps(b)
    b2 = dump.loads(text)
    assert dump.dumps(b2) == text
    assert b2.rpda.states == b.rpda.states and b2.ppda.states == b.ppda.states
    assert b2.actions == b.actions


def test_loaded_pda_runs_the_same():
    b = built("json")
    b2 = dump.loads(dump.dumps(b))
    for seed in range(5):
        w = json_tokens(200, seed)
        assert run_recognizer(b2.rpda, b2.g, w).accepted
        assert run_parser(b2.ppda, w).ids == run_parser(b.ppda, w).ids


def test_bad_dumps():
    with pytest.raises(dump.DumpFormatError):
        dump.loads("something else\n")
    text = dump.dumps(built("g2"))
    with pytest.raises(dump.DumpFormatError):
        dump.loads(text.replace("\nR 1 ", "\nR 7 "))
