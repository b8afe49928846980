import io

import pytest
from hypothesis import given, strategies as st

from vpg.tokens import (MoreCloseThanOpen, TokenFormatError, TokenRecord, html_optional_endtags,
                        parse_tokens, read_tokens, write_tokens)


def test_parse_with_lexemes_and_comments():
    toks = parse_tokens(["# header\n", "STRING\t\"a\\tb\"\n", "\n", "NUMBER\n"])
    assert toks == [TokenRecord("STRING", "\"a\tb\""), TokenRecord("NUMBER")]


def test_bad_escape():
    with pytest.raises(TokenFormatError):
        parse_tokens(["X\tbad\\q"])


@given(st.lists(st.tuples(st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True),
                          st.one_of(st.none(), st.text(max_size=8)))))
def test_write_read_round_trip(tmp_path_factory, pairs):
    recs = [TokenRecord(n, lx) for n, lx in pairs]
    p = tmp_path_factory.mktemp("tok") / "t.tok"
    with open(p, "w", encoding="utf-8") as fp:
        write_tokens(fp, recs)
    with open(p, encoding="utf-8") as fp:
        assert read_tokens(fp) == recs


def test_html_heuristic():
    assert html_optional_endtags(["TagOpen", "TagOpen", "TagOpen", "TagClose", "TagClose"]) == \
        ["TagOpen", "TagOpen", "TagPlain", "TagClose", "TagClose"]
    balanced = ["TagOpen", "HTML_TEXT", "TagClose"]
    assert html_optional_endtags(balanced) == balanced
    with pytest.raises(MoreCloseThanOpen):
        html_optional_endtags(["TagClose"])
    recs = html_optional_endtags([TokenRecord("TagOpen", "<br>")])
    assert recs == [TokenRecord("TagPlain", "<br>")]
