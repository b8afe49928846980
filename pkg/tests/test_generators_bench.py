import csv
import io

from vpg import corpus, dump
from vpg.bench import FIELDS, doubling_ratios, max_stack_depth, run_bench, write_csv
from vpg.edges import CALL, PLAIN, RET
from vpg.generators import json_tokens, nested_tokens, xml_tokens
from vpg.plotting import plot_bench
from vpg.recognizer import recognize
from vpg.translate import translate


def test_generators_stay_in_language():
    gj = translate(corpus.load("json")).vpg
    gx = translate(corpus.load("xml")).vpg
    for seed in range(10):
        for n in (3, 30, 500):
            assert recognize(gj, json_tokens(n, seed))
            assert recognize(gx, xml_tokens(n, seed))
    assert json_tokens(100, 3) == json_tokens(100, 3)


def test_generator_sizes():
    for n in (1000, 10_000):
        assert n - 5 <= len(json_tokens(n, 1)) <= n + 5
        assert n - 5 <= len(xml_tokens(n, 1)) <= n + 20


def test_max_stack_depth():
    assert max_stack_depth([CALL, CALL, RET, PLAIN, CALL]) == 2


def test_bench_rows_csv_and_plot(tmp_path):
    tr = translate(corpus.load("json"))
    b = dump.build(tr.vpg, tr.actions)
    rows = run_bench(b, json_tokens, [500, 1000], name="json", repeats=1, warmup=100)
    buf = io.StringIO()
    write_csv(buf, rows)
    buf.seek(0)
    got = list(csv.DictReader(buf))
    assert len(got) == 2 and tuple(got[0]) == FIELDS
    assert len(doubling_ratios(rows)) == 1
    png = tmp_path / "b.png"
    plot_bench(rows, str(png), "json")
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_nested_depth():
    b = dump.build(corpus.load("nested"))
    (row,) = run_bench(b, nested_tokens, [10_000], name="nested", repeats=1, warmup=0)
    assert row["max_stack"] == 10_000
