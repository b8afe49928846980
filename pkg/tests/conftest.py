import pytest

# criterion number -> (passed, detail); filled in by test_acceptance.py
CRITERIA: dict = {}


def record(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def tok_file(tmp_path):
    """Write token names (or (name, lexeme) pairs) to a token file."""
    from vpg.tokens import TokenRecord, write_tokens

    def make(toks, name="in.tok"):
        p = tmp_path / name
        recs = [TokenRecord(*t) if isinstance(t, tuple) else t for t in toks]
        with open(p, "w", encoding="utf-8") as fp:
            write_tokens(fp, recs)
        return str(p)
    return make
