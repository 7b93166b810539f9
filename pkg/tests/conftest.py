"""Shared test helpers and the acceptance-criteria summary printer."""

from pathlib import Path

from tricorpus.corpus import ParallelUnit, Sentence

DATA_DIR = Path(__file__).parent / "data"

# (criterion name, passed) tuples recorded by test_acceptance.py.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


def make_unit(uid, texts, source="bible", origin=None, verse_ref=None):
    """Parallel unit with derived member ids, for concise test setup."""
    members = {
        lang: Sentence(
            id=f"{uid}.{lang}", text=text, lang=lang,
            source=source, verse_ref=verse_ref,
        )
        for lang, text in texts.items()
    }
    return ParallelUnit(id=uid, members=members, source=source, origin=origin)
