import pytest

from nspm.datasets import bundled_path
from nspm.kb_catalog import build_catalog, parse_ntriples
from nspm.template_engine import parse_templates


@pytest.fixture(scope="session")
def movie_triples():
    with open(bundled_path("movies.nt"), encoding="utf-8") as fh:
        return parse_ntriples(fh)


@pytest.fixture(scope="session")
def movie_catalog(movie_triples):
    return build_catalog(movie_triples)


@pytest.fixture(scope="session")
def movie_templates():
    with open(bundled_path("templates.tsv"), encoding="utf-8") as fh:
        return parse_templates(fh.read())


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
