import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from topicevo.synthetic import write_fixture  # noqa: E402


@pytest.fixture(scope="session")
def fixture_inputs(tmp_path_factory):
    """Three-snapshot planted-topic corpus, embeddings and 5-gram shards (60 docs)."""
    root = tmp_path_factory.mktemp("fixture")
    return write_fixture(root, n_snapshots=3, docs_per_snapshot=20, seed=7)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
