import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosogate import load_demo_corpus, load_demo_grammar


@pytest.fixture(scope="session")
def grammar():
    return load_demo_grammar()


@pytest.fixture(scope="session")
def demo_corpus():
    return load_demo_corpus()
