import json
from pathlib import Path

import pytest

from shiftbench.generator import default_lexicon
from shiftbench.treebank import read_treebank_file

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def mini_treebank():
    return read_treebank_file(FIXTURES / "mini_treebank.mrg")


@pytest.fixture(scope="session")
def syllable_oracle():
    data = json.loads((FIXTURES / "syllable_oracle.json").read_text("utf-8"))
    return [(entry["word"], entry["syllables"]) for entry in data["words"]]


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture
def replay_fixture_path():
    return FIXTURES / "replay_fixture.jsonl"
