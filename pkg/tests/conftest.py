import pytest

from explainseg.backends import MockBackend
from explainseg.corpus import Level, load_question, load_question_bank

from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
QUESTIONS_DIR = REPO_ROOT / "questions"
DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def bank():
    return load_question_bank(QUESTIONS_DIR)


@pytest.fixture(scope="session")
def sum_positives(bank):
    return bank["A-Q4"]


@pytest.fixture(scope="session")
def multi_example(sum_positives):
    """The authored multistructural exemplar (six groups, one per line)."""
    return next(
        ex for ex in sum_positives.few_shot if ex.intended_level == Level.MULTISTRUCTURAL
    )


@pytest.fixture(scope="session")
def relational_example(sum_positives):
    """The authored relational exemplar (one group spanning the function)."""
    return next(
        ex for ex in sum_positives.few_shot if ex.intended_level == Level.RELATIONAL
    )


@pytest.fixture()
def mock_backend(bank):
    return MockBackend.from_bank(bank)
