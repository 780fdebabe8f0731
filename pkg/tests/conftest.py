from pathlib import Path

import pytest

from shapxp import (
    ExplanationProblem,
    SimilarityConfig,
    load_model,
    make_instance,
)

FIXTURES = Path(__file__).resolve().parent.parent / "docs" / "fixtures"


@pytest.fixture(scope="session")
def cls3_model():
    return load_model(FIXTURES / "cls3.json")


@pytest.fixture(scope="session")
def cls3_tree_model():
    return load_model(FIXTURES / "cls3_tree.json")


@pytest.fixture(scope="session")
def reg2_model():
    return load_model(FIXTURES / "reg2.json")


@pytest.fixture(scope="session")
def reg2_tree_model():
    return load_model(FIXTURES / "reg2_tree.json")


@pytest.fixture(scope="session")
def pw2_model():
    return load_model(FIXTURES / "pw2.json")


@pytest.fixture(scope="session")
def cls3_problem(cls3_model):
    return ExplanationProblem(cls3_model, make_instance(cls3_model, (1, 1, 2)),
                              SimilarityConfig.class_equality())


@pytest.fixture(scope="session")
def reg2_problem(reg2_model):
    return ExplanationProblem(reg2_model, make_instance(reg2_model, (1, 1)),
                              SimilarityConfig.class_equality())


@pytest.fixture(scope="session")
def pw2_problem(pw2_model):
    from fractions import Fraction
    return ExplanationProblem(pw2_model, make_instance(pw2_model, (1, 1)),
                              SimilarityConfig.threshold(Fraction(1, 5)))
