from pathlib import Path

import pytest

from ottrkit import parse_library

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture
def pizza_library():
    return parse_library(fixture_text("pizza.stottr"))


@pytest.fixture
def axiom_library():
    return parse_library(fixture_text("axioms.stottr"))


@pytest.fixture
def materials_library():
    return parse_library(fixture_text("materials.stottr"))


@pytest.fixture
def redundancy_library():
    return parse_library(fixture_text("redundancy.stottr"))
