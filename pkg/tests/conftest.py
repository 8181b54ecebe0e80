import json
from fractions import Fraction

import pytest

from blockreg.blowup import VectorField
from blockreg.cli import fixture_path, load, parse_field

# acceptance outcomes, filled in by test_acceptance and echoed at the end of the run
AC_RESULTS = {}


def field_from_fixture(name, **params):
    doc = load(fixture_path(name))
    return parse_field(doc, {k: str(v) for k, v in params.items()})


def canonical(k1, k2):
    k1, k2 = Fraction(k1), Fraction(k2)
    return VectorField.from_terms({(2, 0): k1, (1, 1): k2, (0, 2): -1},
                                  {(1, 1): k1 + 1, (0, 2): k2})


def perturbed_toy(lam):
    lam = Fraction(lam)
    return VectorField.from_terms({(2, 0): Fraction(-1, 3), (0, 2): -1, (3, 0): lam},
                                  {(1, 1): Fraction(2, 3)})


def resonant_toy(lam):
    lam = Fraction(lam)
    return VectorField.from_terms({(2, 0): Fraction(1, 2), (0, 2): 1, (3, 1): lam},
                                  {(1, 1): Fraction(-1, 2)})


@pytest.fixture
def toy():
    return VectorField.from_terms({(0, 2): 1}, {(2, 0): 1})


@pytest.fixture
def rotated_toy():
    return VectorField.from_terms({(2, 0): 1, (0, 2): 1}, {(1, 1): -2})


def pytest_terminal_summary(terminalreporter):
    if not AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(AC_RESULTS, key=lambda k: int(k[2:])):
        ok, msg = AC_RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {msg}")
