from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from so6synth import dyadic as dy
from so6synth import lutgen
from so6synth.so6 import NUM_GENERATORS, SignedPerm, SO6Matrix, Word, GenIndex, evaluate_word

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def vectors() -> dict:
    """Values computed by the oracle module and frozen (``so6synth oracle vectors``)."""
    return json.loads((FIXTURES / "oracle_vectors.json").read_text())


@pytest.fixture(scope="session")
def lut5() -> lutgen.Lut:
    return lutgen.generate_lut(SO6Matrix.identity(), 5, threads=1)


@pytest.fixture(scope="session")
def lut8() -> lutgen.Lut:
    return lutgen.generate_lut(SO6Matrix.identity(), 8, threads=lutgen.default_threads())


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


# hypothesis strategies

@st.composite
def reduced_words(draw, max_c: int = 30, bits: int = 12):
    coeff = st.integers(min_value=-(1 << bits), max_value=1 << bits)
    a, b, c = draw(coeff), draw(coeff), draw(st.integers(0, max_c))
    return dy.reduce(a, b, c)


signed_perms = st.builds(
    lambda perm, signs: SignedPerm(tuple(perm), tuple(signs)),
    st.permutations(range(6)),
    st.lists(st.sampled_from((1, -1)), min_size=6, max_size=6),
)


@st.composite
def words(draw, max_len: int = 7, with_correction: bool = False):
    gids = draw(st.lists(st.integers(0, NUM_GENERATORS - 1), max_size=max_len))
    corr = draw(signed_perms) if with_correction else SignedPerm.identity()
    return Word(tuple(GenIndex.from_id(g) for g in gids), corr)


@st.composite
def matrices(draw, max_len: int = 7):
    return evaluate_word(draw(words(max_len, with_correction=True)))


# acceptance report: one line per criterion, printed at the end of the run

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion():
    def report(number: int | str, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
