import pytest

from prefdyn.formula import formula
from prefdyn.model import RuleSet
from prefdyn.prop import PropState, build_assignment_lattice

PENGUIN_ATOMS = ["bird", "penguin", "canfly"]
GAMMA_TEXT = ["[p bird]+u canfly", "[p bird]+u ~penguin", "[p penguin]+u ~canfly",
              "[penguin]+u bird"]


def penguin_restriction(s: PropState) -> bool:
    return s.get("penguin") is not True or s.get("bird") is True


def make_penguin():
    return build_assignment_lattice(
        PENGUIN_ATOMS, penguin_restriction,
        {1: {"bird": {"bird": True, "penguin": False, "canfly": True},
             "penguin": {"penguin": True, "canfly": False}}},
        fallback="indefeasible")


@pytest.fixture(scope="session")
def penguin():
    return make_penguin()


@pytest.fixture(scope="session")
def gamma():
    return RuleSet("Gamma", [formula(t) for t in GAMMA_TEXT])
