import pytest

from eigenfree import models as M
from eigenfree import perturbation as P
from eigenfree import range_avoidance as RA

# Acceptance-scale artifacts are expensive; build once per session.

SEGMENT_STAGES = 2055     # consumes covering stages 1..10 completely
SEGMENT_HORIZON = 8192
SQUARE_STAGES = 9
SQUARE_HORIZON = 2_000_000


@pytest.fixture(scope="session")
def segment_model():
    return M.make_model("segment")


@pytest.fixture(scope="session")
def square_model():
    return M.make_model("unit_square")


@pytest.fixture(scope="session")
def segment_bundle(segment_model):
    return P.construct_bundle(segment_model, SEGMENT_STAGES,
                              SEGMENT_HORIZON, delta=1e-3)


@pytest.fixture(scope="session")
def square_plan_u(square_model):
    plan = RA.build_selection(square_model, SQUARE_STAGES, SQUARE_HORIZON)
    return plan, RA.assemble_u(plan)


@pytest.fixture(scope="session")
def small_square_bundle(square_model):
    return P.construct_bundle(square_model, 3, 4096, delta=1e-3)
