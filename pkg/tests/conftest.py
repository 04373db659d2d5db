import pytest

from proofkeep.compiler import compile_constraints, parse_constraints
from proofkeep.engine import Budget, build_proof
from proofkeep.program import parse_database, parse_program
from proofkeep.prooftree import construct
from proofkeep.subst import EMPTY
from proofkeep.terms import Literal

# the running example: a file-access policy database
ACCESS_DB = """
access(E, F) :- owner(E, F).
access(E, F) :- manager(E, E2), owner(E2, F).
access(E, F) :- classification(F, C1), clearance(E, C2), C1 <= C2.
employee(hans).
employee(peter).
owner(hans, menu).
manager(peter, hans).
clearance(hans, 1).
clearance(peter, 2).
"""

ACCESS_CONSTRAINT = "forall E:employee access(E, menu).\n"

# the normal program driving the composition/splitting examples
COMPOSE_DB = """
p(X) :- t(X), not s(X).
r(X, Y) :- u(Y), not v(X).
q(X, Y) :- t(Y), u(X).
t(X) :- u(X).
t(a).
u(b).
s(b).
"""


@pytest.fixture(scope="session")
def access_db():
    return parse_database(ACCESS_DB)


@pytest.fixture(scope="session")
def access_setup(access_db):
    """(extended db, compiled constraint) for the running example."""
    extended, compiled = compile_constraints(
        access_db, parse_constraints(ACCESS_CONSTRAINT)
    )
    return extended, compiled[0]


@pytest.fixture(scope="session")
def access_proof(access_setup):
    extended, cc = access_setup
    return build_proof(extended, (Literal(cc.entry, True),), EMPTY, Budget())


@pytest.fixture()
def access_tree(access_setup, access_proof):
    extended, _ = access_setup
    return construct(access_proof, extended)


@pytest.fixture(scope="session")
def compose_db():
    return parse_program(COMPOSE_DB)
