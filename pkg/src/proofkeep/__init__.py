"""proofkeep: a deductive database engine that compiles first-order
integrity constraints to normal programs, proves them by SLDNF resolution,
and incrementally re-validates them under transactions by maintaining
substitution-annotated proof trees."""

from .engine import Budget, answers, build_proof, build_tree, coverage
from .maintenance import Verdict, detect, oracle_recheck, pflege, ueberpruefe_baum, vereinige
from .program import Database, Transaction, apply_transaction, check_legality, parse_database
from .prooftree import ProofNode, construct, root_answer, validate
from .compiler import compile_constraints, parse_constraints, translate

__all__ = [
    "Budget",
    "Database",
    "ProofNode",
    "Transaction",
    "Verdict",
    "answers",
    "apply_transaction",
    "build_proof",
    "build_tree",
    "check_legality",
    "compile_constraints",
    "construct",
    "coverage",
    "detect",
    "oracle_recheck",
    "parse_constraints",
    "parse_database",
    "pflege",
    "root_answer",
    "translate",
    "ueberpruefe_baum",
    "validate",
    "vereinige",
]
