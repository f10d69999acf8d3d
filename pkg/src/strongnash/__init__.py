"""Strong Nash equilibria of normal-form games: exact verification and search."""

from .estimator import StrongNashSolver, check_game, check_profile
from .game import Game, GameFormatError, Profile, ShapeError, parse_game, parse_profile
from .generator import GenSpec, fixture, generate
from .oracle import Cut, OracleQuery, ValueBox, find_ne
from .pareto import verify_strong_pareto, verify_weak_pareto
from .search import SearchConfig, SearchStatus, find_sne, init2_candidates, init_states
from .verify import check_ne, enumerate_nes, verify_sne

__version__ = "0.1.0"

__all__ = [
    "Game", "Profile", "GameFormatError", "ShapeError", "parse_game", "parse_profile",
    "check_ne", "enumerate_nes", "verify_sne", "verify_weak_pareto", "verify_strong_pareto",
    "ValueBox", "Cut", "OracleQuery", "find_ne",
    "SearchConfig", "SearchStatus", "find_sne", "init2_candidates", "init_states",
    "GenSpec", "generate", "fixture", "StrongNashSolver", "check_game", "check_profile",
]
