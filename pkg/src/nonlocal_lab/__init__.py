"""Non-local games: classical, quantum and non-signaling values, and the
protocol reductions that connect them to communication complexity."""

from .boxes import Box, box_value, is_nonsignaling, pr_box
from .classical import (
    DeterministicStrategy,
    StrategyMixture,
    classical_value_best_response,
    classical_value_exact,
    evaluate_deterministic,
    evaluate_mixture,
)
from .games import Game, builtin, chsh, hidden_matching, load_game, magic_square, nonlocal_dj, parallel_repeat
from .nonsignaling import nonsignaling_value
from .protocols import ClassicalProtocol, QuantumProtocol, ZeroCommProtocol, run_protocol
from .quantum import (
    QuantumStrategy,
    chsh_optimal_strategy,
    correlation_table,
    mermin_peres_strategy,
    strategy_parallel_repeat,
    winning_probability,
)
from .seesaw import seesaw_lower_bound
from .simplex import LinearProgram, simplex_solve

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ClassicalProtocol",
    "DeterministicStrategy",
    "Game",
    "LinearProgram",
    "QuantumProtocol",
    "QuantumStrategy",
    "StrategyMixture",
    "ZeroCommProtocol",
    "box_value",
    "builtin",
    "chsh",
    "chsh_optimal_strategy",
    "classical_value_best_response",
    "classical_value_exact",
    "correlation_table",
    "evaluate_deterministic",
    "evaluate_mixture",
    "hidden_matching",
    "is_nonsignaling",
    "load_game",
    "magic_square",
    "mermin_peres_strategy",
    "nonlocal_dj",
    "nonsignaling_value",
    "parallel_repeat",
    "pr_box",
    "run_protocol",
    "seesaw_lower_bound",
    "simplex_solve",
    "strategy_parallel_repeat",
    "winning_probability",
]
