"""Attack-aware control and active sensing synthesis.

Builds the game between a defender who chooses control actions and sensor
queries and an attacker who jams sensors, and solves for belief-based
randomized strategies that reach the goal with probability one.
"""

__version__ = "0.1.0"

from .arena import Arena, build_arena  # noqa: E402
from .model import GameSpec, load_spec, read_spec  # noqa: E402
from .solve import Mode, Solution, asw, solve_pipeline  # noqa: E402
from .strategy import StrategyTable, extract  # noqa: E402

__all__ = [
    "Arena", "GameSpec", "Mode", "Solution", "StrategyTable",
    "asw", "build_arena", "extract", "load_spec", "read_spec", "solve_pipeline",
]
