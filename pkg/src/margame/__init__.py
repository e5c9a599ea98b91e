"""Zero-sum Markov game engine for CVSS-scored cloud attack graphs.

Pipeline: parse an attack graph, derive the finite game along its shortest
attack path, quantify payoffs from CVSS impact/exploitability, build the
joint transition model, solve by maxmin value iteration, and simulate
seeded attacker-versus-defender play.
"""

__version__ = "0.1.0"

from .errors import ModelError, SolverError
from .graph import (
    AttackGraph,
    AttackPath,
    PathObjective,
    Vulnerability,
    best_path_by_exploitability,
    cloud10,
    cloud10_path,
    enumerate_attack_paths,
    export_dot,
    load_graph,
    parse_graph,
    path_from_distance_oracle,
    shortest_attack_path,
)
from .game import (
    NO_ATTACK,
    NO_DEFENSE,
    AttackerAction,
    DefenderAction,
    GameState,
    MarkovGame,
    PayoffMatrix,
    build_markov_game,
    build_payoff,
    derive_states,
    game_to_json,
    payoff_csv,
)
from .dynamics import (
    ChainModel,
    Policy,
    PolicyVector,
    TransitionModel,
    attack_access_probability,
    attacker_choice_probabilities,
    attacker_transition_factor,
    build_transition_model,
    chain_probabilities,
    choice_policy,
    defender_transition_factor,
    joint_transition,
    transition_factor_policy,
)
from .solver import (
    MatrixGameSolution,
    QTable,
    ShapleyResult,
    ValueVector,
    greedy_attacker_policy,
    shapley_value_iteration,
    solve_matrix_game,
    urs_policy,
)
from .simulator import (
    EpisodeTrace,
    SimulationReport,
    StepRecord,
    compare_strategies,
    run_batch,
    run_episode,
)

__all__ = [name for name in dir() if not name.startswith("_")]
