"""Randomized defense of interdependent assets.

Cascading losses under independent cascades, plus a leader-follower game
solved by one LP per candidate attacked target.
"""
from .cascade import (
    ConfigurationSet,
    ExpectedLossVector,
    UtilityMatrices,
    build_utility_matrices,
    estimate_component_losses,
    expected_losses,
    tree_expected_losses,
)
from .game import (
    DefensePolicy,
    GamePriors,
    InfeasibleGameError,
    SolveResult,
    SolverError,
    evaluate_policy,
    solve_fixed_target_lp,
    solve_multiple_lp,
)
from .graph_model import (
    CascadeModel,
    DependencyGraph,
    EdgeListError,
    apply_edge_noise,
    assign_worths,
    generate_erdos_renyi,
    generate_preferential_attachment,
    load_edge_list,
    save_edge_list,
)
from .scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict

__version__ = "0.1.0"
