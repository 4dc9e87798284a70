"""Non-learning baselines: random search, simulated annealing, and the
exhaustive oracle used by the comparison harness and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import MacroPlacementEnv, Trajectory, rollout, uniform_random_policy
from ..errors import BudgetError
from ..grid import Grid, feasibility_mask, place_on_grid
from ..metrics import evaluate
from ..netlist import Placement
from ..placer import place_clusters

ORACLE_MAX_MACROS = 3
ORACLE_MAX_CELLS = 16 * 16


@dataclass
class BaselineResult:
    best_reward: float
    best_actions: list
    best_placement: Placement | None
    rewards: list  # per-evaluation rewards, in evaluation order

    @property
    def evaluations(self) -> int:
        return len(self.rewards)


def _evaluate_cells(env: MacroPlacementEnv, cells: list[int]):
    """Reward for macros at the given grid cells (macro-order aligned)."""
    grid = Grid.empty(env.config.grid_rows, env.config.grid_cols,
                      env.pnet.canvas_width, env.pnet.canvas_height)
    placement = env._base_placement.copy()
    for pid, cell in zip(env.macro_order, cells):
        row, col = divmod(int(cell), env.config.grid_cols)
        grid, (x, y) = place_on_grid(grid, env.pnet.nodes[pid], row, col)
        placement = placement.updated(pid, x, y)
    final, _ = place_clusters(env.clustered, placement, env.config.placer)
    metrics = evaluate(env.pnet, final, env._eval_grid,
                       weights=env.config.weights,
                       capacity_h=env.config.capacity_h,
                       capacity_v=env.config.capacity_v)
    return metrics.reward, final


def baseline_random(env: MacroPlacementEnv, episodes: int,
                    seed: int = 0) -> BaselineResult:
    """Best of N uniform masked rollouts. Episode i draws from a seed
    derived from (seed, i), so prefixes are nested across budgets."""
    best = None
    rewards = []
    for i in range(episodes):
        traj = rollout(env, uniform_random_policy,
                       np.random.SeedSequence([seed, i]))
        rewards.append(traj.reward)
        if best is None or traj.reward > best.reward:
            best = traj
    return BaselineResult(
        best_reward=best.reward,
        best_actions=[s.action for s in best.steps],
        best_placement=best.final_placement,
        rewards=rewards,
    )


def baseline_sim_anneal(env: MacroPlacementEnv, moves: int, seed: int = 0,
                        t0: float = 0.05, alpha: float = 0.97) -> BaselineResult:
    """Relocate one macro at a time under Metropolis acceptance with a
    geometric temperature schedule (t0 = 0 degenerates to greedy)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 991]))
    start = rollout(env, uniform_random_policy, np.random.SeedSequence([seed, 0]))
    if start.dead_end:
        raise BudgetError("could not draw a feasible starting placement")
    cells = [s.action for s in start.steps]
    cost = -start.reward
    rewards = [start.reward]
    best_cells, best_cost, best_placement = list(cells), cost, start.final_placement

    rows, cols = env.config.grid_rows, env.config.grid_cols
    for move in range(moves):
        k = int(rng.integers(len(cells)))
        # rebuild occupancy without macro k
        grid = Grid.empty(rows, cols, env.pnet.canvas_width, env.pnet.canvas_height)
        for j, cell in enumerate(cells):
            if j == k:
                continue
            r, c = divmod(cell, cols)
            grid, _ = place_on_grid(grid, env.pnet.nodes[env.macro_order[j]], r, c)
        mask = feasibility_mask(grid, env.pnet.nodes[env.macro_order[k]])
        choices = np.flatnonzero(mask.flat())
        if len(choices) == 0:
            continue
        proposal = list(cells)
        proposal[k] = int(rng.choice(choices))
        reward, placement = _evaluate_cells(env, proposal)
        rewards.append(reward)
        new_cost = -reward
        t = t0 * alpha**move
        accept = new_cost < cost or (
            t > 0 and rng.random() < np.exp(-(new_cost - cost) / t)
        )
        if accept:
            cells, cost = proposal, new_cost
            if new_cost < best_cost:
                best_cells, best_cost, best_placement = list(cells), new_cost, placement
    return BaselineResult(best_reward=-best_cost, best_actions=best_cells,
                          best_placement=best_placement, rewards=rewards)


def oracle_exhaustive(env: MacroPlacementEnv) -> BaselineResult:
    """Exact best reward over every masked action sequence.

    Guarded: refuses designs beyond 3 macros or 16x16 grids, quoting the
    sequence count it would have to evaluate.
    """
    cells_total = env.num_cells
    if env.num_macros > ORACLE_MAX_MACROS or cells_total > ORACLE_MAX_CELLS:
        raise BudgetError(
            f"exhaustive oracle refused: up to {cells_total ** env.num_macros} "
            f"sequences ({env.num_macros} macros on {cells_total} cells); "
            f"limits are {ORACLE_MAX_MACROS} macros and {ORACLE_MAX_CELLS} cells"
        )
    rewards = []
    best = {"reward": -np.inf, "actions": None, "placement": None}

    def recurse(state, actions):
        obs = env.observation(state)
        for action in np.flatnonzero(obs.mask.flat()):
            transition, nxt = env.step(state, int(action))
            seq = actions + [int(action)]
            if transition.done:
                rewards.append(transition.reward)
                if transition.reward > best["reward"]:
                    best.update(reward=transition.reward, actions=seq,
                                placement=transition.final_placement)
            else:
                recurse(nxt, seq)

    state, _obs = env.reset()
    recurse(state, [])
    return BaselineResult(best_reward=best["reward"], best_actions=best["actions"],
                          best_placement=best["placement"], rewards=rewards)
