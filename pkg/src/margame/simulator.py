"""Seeded Monte-Carlo play of the Markov game.

Reproducibility contract: episode ``seed`` feeds a numpy Philox
counter-based generator via ``SeedSequence(seed)``; the episode pre-draws a
``(max_steps, 3)`` table of uniforms whose columns drive, per step, the
attacker's action draw, the defender's action draw, and the exploit-success
Bernoulli.  Identical ``(configuration, seed)`` therefore gives bitwise
identical traces on any platform, and batch aggregation is independent of
execution order.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dynamics import Policy, PolicyVector, TransitionModel, build_transition_model, validate_policy
from .errors import ModelError
from .game import AttackerAction, DefenderAction, MarkovGame

__all__ = [
    "StepRecord",
    "EpisodeTrace",
    "SimulationReport",
    "run_episode",
    "run_batch",
    "compare_strategies",
    "report_json",
    "report_csv",
    "trace_jsonl",
]

_MAX_SEED = 2**64


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One simulated step; ``success`` means the state actually advanced."""

    state: int
    attacker_action: AttackerAction
    defender_action: DefenderAction
    success: bool
    attacker_reward: float
    next_state: int


@dataclass(frozen=True, slots=True)
class EpisodeTrace:
    """Full record of one episode, reproducible from its seed."""

    seed: int
    steps: tuple[StepRecord, ...]
    discounted_attacker_return: float
    reached_target: bool
    length: int

    @property
    def discounted_defender_return(self) -> float:
        return -self.discounted_attacker_return


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """Aggregates over a batch of seeded episodes."""

    episode_count: int
    mean_discounted_attacker_return: float
    stderr_discounted_attacker_return: float
    mean_discounted_defender_return: float
    target_reach_rate: float
    mean_episode_length: float
    empirical_chain: tuple[tuple[float, ...], ...]
    transition_counts: tuple[tuple[int, ...], ...]
    config: dict


class _StepTables:
    """Flattened per-state lookup tables for the inner simulation loop."""

    __slots__ = (
        "attacker_cum",
        "defender_cum",
        "rewards",
        "advance",
        "attacker_actions",
        "defender_actions",
        "terminal_index",
        "discount",
    )

    def __init__(
        self,
        game: MarkovGame,
        transitions: TransitionModel,
        attacker_policy: Sequence[PolicyVector],
        defender_policy: Sequence[PolicyVector],
    ):
        validate_policy(game, attacker_policy, "attacker")
        validate_policy(game, defender_policy, "defender")
        self.attacker_cum = []
        self.defender_cum = []
        self.rewards = []
        self.advance = []
        self.attacker_actions = []
        self.defender_actions = []
        for state in game.nonterminal:
            q = state.index
            self.attacker_cum.append(_cumulative(attacker_policy[q].probabilities))
            self.defender_cum.append(_cumulative(defender_policy[q].probabilities))
            self.rewards.append(
                tuple(tuple(row) for row in game.payoffs[q].attacker_reward)
            )
            self.advance.append(
                tuple(tuple(float(p) for p in row) for row in transitions.advance[q])
            )
            self.attacker_actions.append(state.attacker_actions)
            self.defender_actions.append(state.defender_actions)
        self.terminal_index = len(game.states) - 1
        self.discount = game.discount


def _cumulative(probs: Sequence[float]) -> tuple[float, ...]:
    total = 0.0
    out = []
    for p in probs:
        total += p
        out.append(total)
    out[-1] = 1.0 + 1e-15  # guard the last bin against rounding
    return tuple(out)


def _pick(cum: tuple[float, ...], u: float) -> int:
    for idx, edge in enumerate(cum):
        if u < edge:
            return idx
    return len(cum) - 1


def _episode_uniforms(seed: int, max_steps: int) -> np.ndarray:
    if not 0 <= seed < _MAX_SEED:
        raise ModelError(f"seed must be an unsigned 64-bit integer: {seed}")
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    return gen.random((max_steps, 3))


def _simulate(
    tables: _StepTables,
    seed: int,
    max_steps: int,
    record: bool,
) -> tuple[float, int, bool, list[tuple[int, int]], list[StepRecord] | None]:
    """Play one episode; returns (return, length, reached, transitions, steps)."""
    uniforms = _episode_uniforms(seed, max_steps)
    q = 0
    discounted = 0.0
    factor = 1.0
    lam = tables.discount
    moves: list[tuple[int, int]] = []
    steps: list[StepRecord] | None = [] if record else None
    terminal = tables.terminal_index

    for t in range(max_steps):
        if q == terminal:
            break
        i = _pick(tables.attacker_cum[q], uniforms[t, 0])
        j = _pick(tables.defender_cum[q], uniforms[t, 1])
        reward = tables.rewards[q][i][j]
        advance_p = tables.advance[q][i][j]
        if advance_p > 0.0 and uniforms[t, 2] < advance_p:
            nxt = q + 1
        else:
            nxt = q
        discounted += factor * reward
        factor *= lam
        moves.append((q, nxt))
        if steps is not None:
            steps.append(
                StepRecord(
                    state=q,
                    attacker_action=tables.attacker_actions[q][i],
                    defender_action=tables.defender_actions[q][j],
                    success=nxt == q + 1,
                    attacker_reward=reward,
                    next_state=nxt,
                )
            )
        q = nxt

    return discounted, len(moves), q == terminal, moves, steps


def run_episode(
    game: MarkovGame,
    transitions: TransitionModel | None = None,
    attacker_policy: Sequence[PolicyVector] | None = None,
    defender_policy: Sequence[PolicyVector] | None = None,
    seed: int = 0,
    max_steps: int = 200,
) -> EpisodeTrace:
    """Play one fully seeded episode and return its trace.

    Defaults: joint transitions derived from the game, the
    exploitability-proportional attacker, and the uniform defender.
    """
    tables, attacker_policy, defender_policy = _prepare(
        game, transitions, attacker_policy, defender_policy, max_steps
    )
    discounted, length, reached, _moves, steps = _simulate(
        tables, seed, max_steps, record=True
    )
    return EpisodeTrace(
        seed=seed,
        steps=tuple(steps or ()),
        discounted_attacker_return=discounted,
        reached_target=reached,
        length=length,
    )


def _prepare(
    game: MarkovGame,
    transitions: TransitionModel | None,
    attacker_policy: Sequence[PolicyVector] | None,
    defender_policy: Sequence[PolicyVector] | None,
    max_steps: int,
):
    from .dynamics import choice_policy
    from .solver import urs_policy

    if max_steps < 1:
        raise ModelError(f"max_steps must be >= 1: {max_steps}")
    if transitions is None:
        transitions = build_transition_model(game)
    if attacker_policy is None:
        attacker_policy = choice_policy(game)
    if defender_policy is None:
        defender_policy = urs_policy(game, "defender")
    tables = _StepTables(game, transitions, attacker_policy, defender_policy)
    return tables, attacker_policy, defender_policy


def run_batch(
    game: MarkovGame,
    transitions: TransitionModel | None = None,
    attacker_policy: Sequence[PolicyVector] | None = None,
    defender_policy: Sequence[PolicyVector] | None = None,
    episodes: int = 1000,
    base_seed: int = 0,
    max_steps: int = 200,
    threads: int = 1,
) -> SimulationReport:
    """Run ``episodes`` seeded episodes (seeds ``base_seed .. base_seed+n-1``).

    Aggregation is order-independent: per-episode statistics land in an
    array indexed by episode before pairwise-summed reduction, so any
    ``threads`` setting yields the identical report.
    """
    if episodes < 1:
        raise ModelError(f"episodes must be >= 1: {episodes}")
    tables, attacker_policy, defender_policy = _prepare(
        game, transitions, attacker_policy, defender_policy, max_steps
    )
    n_states = tables.terminal_index + 1

    returns = np.empty(episodes)
    lengths = np.empty(episodes, dtype=np.int64)
    reached = np.empty(episodes, dtype=bool)
    counts = np.zeros((n_states, n_states), dtype=np.int64)

    def play_range(lo: int, hi: int) -> np.ndarray:
        local_counts = np.zeros_like(counts)
        for idx in range(lo, hi):
            discounted, length, hit, moves, _ = _simulate(
                tables, base_seed + idx, max_steps, record=False
            )
            returns[idx] = discounted
            lengths[idx] = length
            reached[idx] = hit
            for src, dst in moves:
                local_counts[src, dst] += 1
        return local_counts

    threads = max(1, int(threads))
    if threads == 1:
        counts += play_range(0, episodes)
    else:
        bounds = np.linspace(0, episodes, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(play_range, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for future in futures:
                counts += future.result()

    mean_return = float(np.sum(returns) / episodes)
    if episodes > 1:
        stderr = float(np.std(returns, ddof=1) / np.sqrt(episodes))
    else:
        stderr = 0.0

    chain_rows: list[tuple[float, ...]] = []
    for q in range(n_states):
        total = counts[q].sum()
        if total == 0:
            chain_rows.append((0.0,) * n_states)
        else:
            chain_rows.append(tuple(counts[q] / total))

    config = {
        "episodes": episodes,
        "base_seed": base_seed,
        "max_steps": max_steps,
        "discount": game.discount,
        "defense_cost": game.payoffs[0].defense_cost,
        "attacker_policy": [list(v.probabilities) for v in attacker_policy],
        "defender_policy": [list(v.probabilities) for v in defender_policy],
    }
    return SimulationReport(
        episode_count=episodes,
        mean_discounted_attacker_return=mean_return,
        stderr_discounted_attacker_return=stderr,
        mean_discounted_defender_return=-mean_return,
        target_reach_rate=float(np.sum(reached) / episodes),
        mean_episode_length=float(np.sum(lengths) / episodes),
        empirical_chain=tuple(chain_rows),
        transition_counts=tuple(tuple(int(c) for c in row) for row in counts),
        config=config,
    )


def compare_strategies(
    game: MarkovGame,
    transitions: TransitionModel | None,
    defender_policies: Mapping[str, Policy],
    attacker_policy: Sequence[PolicyVector],
    episodes: int,
    base_seed: int = 0,
    max_steps: int = 200,
    threads: int = 1,
) -> list[tuple[str, SimulationReport]]:
    """One batch per named defender policy, same attacker and seeds.

    Rows come back sorted by mean attacker return, best defense first.
    """
    if len(defender_policies) < 2:
        raise ModelError("compare_strategies needs at least two named defender policies")
    rows = [
        (
            name,
            run_batch(
                game,
                transitions,
                attacker_policy,
                policy,
                episodes=episodes,
                base_seed=base_seed,
                max_steps=max_steps,
                threads=threads,
            ),
        )
        for name, policy in defender_policies.items()
    ]
    rows.sort(key=lambda row: (row[1].mean_discounted_attacker_return, row[0]))
    return rows


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def report_json(report: SimulationReport) -> str:
    doc = {
        "episodes": report.episode_count,
        "mean_discounted_attacker_return": report.mean_discounted_attacker_return,
        "stderr_discounted_attacker_return": report.stderr_discounted_attacker_return,
        "mean_discounted_defender_return": report.mean_discounted_defender_return,
        "target_reach_rate": report.target_reach_rate,
        "mean_episode_length": report.mean_episode_length,
        "empirical_chain": [list(row) for row in report.empirical_chain],
        "config": report.config,
    }
    return json.dumps(doc, indent=2) + "\n"


def report_csv(report: SimulationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    writer.writerow(["episodes", report.episode_count])
    writer.writerow(["mean_attacker_return", f"{report.mean_discounted_attacker_return:.6f}"])
    writer.writerow(["stderr_attacker_return", f"{report.stderr_discounted_attacker_return:.6f}"])
    writer.writerow(["mean_defender_return", f"{report.mean_discounted_defender_return:.6f}"])
    writer.writerow(["target_reach_rate", f"{report.target_reach_rate:.6f}"])
    writer.writerow(["mean_episode_length", f"{report.mean_episode_length:.6f}"])
    for q, row in enumerate(report.empirical_chain):
        for nxt, p in enumerate(row):
            if p > 0:
                writer.writerow([f"chain_s{q}_s{nxt}", f"{p:.6f}"])
    return buf.getvalue()


def trace_jsonl(trace: EpisodeTrace) -> str:
    """Line-delimited step dump for external analysis."""
    lines = []
    for step in trace.steps:
        lines.append(
            json.dumps(
                {
                    "state": step.state,
                    "attacker_action": step.attacker_action.label,
                    "defender_action": step.defender_action.label,
                    "success": step.success,
                    "attacker_reward": step.attacker_reward,
                    "next_state": step.next_state,
                }
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
