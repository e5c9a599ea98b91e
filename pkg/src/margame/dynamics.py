"""Probabilistic machinery of the game: per-state attack-access and action
choice probabilities, per-player transition factors, the joint transition
model, and the policy-induced state chain.

The game advances from state ``q`` to ``q+1`` only when the attacker exploits
the shortest-path successor, the exploit succeeds (its exploitability is the
Bernoulli success probability), and the defender is not monitoring that
node's host.  Every other outcome (idle, failed exploit, off-path exploit,
detected exploit) keeps the state; the payoff, not the motion, carries the
consequence.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelError
from .game import AttackerAction, DefenderAction, GameState, MarkovGame
from .graph import AttackGraph, AttackPath

__all__ = [
    "PolicyVector",
    "Policy",
    "TransitionModel",
    "ChainModel",
    "attack_access_probability",
    "attacker_choice_probabilities",
    "attacker_transition_factor",
    "defender_transition_factor",
    "joint_transition",
    "build_transition_model",
    "choice_policy",
    "transition_factor_policy",
    "chain_probabilities",
    "validate_policy",
    "chain_csv",
    "chain_dot",
]

_SUM_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class PolicyVector:
    """Mixed strategy of one player in one state, in action-list order.

    Terminal states carry an empty vector.
    """

    state: int
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.probabilities:
            return
        if any(p < -_SUM_TOL or p > 1 + _SUM_TOL for p in self.probabilities):
            raise ModelError(f"policy probabilities outside [0,1]: {self.probabilities}")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ModelError(
                f"policy probabilities must sum to 1, got {sum(self.probabilities)!r}"
            )


Policy = tuple[PolicyVector, ...]


def attack_access_probability(state: GameState, graph: AttackGraph) -> float:
    """Probability that at least one of the state's exploits would succeed.

    One minus the product of the per-target failure probabilities; the idle
    action is excluded.
    """
    if state.terminal:
        raise ModelError("terminal state has no attack-access probability")
    failure = 1.0
    for action in state.exploit_actions:
        failure *= 1.0 - graph.exploitability(action.node)
    return 1.0 - failure


def attacker_choice_probabilities(state: GameState, graph: AttackGraph) -> PolicyVector:
    """Exploitability-proportional choice distribution over the state's actions.

    Exploit ``z`` gets ``e(z) / sum of exploitabilities``; the idle action
    gets zero mass here (it only enters the chain through the failure mass of
    the transition factors).
    """
    if state.terminal:
        raise ModelError("terminal state has no actions to choose from")
    total = sum(graph.exploitability(a.node) for a in state.exploit_actions)
    if total <= 0.0:
        raise ModelError(f"state s{state.index}: all exploitabilities are zero")
    probs = tuple(
        graph.exploitability(a.node) / total if a.is_exploit else 0.0
        for a in state.attacker_actions
    )
    return PolicyVector(state=state.index, probabilities=probs)


def attacker_transition_factor(
    state: GameState, action: AttackerAction, graph: AttackGraph
) -> float:
    """Attacker-only transition factor of one action.

    For an exploit this is choice probability times success probability; the
    idle action absorbs the complement so the factors over a state's full
    action list sum to one.
    """
    if action not in state.attacker_actions:
        raise ModelError(f"action {action.label} does not belong to state s{state.index}")
    choice = attacker_choice_probabilities(state, graph).probabilities
    if action.is_exploit:
        i = state.attacker_actions.index(action)
        return choice[i] * graph.exploitability(action.node)
    exploited_mass = sum(
        choice[i] * graph.exploitability(a.node)
        for i, a in enumerate(state.attacker_actions)
        if a.is_exploit
    )
    return 1.0 - exploited_mass


def defender_transition_factor(state: GameState) -> float:
    """Uniform defender factor: one over the number of defender actions."""
    if state.terminal:
        raise ModelError("terminal state has no defender actions")
    return 1.0 / len(state.defender_actions)


def joint_transition(
    state: GameState,
    attack: AttackerAction,
    defense: DefenderAction,
    graph: AttackGraph,
    sap: AttackPath,
) -> dict[int, float]:
    """Next-state distribution for one joint action.

    Support is ``{q, q+1}``: exploiting the SAP successor while its host is
    unmonitored advances with the target's exploitability; everything else
    stays put with probability one.
    """
    if state.terminal:
        raise ModelError("terminal state has no transitions")
    if attack not in state.attacker_actions or defense not in state.defender_actions:
        raise ModelError(
            f"invalid action pair ({attack.label}, {defense.label}) for state s{state.index}"
        )
    q = state.index
    successor = sap.nodes[q + 1]
    if (
        attack.is_exploit
        and attack.node == successor
        and defense.host != graph.host_of(successor)
    ):
        e = graph.exploitability(successor)
        if e >= 1.0:
            return {q + 1: 1.0}
        if e <= 0.0:
            return {q: 1.0}
        return {q + 1: e, q: 1.0 - e}
    return {q: 1.0}


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Joint transition tables for every non-terminal state.

    ``advance[q][i, j]`` is the probability that joint action ``(i, j)`` in
    state ``q`` moves the game to ``q+1``; the rest of the mass stays at
    ``q``.
    """

    advance: tuple[np.ndarray, ...]

    def distribution(self, q: int, i: int, j: int) -> dict[int, float]:
        p = float(self.advance[q][i, j])
        if p >= 1.0:
            return {q + 1: 1.0}
        if p <= 0.0:
            return {q: 1.0}
        return {q + 1: p, q: 1.0 - p}


def build_transition_model(game: MarkovGame) -> TransitionModel:
    """Tabulate :func:`joint_transition` over all states and action pairs."""
    tables: list[np.ndarray] = []
    for state in game.nonterminal:
        table = np.zeros((len(state.attacker_actions), len(state.defender_actions)))
        for i, attack in enumerate(state.attacker_actions):
            for j, defense in enumerate(state.defender_actions):
                dist = joint_transition(state, attack, defense, game.graph, game.sap)
                table[i, j] = dist.get(state.index + 1, 0.0)
        tables.append(table)
    return TransitionModel(advance=tuple(tables))


def choice_policy(game: MarkovGame) -> Policy:
    """Default attacker policy: per-state exploitability-proportional choice."""
    vectors = []
    for state in game.states:
        if state.terminal:
            vectors.append(PolicyVector(state=state.index, probabilities=()))
        else:
            vectors.append(attacker_choice_probabilities(state, game.graph))
    return tuple(vectors)


def transition_factor_policy(game: MarkovGame) -> Policy:
    """Attacker policy whose action mass equals the transition factors.

    Unlike :func:`choice_policy` this assigns the residual (no successful
    exploit) mass to the idle action, so it is a proper behavioural policy
    that already folds in exploit success.
    """
    vectors = []
    for state in game.states:
        if state.terminal:
            vectors.append(PolicyVector(state=state.index, probabilities=()))
            continue
        probs = tuple(
            attacker_transition_factor(state, a, game.graph)
            for a in state.attacker_actions
        )
        vectors.append(PolicyVector(state=state.index, probabilities=probs))
    return tuple(vectors)


def validate_policy(game: MarkovGame, policy: Sequence[PolicyVector], player: str) -> None:
    """Raise unless ``policy`` has one correctly-sized vector per state."""
    if len(policy) != len(game.states):
        raise ModelError(
            f"policy dimension mismatch: {len(policy)} vectors for {len(game.states)} states"
        )
    for state, vector in zip(game.states, policy):
        expected = (
            0
            if state.terminal
            else len(state.attacker_actions)
            if player == "attacker"
            else len(state.defender_actions)
        )
        if len(vector.probabilities) != expected:
            raise ModelError(
                f"policy dimension mismatch at state s{state.index}: "
                f"{len(vector.probabilities)} probabilities for {expected} actions"
            )


@dataclass(frozen=True, eq=False)
class ChainModel:
    """State-to-state chain induced by a policy pair.

    ``advance[q]`` is the probability of moving from ``q`` to ``q+1`` in one
    step; the complement is the self-loop.  The terminal state is absorbing.
    """

    state_count: int
    advance: tuple[float, ...]

    def row(self, q: int) -> dict[int, float]:
        if q == self.state_count - 1:
            return {q: 1.0}
        p = self.advance[q]
        return {q + 1: p, q: 1.0 - p} if p > 0 else {q: 1.0}

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.state_count, self.state_count))
        for q in range(self.state_count):
            for nxt, p in self.row(q).items():
                m[q, nxt] = p
        return m


def chain_probabilities(
    game: MarkovGame,
    attacker_policy: Sequence[PolicyVector] | None = None,
    defender_policy: Sequence[PolicyVector] | None = None,
) -> ChainModel:
    """Marginalize the joint transition model under a policy pair.

    Defaults: the attacker plays the exploitability-proportional choice
    distribution and the defender plays uniformly over its actions, which
    reproduces the state chain with per-state advance probability
    ``transition factor of the on-path exploit x share of defender actions
    not covering its host``.
    """
    from .solver import urs_policy  # local import to avoid a module cycle

    if attacker_policy is None:
        attacker_policy = choice_policy(game)
    if defender_policy is None:
        defender_policy = urs_policy(game, "defender")
    validate_policy(game, attacker_policy, "attacker")
    validate_policy(game, defender_policy, "defender")

    model = build_transition_model(game)
    advance: list[float] = []
    for state in game.nonterminal:
        q = state.index
        pa = np.asarray(attacker_policy[q].probabilities)
        pd = np.asarray(defender_policy[q].probabilities)
        advance.append(float(pa @ model.advance[q] @ pd))
    return ChainModel(state_count=len(game.states), advance=tuple(advance))


def chain_csv(chain: ChainModel) -> str:
    """CSV rows (from_state, to_state, probability) for the induced chain."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from_state", "to_state", "probability"])
    for q in range(chain.state_count):
        for nxt in sorted(chain.row(q)):
            writer.writerow([f"s{q}", f"s{nxt}", f"{chain.row(q)[nxt]:.6f}"])
    return buf.getvalue()


def chain_dot(chain: ChainModel) -> str:
    """DOT rendering of the chain (states left to right, labelled edges)."""
    lines = ["digraph markov_chain {", "  rankdir=LR;"]
    for q in range(chain.state_count):
        shape = "doublecircle" if q == chain.state_count - 1 else "circle"
        lines.append(f'  "s{q}" [shape={shape}];')
    for q in range(chain.state_count):
        for nxt in sorted(chain.row(q)):
            p = chain.row(q)[nxt]
            lines.append(f'  "s{q}" -> "s{nxt}" [label="{p:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
