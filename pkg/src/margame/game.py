"""Markov game derivation: states along the shortest attack path and
CVSS-quantified zero-sum payoff matrices.

State ``q`` means the attacker's foothold is the ``q``-th node of the
shortest attack path.  In each non-terminal state the attacker either idles
or exploits one of the foothold's graph successors; the defender either
idles or places an IDS on the host of one of those candidate targets.
"""

from __future__ import annotations

import io
import csv
import json
from dataclasses import dataclass

from .errors import ModelError
from .graph import AttackGraph, AttackPath, shortest_attack_path

__all__ = [
    "AttackerAction",
    "DefenderAction",
    "NO_ATTACK",
    "NO_DEFENSE",
    "GameState",
    "PayoffMatrix",
    "MarkovGame",
    "derive_states",
    "build_payoff",
    "build_markov_game",
    "payoff_csv",
    "game_to_json",
]


@dataclass(frozen=True, slots=True)
class AttackerAction:
    """Either idle (``node is None``) or exploit a specific adjacent node."""

    node: str | None

    @property
    def is_exploit(self) -> bool:
        return self.node is not None

    @property
    def label(self) -> str:
        return f"E({self.node})" if self.node is not None else "no-att"


@dataclass(frozen=True, slots=True)
class DefenderAction:
    """Either idle (``host is None``) or place the IDS on a host."""

    host: str | None

    @property
    def is_defense(self) -> bool:
        return self.host is not None

    @property
    def label(self) -> str:
        return f"Def-{self.host}" if self.host is not None else "no-act"


NO_ATTACK = AttackerAction(node=None)
NO_DEFENSE = DefenderAction(host=None)


@dataclass(frozen=True, slots=True)
class GameState:
    """One state of the finite game; terminal states have no actions."""

    index: int
    current_node: str
    attacker_actions: tuple[AttackerAction, ...]
    defender_actions: tuple[DefenderAction, ...]
    terminal: bool

    def __post_init__(self) -> None:
        if self.terminal:
            if self.attacker_actions or self.defender_actions:
                raise ModelError("terminal states must have empty action lists")
        else:
            if not self.attacker_actions or self.attacker_actions[0] != NO_ATTACK:
                raise ModelError("attacker action list must start with no-att")
            if not self.defender_actions or self.defender_actions[0] != NO_DEFENSE:
                raise ModelError("defender action list must start with no-act")

    @property
    def exploit_actions(self) -> tuple[AttackerAction, ...]:
        return tuple(a for a in self.attacker_actions if a.is_exploit)


@dataclass(frozen=True, slots=True)
class PayoffMatrix:
    """Zero-sum stage payoffs, indexed [attacker action][defender action].

    Entries are the attacker's reward in CVSS units; the defender's reward is
    the element-wise negation.
    """

    state: GameState
    attacker_reward: tuple[tuple[float, ...], ...]
    defense_cost: float

    def defender_reward(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(-x for x in row) for row in self.attacker_reward)

    def entry(self, attacker: AttackerAction, defender: DefenderAction) -> float:
        i = self.state.attacker_actions.index(attacker)
        j = self.state.defender_actions.index(defender)
        return self.attacker_reward[i][j]


@dataclass(frozen=True, slots=True)
class MarkovGame:
    """Finite zero-sum Markov game built from a graph and its shortest path."""

    states: tuple[GameState, ...]
    payoffs: tuple[PayoffMatrix, ...]
    graph: AttackGraph
    sap: AttackPath
    discount: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.discount < 1.0:
            raise ModelError(f"discount out of range [0,1): {self.discount}")
        if len(self.states) != self.sap.hop_count + 1:
            raise ModelError("state count must equal SAP hop count + 1")
        if not self.states[-1].terminal:
            raise ModelError("last state must be terminal")
        if len(self.payoffs) != len(self.states) - 1:
            raise ModelError("need one payoff matrix per non-terminal state")

    @property
    def nonterminal(self) -> tuple[GameState, ...]:
        return self.states[:-1]

    def successor_node(self, state: GameState) -> str:
        """The SAP node the game advances to from ``state``."""
        if state.terminal:
            raise ModelError("terminal state has no successor")
        return self.sap.nodes[state.index + 1]


def derive_states(graph: AttackGraph, sap: AttackPath) -> list[GameState]:
    """One state per SAP node; the last is terminal and actionless.

    Attacker actions: no-att, then one exploit per graph successor of the
    current foothold (id order).  Defender actions: no-act, then one IDS
    placement per distinct host of those targets (host-id order).
    """
    sap.validate(graph)
    states: list[GameState] = []
    last = len(sap.nodes) - 1
    for q, node in enumerate(sap.nodes):
        if q == last:
            states.append(
                GameState(
                    index=q,
                    current_node=node,
                    attacker_actions=(),
                    defender_actions=(),
                    terminal=True,
                )
            )
            continue
        targets = graph.successors(node)
        hosts = sorted({graph.host_of(t) for t in targets})
        states.append(
            GameState(
                index=q,
                current_node=node,
                attacker_actions=(NO_ATTACK,)
                + tuple(AttackerAction(node=t) for t in targets),
                defender_actions=(NO_DEFENSE,)
                + tuple(DefenderAction(host=h) for h in hosts),
                terminal=False,
            )
        )
    return states


def build_payoff(state: GameState, graph: AttackGraph, c_def: float) -> PayoffMatrix:
    """Quantify the stage game of ``state``.

    Five cases drive the attacker's reward: both idle -> 0; idle versus a
    placed IDS -> +c_def (the defender pays for nothing); exploit versus no
    defense -> the target's impact; exploit versus an IDS on the wrong
    host -> impact + c_def; exploit versus an IDS on the target's host ->
    -(impact - c_def), the detection penalty.
    """
    if state.terminal:
        raise ModelError("terminal state has no payoff matrix")
    if c_def < 0:
        raise ModelError(f"defense cost must be non-negative: {c_def}")

    rows: list[tuple[float, ...]] = []
    for attack in state.attacker_actions:
        row: list[float] = []
        for defense in state.defender_actions:
            if not attack.is_exploit:
                row.append(c_def if defense.is_defense else 0.0)
                continue
            impact = graph.impact(attack.node)
            if not defense.is_defense:
                row.append(impact)
            elif defense.host == graph.host_of(attack.node):
                row.append(-(impact - c_def))
            else:
                row.append(impact + c_def)
        rows.append(tuple(row))
    return PayoffMatrix(state=state, attacker_reward=tuple(rows), defense_cost=c_def)


def build_markov_game(
    graph: AttackGraph, c_def: float = 2.0, discount: float = 0.9
) -> MarkovGame:
    """Full game over the shortest attack path of ``graph``."""
    if not 0.0 <= discount < 1.0:
        raise ModelError(f"discount out of range [0,1): {discount}")
    if c_def < 0:
        raise ModelError(f"defense cost must be non-negative: {c_def}")
    sap = shortest_attack_path(graph)
    states = derive_states(graph, sap)
    payoffs = tuple(build_payoff(s, graph, c_def) for s in states[:-1])
    return MarkovGame(
        states=tuple(states),
        payoffs=payoffs,
        graph=graph,
        sap=sap,
        discount=discount,
    )


def payoff_csv(game: MarkovGame) -> str:
    """CSV export: one block per non-terminal state.

    Each block is a header row of defender actions followed by one row per
    attacker action holding the attacker's rewards (the defender's are the
    negation).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for payoff in game.payoffs:
        state = payoff.state
        writer.writerow(
            [f"s{state.index}"] + [d.label for d in state.defender_actions]
        )
        for action, row in zip(state.attacker_actions, payoff.attacker_reward):
            writer.writerow([action.label] + [f"{x:g}" for x in row])
    return buf.getvalue()


def game_to_json(game: MarkovGame) -> str:
    """Structured-text export of the full game for downstream tooling."""
    doc = {
        "discount": game.discount,
        "defense_cost": game.payoffs[0].defense_cost if game.payoffs else None,
        "shortest_attack_path": list(game.sap.nodes),
        "states": [
            {
                "index": s.index,
                "current_node": s.current_node,
                "terminal": s.terminal,
                "attacker_actions": [a.label for a in s.attacker_actions],
                "defender_actions": [d.label for d in s.defender_actions],
            }
            for s in game.states
        ],
        "payoffs": [
            {
                "state": p.state.index,
                "attacker_reward": [list(row) for row in p.attacker_reward],
            }
            for p in game.payoffs
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
