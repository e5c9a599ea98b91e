"""Zero-sum matrix-game solving and Shapley-style value iteration.

Single-state games are solved exactly: two linear programs (one per player)
give the game value and a strong-duality check, after which the returned
mixed strategies are canonicalized to the smallest feasible support (size
first, then lexicographic, then maximal weight on the lowest-index action)
and re-derived from the square support subsystem at machine precision.
Constant matrices short-circuit to uniform strategies.

The Markov game is solved by iterating the per-state matrix-game value with
discounted continuation, holding terminal states at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .dynamics import (
    Policy,
    PolicyVector,
    TransitionModel,
    build_transition_model,
    validate_policy,
)
from .errors import ModelError, SolverError
from .game import MarkovGame, PayoffMatrix

__all__ = [
    "MatrixGameSolution",
    "QTable",
    "ValueVector",
    "ShapleyResult",
    "solve_matrix_game",
    "shapley_value_iteration",
    "greedy_attacker_policy",
    "urs_policy",
    "solve_report_json",
    "solve_report_csv",
]


@dataclass(frozen=True, slots=True)
class MatrixGameSolution:
    """Value and optimal mixed strategies of one zero-sum matrix game."""

    value: float
    attacker_strategy: PolicyVector
    defender_strategy: PolicyVector
    duality_gap: float = 0.0


@dataclass(frozen=True, eq=False)
class QTable:
    """Per-state discounted action-pair values; terminal states are absent."""

    tables: tuple[np.ndarray, ...]

    def __getitem__(self, q: int) -> np.ndarray:
        return self.tables[q]


@dataclass(frozen=True, slots=True)
class ValueVector:
    """Converged state values with iteration diagnostics."""

    values: tuple[float, ...]
    iterations: int
    residual: float

    def __getitem__(self, q: int) -> float:
        return self.values[q]


@dataclass(frozen=True, eq=False)
class ShapleyResult:
    """Outcome of value iteration: values, Q tables, per-state solutions."""

    values: ValueVector
    q: QTable
    solutions: tuple[MatrixGameSolution, ...]
    residuals: tuple[float, ...]

    def attacker_policy(self) -> Policy:
        return self._policy(lambda s: s.attacker_strategy)

    def defender_policy(self) -> Policy:
        return self._policy(lambda s: s.defender_strategy)

    def _policy(self, pick) -> Policy:
        vectors = [pick(sol) for sol in self.solutions]
        terminal_index = len(vectors)
        vectors.append(PolicyVector(state=terminal_index, probabilities=()))
        return tuple(vectors)


# ---------------------------------------------------------------------------
# matrix games
# ---------------------------------------------------------------------------

_FEAS_TOL = 1e-7
_EXACT_TOL = 1e-12


def _as_matrix(matrix) -> tuple[np.ndarray, int]:
    if isinstance(matrix, PayoffMatrix):
        return np.asarray(matrix.attacker_reward, dtype=float), matrix.state.index
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ModelError("matrix game needs a non-empty 2-D matrix")
    return arr, 0


def _lp_row_value(a: np.ndarray) -> float:
    """Maximin value via LP: max v s.t. x'A >= v, x on the simplex."""
    m, n = a.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-a.T, np.ones((n, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(n),
        A_eq=np.concatenate([np.ones(m), [0.0]]).reshape(1, -1),
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise SolverError(f"row-player LP failed: {res.message}")
    return float(res.x[-1])


def _lp_col_value(a: np.ndarray) -> float:
    """Minimax value via LP: min w s.t. Ay <= w, y on the simplex."""
    m, n = a.shape
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.hstack([a, -np.ones((m, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(m),
        A_eq=np.concatenate([np.ones(n), [0.0]]).reshape(1, -1),
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise SolverError(f"column-player LP failed: {res.message}")
    return float(res.x[-1])


def _support_feasible_row(
    a: np.ndarray, support: tuple[int, ...], value: float, tol: float
) -> np.ndarray | None:
    """Mixed row strategy on ``support`` guaranteeing ``value - tol``, or None.

    Among feasible strategies the weight on the lowest support index is
    maximized for reproducibility.
    """
    n = a.shape[1]
    k = len(support)
    sub = a[list(support), :]
    c = np.zeros(k)
    c[0] = -1.0
    res = linprog(
        c,
        A_ub=-sub.T,
        b_ub=np.full(n, -(value - tol)),
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=[(0, None)] * k,
        method="highs",
    )
    if not res.success:
        return None
    x = np.zeros(a.shape[0])
    x[list(support)] = res.x
    return x


def _support_feasible_col(
    a: np.ndarray, support: tuple[int, ...], value: float, tol: float
) -> np.ndarray | None:
    m = a.shape[0]
    k = len(support)
    sub = a[:, list(support)]
    c = np.zeros(k)
    c[0] = -1.0
    res = linprog(
        c,
        A_ub=sub,
        b_ub=np.full(m, value + tol),
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=[(0, None)] * k,
        method="highs",
    )
    if not res.success:
        return None
    y = np.zeros(a.shape[1])
    y[list(support)] = res.x
    return y


def _supports(count: int) -> Iterable[tuple[int, ...]]:
    for size in range(1, count + 1):
        yield from combinations(range(count), size)


def _refine_on_supports(
    a: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]
) -> tuple[float, np.ndarray, np.ndarray] | None:
    """Exact equilibrium from a square support pair, or None if it fails.

    Solves the bordered linear systems ``A[rows,cols]' x = v, sum x = 1`` and
    its column analogue, then verifies feasibility and optimality against the
    full matrix to machine precision.
    """
    if len(rows) != len(cols):
        return None
    k = len(rows)
    sub = a[np.ix_(rows, cols)]
    scale = max(1.0, float(np.max(np.abs(a))))
    tol = _EXACT_TOL * scale

    bordered_x = np.zeros((k + 1, k + 1))
    bordered_x[:k, :k] = sub.T
    bordered_x[:k, k] = -1.0
    bordered_x[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol_x = np.linalg.solve(bordered_x, rhs)
    except np.linalg.LinAlgError:
        return None

    bordered_y = np.zeros((k + 1, k + 1))
    bordered_y[:k, :k] = sub
    bordered_y[:k, k] = -1.0
    bordered_y[k, :k] = 1.0
    try:
        sol_y = np.linalg.solve(bordered_y, rhs)
    except np.linalg.LinAlgError:
        return None

    v_x, v_y = float(sol_x[k]), float(sol_y[k])
    if abs(v_x - v_y) > 10 * tol:
        return None
    x = np.zeros(a.shape[0])
    x[list(rows)] = sol_x[:k]
    y = np.zeros(a.shape[1])
    y[list(cols)] = sol_y[:k]
    if x.min() < -10 * tol or y.min() < -10 * tol:
        return None
    value = 0.5 * (v_x + v_y)
    if (x @ a).min() < value - 10 * tol:
        return None
    if (a @ y).max() > value + 10 * tol:
        return None
    x = np.clip(x, 0.0, None)
    y = np.clip(y, 0.0, None)
    return value, x / x.sum(), y / y.sum()


def _solve_core(
    a: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, tuple[int, ...], tuple[int, ...], float]:
    """Full deterministic solve: (value, x, y, row support, col support, gap)."""
    if not np.isfinite(a).all():
        raise ModelError("matrix game entries must be finite")
    m, n = a.shape

    if np.ptp(a) == 0.0:  # constant game: every strategy optimal, pick uniform
        value = float(a[0, 0])
        return (
            value,
            np.full(m, 1.0 / m),
            np.full(n, 1.0 / n),
            tuple(range(m)),
            tuple(range(n)),
            0.0,
        )

    row_mins = a.min(axis=1)
    col_maxs = a.max(axis=0)
    maximin = float(row_mins.max())
    minimax = float(col_maxs.min())
    if maximin == minimax:  # pure saddle point, first-index tie-break
        i = int(np.argmax(row_mins))
        j = int(np.argmin(col_maxs))
        x = np.zeros(m)
        x[i] = 1.0
        y = np.zeros(n)
        y[j] = 1.0
        return maximin, x, y, (i,), (j,), 0.0

    v_row = _lp_row_value(a)
    v_col = _lp_col_value(a)
    gap = abs(v_row - v_col)
    value = 0.5 * (v_row + v_col)
    scale = max(1.0, float(np.max(np.abs(a))))
    tol = _FEAS_TOL * scale

    x = row_support = None
    for support in _supports(m):
        candidate = _support_feasible_row(a, support, value, tol)
        if candidate is not None:
            x, row_support = candidate, support
            break
    y = col_support = None
    for support in _supports(n):
        candidate = _support_feasible_col(a, support, value, tol)
        if candidate is not None:
            y, col_support = candidate, support
            break
    if x is None or y is None:  # pragma: no cover - LP value is always attainable
        raise SolverError("no feasible optimal support found")

    refined = _refine_on_supports(a, row_support, col_support)
    if refined is not None:
        value, x, y = refined
    return value, x, y, row_support, col_support, gap


def solve_matrix_game(matrix) -> MatrixGameSolution:
    """Maxmin solution of a zero-sum matrix game (row player maximizes).

    Accepts a :class:`~margame.game.PayoffMatrix` or any 2-D array-like of
    attacker rewards.  Output is deterministic: ties between optimal
    strategies break toward the smallest support, lexicographic order, then
    maximal weight on the lowest-index action.
    """
    a, state_index = _as_matrix(matrix)
    value, x, y, _, _, gap = _solve_core(a)
    return MatrixGameSolution(
        value=value,
        attacker_strategy=PolicyVector(state=state_index, probabilities=tuple(x)),
        defender_strategy=PolicyVector(state=state_index, probabilities=tuple(y)),
        duality_gap=gap,
    )


def _verified_support_value(
    a: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]
) -> float | None:
    """Game value from a known-good support pair, or None if it no longer fits."""
    refined = _refine_on_supports(a, rows, cols)
    if refined is None:
        return None
    return refined[0]


# ---------------------------------------------------------------------------
# value iteration
# ---------------------------------------------------------------------------


def shapley_value_iteration(
    game: MarkovGame,
    transitions: TransitionModel | None = None,
    tolerance: float = 1e-8,
    max_iter: int = 10_000,
) -> ShapleyResult:
    """Solve the Markov game by per-state matrix-game value iteration.

    Each sweep replaces ``V(q)`` with the value of the stage game whose
    entries are the stage reward plus the discounted expectation of ``V``
    over the joint transition; terminal values stay at zero.  Stops when the
    sup-norm change drops below ``tolerance``.

    Support pairs found in earlier sweeps are retried first: while they keep
    verifying as optimal, the stage value comes from the exact subsystem
    solve and no LP runs.
    """
    if tolerance <= 0:
        raise ModelError(f"tolerance must be positive: {tolerance}")
    if max_iter < 1:
        raise ModelError(f"max_iter must be >= 1: {max_iter}")
    if transitions is None:
        transitions = build_transition_model(game)

    lam = game.discount
    rewards = [np.asarray(p.attacker_reward, dtype=float) for p in game.payoffs]
    n_states = len(game.states)
    n_stage = len(rewards)
    values = np.zeros(n_states)
    hints: list[tuple[tuple[int, ...], tuple[int, ...]] | None] = [None] * n_stage
    residuals: list[float] = []
    converged = False
    iterations = 0

    def stage_matrix(q: int, v: np.ndarray) -> np.ndarray:
        adv = transitions.advance[q]
        return rewards[q] + lam * (adv * v[q + 1] + (1.0 - adv) * v[q])

    for _ in range(max_iter):
        iterations += 1
        new_values = values.copy()
        for q in range(n_stage):
            stage = stage_matrix(q, values)
            value = None
            if hints[q] is not None:
                value = _verified_support_value(stage, *hints[q])
            if value is None:
                value, _x, _y, rows, cols, _gap = _solve_core(stage)
                hints[q] = (rows, cols)
            new_values[q] = value
        residual = float(np.max(np.abs(new_values - values)))
        residuals.append(residual)
        values = new_values
        if residual < tolerance:
            converged = True
            break

    if not converged:
        raise SolverError(
            f"value iteration did not converge in {max_iter} iterations "
            f"(residual {residuals[-1]:.3e})",
            residual=residuals[-1],
        )

    q_tables = tuple(stage_matrix(q, values) for q in range(n_stage))
    solutions = tuple(
        MatrixGameSolution(
            value=sol.value,
            attacker_strategy=PolicyVector(state=q, probabilities=sol.attacker_strategy.probabilities),
            defender_strategy=PolicyVector(state=q, probabilities=sol.defender_strategy.probabilities),
            duality_gap=sol.duality_gap,
        )
        for q, sol in ((q, solve_matrix_game(q_tables[q])) for q in range(n_stage))
    )
    return ShapleyResult(
        values=ValueVector(
            values=tuple(float(v) for v in values),
            iterations=iterations,
            residual=residuals[-1],
        ),
        q=QTable(tables=q_tables),
        solutions=solutions,
        residuals=tuple(residuals),
    )


def urs_policy(game: MarkovGame, player: str) -> Policy:
    """Uniform random strategy: equal mass on every action, per state."""
    if player not in ("attacker", "defender"):
        raise ModelError(f"player must be 'attacker' or 'defender': {player!r}")
    vectors = []
    for state in game.states:
        actions = (
            state.attacker_actions if player == "attacker" else state.defender_actions
        )
        if state.terminal:
            vectors.append(PolicyVector(state=state.index, probabilities=()))
        else:
            k = len(actions)
            vectors.append(
                PolicyVector(state=state.index, probabilities=(1.0 / k,) * k)
            )
    return tuple(vectors)


def greedy_attacker_policy(
    q: QTable, defender_policy: Sequence[PolicyVector]
) -> Policy:
    """Pure attacker policy: argmax of defender-weighted Q per state.

    Ties break toward the earlier action in the state's action order.
    """
    vectors: list[PolicyVector] = []
    for state_index, vector in enumerate(defender_policy):
        if not vector.probabilities:
            vectors.append(PolicyVector(state=state_index, probabilities=()))
            continue
        if state_index >= len(q.tables):
            raise ModelError("policy dimension mismatch: no Q table for state")
        table = q.tables[state_index]
        weights = np.asarray(vector.probabilities)
        if table.shape[1] != weights.shape[0]:
            raise ModelError(
                f"policy dimension mismatch at state s{state_index}: "
                f"{weights.shape[0]} probabilities for {table.shape[1]} actions"
            )
        scores = table @ weights
        best = int(np.argmax(scores))
        probs = [0.0] * table.shape[0]
        probs[best] = 1.0
        vectors.append(PolicyVector(state=state_index, probabilities=tuple(probs)))
    return tuple(vectors)


def maxmin_defender_policy(game: MarkovGame, result: ShapleyResult) -> Policy:
    """Defender policy from the converged per-state solutions."""
    policy = result.defender_policy()
    validate_policy(game, policy, "defender")
    return policy


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def solve_report_json(game: MarkovGame, result: ShapleyResult) -> str:
    import json

    doc = {
        "iterations": result.values.iterations,
        "residual": result.values.residual,
        "states": [
            {
                "state": s.index,
                "value": result.values[s.index],
                "attacker_strategy": (
                    dict(
                        zip(
                            (a.label for a in s.attacker_actions),
                            result.solutions[s.index].attacker_strategy.probabilities,
                        )
                    )
                    if not s.terminal
                    else {}
                ),
                "defender_strategy": (
                    dict(
                        zip(
                            (d.label for d in s.defender_actions),
                            result.solutions[s.index].defender_strategy.probabilities,
                        )
                    )
                    if not s.terminal
                    else {}
                ),
            }
            for s in game.states
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def solve_report_csv(game: MarkovGame, result: ShapleyResult) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state", "value", "action", "attacker_prob", "defender_prob"])
    for s in game.states:
        value = f"{result.values[s.index]:.6f}"
        if s.terminal:
            writer.writerow([f"s{s.index}", value, "", "", ""])
            continue
        sol = result.solutions[s.index]
        for action, p in zip(s.attacker_actions, sol.attacker_strategy.probabilities):
            writer.writerow([f"s{s.index}", value, action.label, f"{p:.6f}", ""])
        for action, p in zip(s.defender_actions, sol.defender_strategy.probabilities):
            writer.writerow([f"s{s.index}", value, action.label, "", f"{p:.6f}"])
    return buf.getvalue()
