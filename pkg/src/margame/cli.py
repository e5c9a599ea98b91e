"""Command-line front end.

Exit codes: 0 on success, 1 for domain errors (invalid model, unreachable
target, non-convergence), 2 for I/O and usage errors.  ``MARGAME_THREADS``
caps simulation parallelism.
"""

from __future__ import annotations

import csv
import os
import sys
from dataclasses import dataclass

import click

from . import __version__
from .dynamics import chain_csv, chain_dot, chain_probabilities, choice_policy
from .errors import ModelError, SolverError
from .game import MarkovGame, build_markov_game, game_to_json, payoff_csv
from .graph import (
    AttackGraph,
    PathObjective,
    best_path_by_exploitability,
    cloud10_path,
    export_dot,
    load_graph,
    path_from_distance_oracle,
    path_score,
    shortest_attack_path,
)
from .simulator import compare_strategies, report_csv, report_json, run_batch
from .solver import (
    greedy_attacker_policy,
    shapley_value_iteration,
    solve_report_csv,
    solve_report_json,
    urs_policy,
)


@dataclass
class RunConfig:
    graph_path: str
    c_def: float
    discount: float
    seed: int
    fmt: str
    out: str | None


def _threads() -> int:
    raw = os.environ.get("MARGAME_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fail(message: str, code: int) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _read_graph(path: str) -> AttackGraph:
    try:
        return load_graph(path)
    except OSError as exc:
        _fail(f"cannot read graph: {exc}", 2)
    except ModelError as exc:
        _fail(str(exc), 1)
    raise AssertionError("unreachable")


def _build_game(config: RunConfig, graph: AttackGraph) -> MarkovGame:
    try:
        return build_markov_game(graph, c_def=config.c_def, discount=config.discount)
    except ModelError as exc:
        _fail(str(exc), 1)
    raise AssertionError("unreachable")


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        with open(config.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
@click.version_option(__version__)
@click.option(
    "--graph",
    "graph_path",
    default=None,
    metavar="FILE",
    help="Attack-graph document (default: bundled cloud10 example).",
)
@click.option("--c-def", type=float, default=2.0, show_default=True, help="Defense cost per IDS placement.")
@click.option("--discount", type=float, default=0.9, show_default=True, help="Reward discount factor in [0,1).")
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed for all stochastic output.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "csv", "json"]),
    default="table",
    show_default=True,
)
@click.option("--out", default=None, metavar="FILE", help="Write output to FILE instead of stdout.")
@click.pass_context
def main(ctx: click.Context, graph_path: str | None, c_def: float, discount: float, seed: int, fmt: str, out: str | None) -> None:
    """Attack-graph Markov game: build, solve, and simulate."""
    if c_def < 0:
        raise click.UsageError(f"--c-def must be non-negative, got {c_def}")
    if not 0.0 <= discount < 1.0:
        raise click.UsageError(f"--discount out of range [0,1): {discount}")
    if seed < 0:
        raise click.UsageError(f"--seed must be non-negative, got {seed}")
    ctx.obj = RunConfig(
        graph_path=graph_path or cloud10_path(),
        c_def=c_def,
        discount=discount,
        seed=seed,
        fmt=fmt,
        out=out,
    )


@main.command()
@click.argument("graph", required=False)
@click.pass_obj
def validate(config: RunConfig, graph: str | None) -> None:
    """Parse and validate a graph document; exit 0 iff valid."""
    g = _read_graph(graph or config.graph_path)
    _emit(config, f"{g.node_count} nodes, {len(g.hosts)} hosts, {g.edge_count} edges, OK")


@main.command()
@click.option(
    "--objective",
    type=click.Choice([o.value for o in PathObjective]),
    default=PathObjective.HOPS_MIN.value,
    show_default=True,
)
@click.option(
    "--estimator-distances",
    "estimator_file",
    default=None,
    metavar="FILE",
    help="Use a learned distance table (interchange CSV) as the attacker's path oracle.",
)
@click.option("--dot", is_flag=True, help="Also emit a DOT rendering with the path dashed.")
@click.pass_obj
def paths(config: RunConfig, objective: str, estimator_file: str | None, dot: bool) -> None:
    """Print the shortest attack path (or the best path per objective)."""
    g = _read_graph(config.graph_path)
    try:
        exact = shortest_attack_path(g)
        lines = []
        if objective == PathObjective.HOPS_MIN.value:
            lines.append(f"{' '.join(exact.nodes)} ({exact.hop_count} hops)")
        else:
            best = best_path_by_exploitability(g, objective)
            score = path_score(g, best, objective)
            lines.append(f"{' '.join(best.nodes)} ({objective}={score:.4f})")
        shown = exact
        if estimator_file is not None:
            predicted = path_from_distance_oracle(g, _read_distances(estimator_file))
            if predicted.nodes != exact.nodes:
                click.echo(
                    "warning: estimator-predicted path differs from exact BFS path",
                    err=True,
                )
                lines.append(f"predicted: {' '.join(predicted.nodes)} ({predicted.hop_count} hops)")
                lines.append(f"exact:     {' '.join(exact.nodes)} ({exact.hop_count} hops)")
            else:
                lines.append(f"predicted: {' '.join(predicted.nodes)} (matches exact BFS)")
            shown = predicted
        if dot:
            lines.append(export_dot(g, shown).rstrip("\n"))
        _emit(config, "\n".join(lines))
    except ModelError as exc:
        _fail(str(exc), 1)


def _read_distances(path: str) -> dict[tuple[str, str], float]:
    table: dict[tuple[str, str], float] = {}
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            for row in reader:
                table[(row["source"], row["destination"])] = float(
                    row["predicted_distance"]
                )
    except OSError as exc:
        _fail(f"cannot read estimator distances: {exc}", 2)
    except (KeyError, TypeError, ValueError):
        _fail(f"malformed estimator interchange file: {path}", 1)
    return table


@main.command("build-game")
@click.pass_obj
def build_game(config: RunConfig) -> None:
    """Print the per-state zero-sum payoff matrices."""
    g = _read_graph(config.graph_path)
    game = _build_game(config, g)
    if config.fmt == "csv":
        _emit(config, payoff_csv(game))
    elif config.fmt == "json":
        _emit(config, game_to_json(game))
    else:
        blocks = []
        for payoff in game.payoffs:
            state = payoff.state
            header = f"s{state.index} ({state.current_node})"
            widths = [10] + [10] * len(state.defender_actions)
            rows = [
                [""] + [d.label for d in state.defender_actions]
            ]
            for action, row in zip(state.attacker_actions, payoff.attacker_reward):
                rows.append([action.label] + [f"{x:g}" for x in row])
            table = "\n".join(
                "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                for row in rows
            )
            blocks.append(f"{header}\n{table}")
        _emit(config, "\n\n".join(blocks))


@main.command()
@click.option("--dot", is_flag=True, help="Emit the chain as DOT instead of rows.")
@click.pass_obj
def transitions(config: RunConfig, dot: bool) -> None:
    """Print the default-policy state chain (from, to, probability)."""
    g = _read_graph(config.graph_path)
    game = _build_game(config, g)
    chain = chain_probabilities(game)
    if dot:
        _emit(config, chain_dot(chain))
    elif config.fmt == "csv":
        _emit(config, chain_csv(chain))
    else:
        lines = []
        for q in range(chain.state_count):
            row = chain.row(q)
            for nxt in sorted(row):
                lines.append(f"s{q}  s{nxt}  {row[nxt]:.4f}")
        _emit(config, "\n".join(lines))


@main.command()
@click.option("--tolerance", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=int, default=10_000, show_default=True)
@click.pass_obj
def solve(config: RunConfig, tolerance: float, max_iter: int) -> None:
    """Value-iterate the game and print values and maxmin strategies."""
    g = _read_graph(config.graph_path)
    game = _build_game(config, g)
    try:
        result = shapley_value_iteration(game, tolerance=tolerance, max_iter=max_iter)
    except SolverError as exc:
        _fail(str(exc), 1)
        return
    except ModelError as exc:
        _fail(str(exc), 1)
        return
    if config.fmt == "csv":
        _emit(config, solve_report_csv(game, result))
    elif config.fmt == "json":
        _emit(config, solve_report_json(game, result))
    else:
        lines = [
            f"converged in {result.values.iterations} iterations, residual {result.values.residual:.3e}"
        ]
        for state in game.states:
            lines.append(f"s{state.index}: V = {result.values[state.index]:.4f}")
            if state.terminal:
                continue
            sol = result.solutions[state.index]
            att = ", ".join(
                f"{a.label}={p:.4f}"
                for a, p in zip(state.attacker_actions, sol.attacker_strategy.probabilities)
            )
            dfn = ", ".join(
                f"{d.label}={p:.4f}"
                for d, p in zip(state.defender_actions, sol.defender_strategy.probabilities)
            )
            lines.append(f"  attacker: {att}")
            lines.append(f"  defender: {dfn}")
        _emit(config, "\n".join(lines))


@main.command()
@click.option("--episodes", type=int, default=10_000, show_default=True)
@click.option("--max-steps", type=int, default=200, show_default=True)
@click.option(
    "--compare",
    "compare_names",
    default=None,
    metavar="NAMES",
    help="Comma-separated defender policies to compare (urs, maxmin, nodefense).",
)
@click.option(
    "--attacker",
    "attacker_name",
    type=click.Choice(["choice", "greedy", "urs"]),
    default=None,
    help="Attacker policy (default: choice; greedy when comparing).",
)
@click.pass_obj
def simulate(
    config: RunConfig,
    episodes: int,
    max_steps: int,
    compare_names: str | None,
    attacker_name: str | None,
) -> None:
    """Monte-Carlo simulate episodes; optionally compare defender policies."""
    if episodes < 1:
        raise click.UsageError(f"--episodes must be >= 1, got {episodes}")
    if max_steps < 1:
        raise click.UsageError(f"--max-steps must be >= 1, got {max_steps}")
    g = _read_graph(config.graph_path)
    game = _build_game(config, g)
    threads = _threads()

    def attacker_policy(name: str):
        if name == "choice":
            return choice_policy(game)
        if name == "urs":
            return urs_policy(game, "attacker")
        result = shapley_value_iteration(game)
        return greedy_attacker_policy(result.q, urs_policy(game, "defender"))

    try:
        if compare_names is None:
            attacker = attacker_policy(attacker_name or "choice")
            report = run_batch(
                game,
                attacker_policy=attacker,
                episodes=episodes,
                base_seed=config.seed,
                max_steps=max_steps,
                threads=threads,
            )
            if config.fmt == "csv":
                _emit(config, report_csv(report))
            elif config.fmt == "json":
                _emit(config, report_json(report))
            else:
                _emit(config, _report_table(report))
            return

        names = [n.strip() for n in compare_names.split(",") if n.strip()]
        if len(names) < 2:
            raise click.UsageError("--compare needs at least two policy names")
        defenders = {}
        for name in names:
            if name == "urs":
                defenders[name] = urs_policy(game, "defender")
            elif name == "maxmin":
                defenders[name] = shapley_value_iteration(game).defender_policy()
            elif name == "nodefense":
                defenders[name] = _pure_no_defense(game)
            else:
                raise click.UsageError(f"unknown defender policy {name!r}")
        attacker = attacker_policy(attacker_name or "greedy")
        rows = compare_strategies(
            game,
            None,
            defenders,
            attacker,
            episodes=episodes,
            base_seed=config.seed,
            max_steps=max_steps,
            threads=threads,
        )
        lines = ["defender  mean_attacker_return  stderr  reach_rate"]
        for name, report in rows:
            lines.append(
                f"{name:<9} {report.mean_discounted_attacker_return:>20.4f}  "
                f"{report.stderr_discounted_attacker_return:.4f}  "
                f"{report.target_reach_rate:.4f}"
            )
        _emit(config, "\n".join(lines))
    except SolverError as exc:
        _fail(str(exc), 1)
    except ModelError as exc:
        _fail(str(exc), 1)


def _pure_no_defense(game: MarkovGame):
    from .dynamics import PolicyVector

    vectors = []
    for state in game.states:
        if state.terminal:
            vectors.append(PolicyVector(state=state.index, probabilities=()))
        else:
            probs = (1.0,) + (0.0,) * (len(state.defender_actions) - 1)
            vectors.append(PolicyVector(state=state.index, probabilities=probs))
    return tuple(vectors)


def _report_table(report) -> str:
    lines = [
        f"episodes:             {report.episode_count}",
        f"mean attacker return: {report.mean_discounted_attacker_return:.4f}"
        f" +/- {report.stderr_discounted_attacker_return:.4f}",
        f"mean defender return: {report.mean_discounted_defender_return:.4f}",
        f"target reach rate:    {report.target_reach_rate:.4f}",
        f"mean episode length:  {report.mean_episode_length:.4f}",
        "empirical chain:",
    ]
    for q, row in enumerate(report.empirical_chain):
        for nxt, p in enumerate(row):
            if p > 0:
                lines.append(f"  s{q} -> s{nxt}  {p:.4f}")
    return "\n".join(lines)


if __name__ == "__main__":
    main()
