"""Independent reference implementations used only to check the package.

Nothing here may import from the modules it verifies beyond plain data
types.  The matrix-game oracle enumerates square support pairs and solves
each bordered subsystem exactly (rational arithmetic for rational input);
the graph oracles are a from-scratch BFS and an edge-list DFS enumerator.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


# ---------------------------------------------------------------------------
# exact linear algebra over fractions
# ---------------------------------------------------------------------------

def solve_exact(matrix, rhs):
    """Gaussian elimination over Fractions; returns None when singular."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [x / inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


# ---------------------------------------------------------------------------
# matrix-game oracle: support-pair enumeration
# ---------------------------------------------------------------------------

def oracle_matrix_game(matrix):
    """(value, row strategy, column strategy) by brute-force support search.

    Enumerates equal-size support pairs smallest-first (lexicographic within
    a size), solves the bordered equalization system exactly, and returns
    the first pair passing the equilibrium checks.  Existence is guaranteed
    by the Shapley-Snow kernel theorem.
    """
    rows = len(matrix)
    cols = len(matrix[0])
    a = [[Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x) for x in row] for row in matrix]

    for size in range(1, min(rows, cols) + 1):
        for row_support in combinations(range(rows), size):
            for col_support in combinations(range(cols), size):
                result = _try_pair(a, rows, cols, row_support, col_support)
                if result is not None:
                    return result
    raise AssertionError("no equilibrium support pair found (impossible)")


def _try_pair(a, rows, cols, row_support, col_support):
    k = len(row_support)
    # unknowns: x over row_support plus the value v
    system = []
    rhs = []
    for j in col_support:
        system.append([a[i][j] for i in row_support] + [Fraction(-1)])
        rhs.append(Fraction(0))
    system.append([Fraction(1)] * k + [Fraction(0)])
    rhs.append(Fraction(1))
    sol_x = solve_exact(system, rhs)
    if sol_x is None:
        return None
    x_support, value = sol_x[:k], sol_x[k]

    system = []
    rhs = []
    for i in row_support:
        system.append([a[i][j] for j in col_support] + [Fraction(-1)])
        rhs.append(Fraction(0))
    system.append([Fraction(1)] * k + [Fraction(0)])
    rhs.append(Fraction(1))
    sol_y = solve_exact(system, rhs)
    if sol_y is None:
        return None
    y_support, value_y = sol_y[:k], sol_y[k]

    if value != value_y:
        return None
    if any(p < 0 for p in x_support) or any(p < 0 for p in y_support):
        return None

    x = [Fraction(0)] * rows
    for i, p in zip(row_support, x_support):
        x[i] = p
    y = [Fraction(0)] * cols
    for j, p in zip(col_support, y_support):
        y[j] = p

    for j in range(cols):  # x must guarantee >= value against every column
        if sum(x[i] * a[i][j] for i in range(rows)) < value:
            return None
    for i in range(rows):  # y must cap <= value against every row
        if sum(a[i][j] * y[j] for j in range(cols)) > value:
            return None
    return float(value), [float(p) for p in x], [float(p) for p in y]


# ---------------------------------------------------------------------------
# graph oracles
# ---------------------------------------------------------------------------

def oracle_bfs_distance(edges, source, destination):
    """Hop distance by plain forward BFS; None when unreachable."""
    adjacency: dict[str, list[str]] = {}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)
    dist = {source: 0}
    queue = [source]
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        if node == destination:
            return dist[node]
        for nxt in adjacency.get(node, ()):
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                queue.append(nxt)
    return dist.get(destination)


def oracle_all_simple_paths(edges, source, destination, max_hops):
    """Every simple path with at most ``max_hops`` hops, as node tuples."""
    adjacency: dict[str, list[str]] = {}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)

    paths = []
    stack = [(source, (source,))]
    while stack:
        node, trail = stack.pop()
        if node == destination:
            paths.append(trail)
            continue
        if len(trail) > max_hops:
            continue
        for nxt in adjacency.get(node, ()):
            if nxt not in trail:
                stack.append((nxt, trail + (nxt,)))
    return sorted(paths)


def oracle_access_probability(exploitabilities):
    """P(at least one success) by enumerating all outcome combinations."""
    n = len(exploitabilities)
    total = 0.0
    for mask in range(1, 2**n):
        p = 1.0
        for bit, e in enumerate(exploitabilities):
            p *= e if mask & (1 << bit) else (1.0 - e)
        total += p
    return total
