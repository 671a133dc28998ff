"""Independent reference computations used only by the tests."""

import itertools

import numpy as np

from nonlocal_lab.simplex import LinearProgram


def vertex_enumeration(lp: LinearProgram, tol: float = 1e-9) -> float | None:
    """Optimum of a bounded LP by trying every basic solution.

    Rows are turned into ``G x <= h`` together with ``-x <= 0``; equality rows
    are active at every feasible point, so any nonsingular choice of n rows
    that is feasible is a vertex.  Returns None when no vertex is feasible.
    """
    n = lp.n_vars
    rows, rhs, eq = [], [], []
    for coefs, s, b in zip(lp.matrix, lp.senses, lp.bounds):
        if s == "<=":
            rows.append(coefs); rhs.append(b)
        elif s == ">=":
            rows.append(-coefs); rhs.append(-b)
        else:
            eq.append(len(rows))
            rows.append(coefs); rhs.append(b)
    g = np.vstack([np.array(rows).reshape(-1, n), -np.eye(n)])
    h = np.concatenate([np.array(rhs, dtype=float), np.zeros(n)])
    eq = set(eq)
    best = None
    for active in itertools.combinations(range(len(g)), n):
        sub = g[list(active)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, h[list(active)])
        ok = all(
            abs(g[i] @ x - h[i]) <= tol * (1 + abs(h[i])) if i in eq else g[i] @ x <= h[i] + tol * (1 + abs(h[i]))
            for i in range(len(g))
        )
        if ok:
            v = float(lp.objective @ x)
            best = v if best is None else max(best, v)
    return best


def lp_corpus(seed: int = 0, size: int = 40) -> list[LinearProgram]:
    """Small bounded LPs (at most 8 variables and 12 constraints), some of
    them infeasible or degenerate."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 7))
        a = rng.integers(-4, 5, size=(m, n)).astype(float)
        b = rng.integers(-3, 8, size=m).astype(float)
        senses = list(rng.choice(["<=", "<=", ">=", "="], size=m))
        if k % 5 == 0 and m > 1:
            # repeated row makes the vertex degenerate
            a[1], b[1], senses[1] = a[0], b[0], senses[0]
        a = np.vstack([a, np.ones(n)])
        b = np.append(b, 10.0)
        senses.append("<=")
        c = rng.integers(-3, 6, size=n).astype(float)
        out.append(LinearProgram(c, a, b, senses))
    out.append(LinearProgram([1, 1], [[1, 1], [1, 1]], [1, 2], ["<=", ">="]))
    out.append(LinearProgram([1, 0, 0], [[1, 1, 1], [1, -1, 0]], [4, 0], ["=", "="]))
    return out
