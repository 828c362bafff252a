"""Dense-tableau simplex over an ordered field (Fractions, or floats with a tolerance).

Only what the Gibbs-set computation needs: phase-1 feasibility with a Farkas
certificate, and vertex enumeration of ``{x >= 0 : A x = b}`` by a
breadth-first walk over feasible bases.  Desk scale only.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

Num = Fraction | float


@dataclass
class Phase1Result:
    feasible: bool
    tableau: list | None = None  # canonical rows, rhs last
    basis: list | None = None
    certificate: list | None = None  # z with A^T z >= 0, b^T z < 0


def _pivot(T, basis, r, j):
    piv = T[r][j]
    row = [v / piv for v in T[r]]
    T[r] = row
    for i in range(len(T)):
        if i != r:
            f = T[i][j]
            if f != 0:
                Ti = T[i]
                T[i] = [Ti[k] - f * row[k] for k in range(len(row))]
    basis[r] = j


def _zero(field_tol):
    return 0 if field_tol == 0 else 0.0


def phase1(A: list, b: list, tol: float = 0) -> Phase1Result:
    """Find a feasible basis of ``A x = b, x >= 0`` or a Farkas certificate.

    Redundant rows are dropped from the returned tableau.  ``tol == 0``
    selects exact arithmetic (entries must be Fractions or ints).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    sign = [(-1 if b[i] < 0 else 1) for i in range(m)]
    # columns: n originals, m artificials, rhs
    T = []
    for i in range(m):
        row = [sign[i] * A[i][j] for j in range(n)]
        row += [1 if k == i else 0 for k in range(m)]
        row.append(sign[i] * b[i])
        T.append(row)
    basis = [n + i for i in range(m)]
    cost = [0] * n + [1] * m

    def reduced(j):
        return cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m))

    while True:
        # Bland: lowest-index entering column with negative reduced cost
        enter = next((j for j in range(n + m) if j not in basis and reduced(j) < -tol), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            if T[i][enter] > tol:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # cannot happen: phase-1 objective is bounded below
            break
        _pivot(T, basis, leave, enter)

    objective = sum(cost[basis[i]] * T[i][-1] for i in range(m))
    if objective > tol:
        # duals y_k = sum_i c_B[i] * Binv[i][k]; Binv sits in the artificial columns
        y = [sum(cost[basis[i]] * T[i][n + k] for i in range(m)) for k in range(m)]
        z = [-y[k] * sign[k] for k in range(m)]
        return Phase1Result(False, certificate=z)

    # drive artificials out; rows where that is impossible are redundant
    keep = []
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if abs(T[i][j]) > tol and j not in basis), None)
            if j is None:
                continue
            _pivot(T, basis, i, j)
        keep.append(i)
    tab = [T[i][:n] + [T[i][-1]] for i in keep]
    return Phase1Result(True, tableau=tab, basis=[basis[i] for i in keep])


def enumerate_vertices(tableau: list, basis: list, tol: float = 0, max_bases: int = 200_000) -> list[tuple]:
    """All vertices reachable by feasible pivots from a feasible canonical tableau.

    For a bounded polyhedron the feasible-basis graph is connected, so this
    is the full vertex set.  Returned as tuples, in discovery order.
    """
    m = len(tableau)
    n = len(tableau[0]) - 1 if m else 0

    def point(T, B):
        x = [_zero(tol)] * n
        for i, j in enumerate(B):
            x[j] = T[i][-1]
        return tuple(x)

    def key(x):
        if tol == 0:
            return x
        return tuple(round(v / tol) for v in x)

    if m == 0:
        return [tuple([_zero(tol)] * n)]
    start = tuple(sorted(basis))
    seen = {start}
    queue = deque([([row[:] for row in tableau], list(basis))])
    vertices, vkeys = [], set()
    while queue:
        T, B = queue.popleft()
        x = point(T, B)
        k = key(x)
        if k not in vkeys:
            vkeys.add(k)
            vertices.append(x)
        for j in range(n):
            if j in B:
                continue
            ratios = [(T[i][-1] / T[i][j], i) for i in range(m) if T[i][j] > tol]
            if not ratios:
                continue
            best = min(r for r, _ in ratios)
            for r, i in ratios:
                if r - best > tol:
                    continue
                nb = B[:]
                nb[i] = j
                sig = tuple(sorted(nb))
                if sig in seen:
                    continue
                seen.add(sig)
                if len(seen) > max_bases:
                    raise RuntimeError("basis enumeration exceeded its budget")
                T2 = [row[:] for row in T]
                _pivot(T2, nb, i, j)
                queue.append((T2, nb))
    return vertices


def rank(rows: list, tol: float = 0) -> int:
    """Row rank by Gaussian elimination (exact when ``tol == 0``)."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    ncol = len(M[0])
    r = 0
    for c in range(ncol):
        piv = None
        best = tol
        for i in range(r, len(M)):
            if abs(M[i][c]) > best:
                best, piv = abs(M[i][c]), i
                if tol == 0:
                    break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, len(M)):
            f = M[i][c] / M[r][c]
            if f != 0:
                M[i] = [M[i][k] - f * M[r][k] for k in range(ncol)]
        r += 1
        if r == len(M):
            break
    return r
