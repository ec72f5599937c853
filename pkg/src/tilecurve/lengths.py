"""Exact circle parametrization of the curve approximations.

The level-1 circuit splits at its marked passes into one chain per curve
arc; counting the types in each chain gives a non-negative integer matrix
whose column sums equal the degree.  Its eigenvector for the eigenvalue d,
normalized to sum 1, assigns every arc a positive rational length, and a
level-n edge of type j gets length d^{-n} l_j.  Cumulative sums place each
circuit on the circle so that the map acts as t -> d t + theta0 (mod 1),
with theta0 the distance from the base point to its image.  All arithmetic
is exact; no floating point enters anywhere here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .connect import EulerCircuit
from .rulecomplex import CellComplex


class LengthError(Exception):
    pass


@dataclass(frozen=True)
class LengthSystem:
    m: tuple  # k x k rows of type counts
    l: tuple  # k positive rationals summing to 1
    theta0: Fraction
    d: int
    k: int
    plan_hash: str = ""

    def text(self) -> str:
        lines = ["M ="]
        for row in self.m:
            lines.append("  " + " ".join(f"{x:3d}" for x in row))
        lines.append("l = " + " ".join(str(x) for x in self.l))
        lines.append(f"theta0 = {self.theta0}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ParamGrid:
    level: int
    alphas: tuple  # one Fraction per circuit position, starting at 0
    circuit: EulerCircuit


def chain_decomposition(cx: CellComplex, circuit: EulerCircuit):
    """Split the based circuit at its marked passes, one chain per arc.

    The circuit must start right after the marked pass of the base point;
    chain t runs from the pass at p_t to the pass at p_{t+1}.
    """
    k = cx.k
    n = len(circuit.edges)
    pos = []
    for t in range(k):
        v = cx.post_vertex[t]
        if v not in circuit.marked_pos:
            raise LengthError(f"circuit has no marked pass at point {t}")
        pos.append(circuit.marked_pos[v])
    if pos[0] != n - 1:
        raise LengthError("circuit is not based at the marked pass of p0")
    if any(pos[t - 1] > pos[t] for t in range(2, k)):
        raise LengthError("marked passes out of cyclic order")
    chains = []
    for t in range(k):
        lo = (pos[t] + 1) % n
        hi = pos[(t + 1) % k]
        chains.append(tuple(circuit.edges[(lo + s) % n] for s in range((hi - lo) % n + 1)))
    if sum(len(c) for c in chains) != n:
        raise LengthError("chains do not cover the circuit")
    return chains


def transition_matrix(cx: CellComplex, chains):
    """m[i][j] = number of type-j edges in the chain replacing arc i."""
    k = cx.k
    m = [[0] * k for _ in range(k)]
    for i, chain in enumerate(chains):
        for e in chain:
            m[i][cx.edge_type[e]] += 1
    m = tuple(tuple(row) for row in m)
    cols = [sum(m[i][j] for i in range(k)) for j in range(k)]
    if any(c != cx.d for c in cols):
        raise LengthError(f"column sums {cols} differ from the degree {cx.d}")
    if not is_primitive(m) and not _is_identity(m):
        # primitivity holds for every expanding rule; only the degenerate
        # degree-1 rule produces the identity matrix
        raise LengthError("transition matrix is not primitive")
    return m


def _is_identity(m) -> bool:
    k = len(m)
    return all(m[i][j] == (1 if i == j else 0) for i in range(k) for j in range(k))


def is_primitive(m) -> bool:
    """Some power of m up to exponent k*k is strictly positive."""
    k = len(m)
    b = [[1 if x else 0 for x in row] for row in m]
    e = 1
    while e <= k * k:
        if all(all(x for x in row) for row in b):
            return True
        b = _boolmul(b, b)
        e *= 2
    return all(all(x for x in row) for row in b)


def _boolmul(a, b):
    k = len(a)
    return [
        [1 if any(a[i][t] and b[t][j] for t in range(k)) else 0 for j in range(k)]
        for i in range(k)
    ]


def solve_lengths(m, d: int):
    """The exact rational kernel vector of (M - d I), normalized to sum 1.

    The eigenvalue is pinned to d, so plain Gaussian elimination over the
    rationals replaces any numerical eigensolver.  The kernel must be one
    dimensional and the vector strictly positive.
    """
    k = len(m)
    if _is_identity(m) and d == 1:
        return tuple([Fraction(1, k)] * k)  # uniform by symmetry
    a = [[Fraction(m[i][j]) - (d if i == j else 0) for j in range(k)] for i in range(k)]
    # row reduce
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, k) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        a[r] = [x / inv for x in a[r]]
        for i in range(k):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(k) if c not in pivots]
    if len(free) != 1:
        raise LengthError(f"kernel dimension {len(free)} is not 1")
    sol = [Fraction(0)] * k
    sol[free[0]] = Fraction(1)
    for row, c in zip(a, pivots):
        sol[c] = -row[free[0]]
    total = sum(sol)
    if total == 0:
        raise LengthError("kernel vector sums to zero")
    sol = [x / total for x in sol]
    if any(x <= 0 for x in sol):
        raise LengthError("eigenvector is not strictly positive")
    # exactness check
    for i in range(k):
        if sum(m[i][j] * sol[j] for j in range(k)) != d * sol[i]:
            raise LengthError("kernel vector fails M l = d l")
    return tuple(sol)


def theta0(cx1: CellComplex, l) -> Fraction:
    """Offset of the base point's image along the circle.

    Zero when the base point is fixed; otherwise the total length of the
    arcs from p_0 to its image.
    """
    p0 = cx1.post_vertex[0]
    target = cx1.vertex_postindex[p0]  # index of the image point
    return sum((l[j] for j in range(target)), Fraction(0))


def build_length_system(cx1: CellComplex, circuit: EulerCircuit, plan_hash: str = "") -> LengthSystem:
    chains = chain_decomposition(cx1, circuit)
    m = transition_matrix(cx1, chains)
    l = solve_lengths(m, cx1.d)
    return LengthSystem(m, l, theta0(cx1, l), cx1.d, cx1.k, plan_hash)


def alpha_grid(ls: LengthSystem, cx: CellComplex, circuit: EulerCircuit) -> ParamGrid:
    """Cumulative exact lengths over the circuit, starting at 0.

    The gap after position j is d^{-level} times the length of the type of
    the j-th edge; the gaps close up to exactly 1 around the circle.
    """
    scale = Fraction(1, ls.d**circuit.level)
    alphas = [Fraction(0)]
    for e in circuit.edges[:-1]:
        alphas.append(alphas[-1] + scale * ls.l[cx.edge_type[e]])
    closing = alphas[-1] + scale * ls.l[cx.edge_type[circuit.edges[-1]]]
    if closing != 1:
        raise LengthError(f"grid closes at {closing}, not 1")
    return ParamGrid(circuit.level, tuple(alphas), circuit)
