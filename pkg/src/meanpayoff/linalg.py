"""Exact Gaussian elimination over sparse rational rows."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)


class SingularSystem(ArithmeticError):
    pass


def solve_exact(rows: Sequence[dict[int, Fraction]], rhs: Sequence[Fraction], n: int) -> list[Fraction]:
    """Unique solution of ``rows · x = rhs`` over ``n`` unknowns.

    Rows are sparse ``{column: coefficient}`` maps. Extra rows are allowed as
    long as they are consistent. Raises :class:`SingularSystem` when the
    solution is not unique or does not exist. Pivots go to the sparsest
    available row to limit fill-in.
    """
    work = [(dict(r), Fraction(b)) for r, b in zip(rows, rhs)]
    by_col: dict[int, set[int]] = {}
    for i, (r, _) in enumerate(work):
        for j in r:
            by_col.setdefault(j, set()).add(i)
    pivot_of: dict[int, int] = {}
    used: set[int] = set()
    for col in range(n):
        candidates = [i for i in by_col.get(col, ()) if i not in used and work[i][0].get(col)]
        if not candidates:
            raise SingularSystem(f"no pivot for unknown {col}")
        p = min(candidates, key=lambda i: (len(work[i][0]), i))
        used.add(p)
        pivot_of[col] = p
        prow, pb = work[p]
        inv = 1 / prow[col]
        prow = {j: v * inv for j, v in prow.items()}
        pb *= inv
        work[p] = (prow, pb)
        for i in list(by_col.get(col, ())):
            if i == p:
                continue
            row, b = work[i]
            f = row.get(col)
            if not f:
                continue
            for j, v in prow.items():
                nv = row.get(j, ZERO) - f * v
                if nv:
                    if j not in row:
                        by_col.setdefault(j, set()).add(i)
                    row[j] = nv
                elif j in row:
                    del row[j]
                    by_col[j].discard(i)
            work[i] = (row, b - f * pb)
    for i, (row, b) in enumerate(work):
        if i not in used and (any(row.values()) or b != 0):
            raise SingularSystem("inconsistent or dependent system")
    return [work[pivot_of[c]][1] for c in range(n)]
