"""Walk through the fixed-vector pipeline on three small representations.

Run with:  python demos/fixed_vector.py
"""

from pcontract.cli import format_series
from pcontract.group import central_certificate
from pcontract.rep import Rep, phi_apply
from pcontract.series import SeriesVector
from pcontract.solver import SolveOptions, algebra_nilpotency, solve

E = [[0, 1], [0, 0]]

CASES = {
    "E below the diagonal": Rep.from_blocks(2, 2, {(1, 0): E}),
    "E above the diagonal": Rep.from_blocks(2, 2, {(0, 1): E}),
    "Jordan block, p = 3": Rep.from_blocks(3, 3, {(0, 0): [[0, 1, 0], [0, 0, 1], [0, 0, 0]]}),
}


def show(name, rep, opts=None):
    print(f"== {name}")
    nil = algebra_nilpotency(rep, max_len=opts.max_len if opts else None)
    print(f"   algebra: {nil.status}" + (f", products of length {nil.N} vanish" if nil.N else ""))
    res = solve(rep, opts)
    print(f"   phases:  {' -> '.join(res.trace['phases'])}")
    print(f"   xi     = {format_series(res.xi)}")
    if res.oracle is not None:
        print(f"   oracle = {format_series(res.oracle)}")

    # check by hand that phi(1 + t^-1 + t^2) leaves xi alone
    f = SeriesVector.scalar(rep.p, {0: 1, -1: 1, 2: 1})
    moved = phi_apply(rep, f, res.xi) - res.xi
    print(f"   phi(1 + t^-1 + t^2) xi - xi = {format_series(moved)}")
    print(f"   central in the semidirect product: {central_certificate(rep, res.xi).status}")


if __name__ == "__main__":
    for name, rep in CASES.items():
        show(name, rep)
    # capping the word length hides nilpotency and forces the general branch
    show("E below the diagonal, budget 1", CASES["E below the diagonal"], SolveOptions(max_len=1, precision=10))
