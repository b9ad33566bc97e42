"""Move a representation that breaks the standard lattice onto one that keeps it.

The generator E at (-1, 0) sends e2 t^0 to e1 t^-1, so phi(F_p[[t]]) does
not preserve F_p[[t]]^2. The smallest invariant subgroup containing the
lattice is larger; rewriting in a basis of it gives an equivalent
representation that does preserve the lattice.

Run with:  python demos/change_of_basis.py
"""

from pcontract.cli import format_series
from pcontract.lattice import complement_basis, subgroup_index
from pcontract.rep import Rep, invariant_subgroup, normalize


def main():
    rep = Rep.from_blocks(2, 2, {(-1, 0): [[0, 1], [0, 0]]})
    print("generator:", rep.A0)
    V = invariant_subgroup(rep)
    tV = V.shifted(1)
    print(f"invariant subgroup V has index {subgroup_index(V, tV)} over tV")
    for k, b in enumerate(complement_basis(V).b):
        print(f"  b_{k} = {format_series(b)}")
    norm = normalize(rep)
    print("in the basis b the generator becomes", norm.rep.A0)


if __name__ == "__main__":
    main()
