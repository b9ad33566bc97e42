"""Regenerate the bundled instance suite under src/pcontract/instances."""

from pathlib import Path

from pcontract.blocks import BlockMatrix
from pcontract.families import generate
from pcontract.io import Instance, save_instance
from pcontract.rep import Rep

OUT = Path(__file__).resolve().parents[1] / "src" / "pcontract" / "instances"
E = [[0, 1], [0, 0]]
J3 = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]


def hand(p, d, blocks, name):
    return Instance(Rep(BlockMatrix(p, d, blocks)), {"family": "hand", "name": name})


SUITE = {
    "trivial_p2_d1": hand(2, 1, {}, "zero generator"),
    "trivial_p5_d3": hand(5, 3, {}, "zero generator"),
    "e2_p2": hand(2, 2, {(1, 0): E}, "E at (1,0)"),
    "e2_p5": hand(5, 2, {(1, 0): E}, "E at (1,0)"),
    "above_diagonal_p2": hand(2, 2, {(0, 1): E}, "E at (0,1)"),
    "lattice_breaking_p2": hand(2, 2, {(-1, 0): E}, "E at (-1,0)"),
    "toeplitz_index2_p2": hand(2, 2, {(0, 0): E}, "symbol of nilpotency index 2"),
    "toeplitz_index3_p3": hand(3, 3, {(0, 0): J3}, "symbol of nilpotency index 3"),
    "toeplitz_p3_d2_s7": generate("toeplitz", 3, 2, 7),
    "toeplitz_p5_d3_s1": generate("toeplitz", 5, 3, 1),
    "single_block_p3_d2_s4": generate("single-block", 3, 2, 4),
    "single_block_p5_d3_s2": generate("single-block", 5, 3, 2),
    "random_p2_d3_s3": generate("random", 2, 3, 3),
    "random_p3_d2_s5": generate("random", 3, 2, 5),
    "random_p5_d2_s0": generate("random", 5, 2, 0),
    "invalid_d1_p2": hand(2, 1, {(1, 0): [[1]]}, "fails commutation at r = -1"),
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, inst in SUITE.items():
        save_instance(inst, OUT / f"{name}.json")
    print(f"wrote {len(SUITE)} instances to {OUT}")
