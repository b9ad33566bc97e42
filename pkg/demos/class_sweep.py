"""Nilpotency class of F_p[[t]]^d x F_p[[t]] as the working precision grows.

Blocks far from the diagonal only produce commutators in high degrees, so
the class reported at low precision can be too small.

Run with:  python demos/class_sweep.py
"""

from pcontract.group import nilpotency_class
from pcontract.io import shipped_instances
from pcontract.rep import validate


def main():
    print(f"{'instance':28} p d  class at N = 1..10")
    for name, inst in shipped_instances().items():
        if not validate(inst.rep).valid:
            continue
        classes = [nilpotency_class(inst.rep, precision=n).cls for n in range(1, 11)]
        print(f"{name:28} {inst.rep.p} {inst.rep.d}  {' '.join(map(str, classes))}")


if __name__ == "__main__":
    main()
