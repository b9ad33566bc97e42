"""Exact computations for p-power contraction groups over F_p((t))^d.

A representation phi of (F_p((t)), +) on F_p((t))^d compatible with the
shift is stored through its generator A0 = phi(1) - I as a finite block
matrix. The package validates such generators, finds nonzero vectors fixed
by every phi(f), and measures the nilpotency class of the semidirect product
at finite precision.
"""

from .blocks import BlockMatrix, LazyEndo, bm_apply, bm_compose, change_basis, shift_conjugate
from .errors import (
    BranchError,
    CertificateError,
    FormatError,
    InvalidRep,
    PContractError,
    PrecisionError,
    ResourceExhausted,
)
from .families import generate
from .group import SDElement, central_certificate, nilpotency_class, sd_inv, sd_mul
from .io import Instance, load_instance, save_instance, shipped_instances
from .lattice import CompactOpenSubgroup, basis_expand, complement_basis, enumerate_cosets, subgroup_index
from .linalg import MatFp, is_unipotent, joint_strict_triangularize, kernel_basis, mat_mul
from .rep import Rep, invariant_subgroup, phi_apply, phi_minus_id, u0_reduce, validate, zero_pattern
from .series import SeriesVector, parse_poly, project, shift
from .solver import SolveOptions, oracle_fixed_vector, solve

__version__ = "0.1.0"

__all__ = [
    "BlockMatrix", "BranchError", "CertificateError", "CompactOpenSubgroup", "FormatError", "Instance",
    "InvalidRep", "LazyEndo", "MatFp", "PContractError", "PrecisionError", "Rep", "ResourceExhausted",
    "SDElement", "SeriesVector", "SolveOptions", "basis_expand", "bm_apply", "bm_compose", "central_certificate",
    "change_basis", "complement_basis", "enumerate_cosets", "generate", "invariant_subgroup", "is_unipotent",
    "joint_strict_triangularize", "kernel_basis", "load_instance", "mat_mul", "nilpotency_class",
    "oracle_fixed_vector", "parse_poly", "phi_apply", "phi_minus_id", "project", "save_instance",
    "sd_inv", "sd_mul", "shift", "shift_conjugate", "shipped_instances", "solve", "subgroup_index",
    "u0_reduce", "validate", "zero_pattern",
]
