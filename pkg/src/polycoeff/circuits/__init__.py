"""Formulas, depth-3 circuits and branching programs."""

from ..algebra import DEFAULT_BUDGET
from .abp import (ABP, ABPPartitionVerdict, Edge, abp_partition_check, abp_segment_poly,
                  expand_abp, path_variables, recheck_partition_verdict)
from .formula import (ConstLeaf, Formula, KWeakResult, NodeProfile, Plus, Times, UPolyLeaf,
                      VarLeaf, check_central_path, classify_product_gates, is_product_sparse,
                      k_weak_nodes, node_profiles, preprocess)
from .formula import expand as expand_formula
from .serialize import circuit_from_json, circuit_to_json, load_circuit
from .sps import AffineForm, SigmaPiSigma, SPSProperties, expand_gate, expand_sps, sps_properties


def expand(c, fld, budget=DEFAULT_BUDGET):
    """Polynomial computed by any circuit kind."""
    if isinstance(c, SigmaPiSigma):
        return expand_sps(c, fld, budget)
    if isinstance(c, ABP):
        return expand_abp(c, fld, budget)
    return expand_formula(c, fld, budget)
