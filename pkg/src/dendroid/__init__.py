"""Trees as broad posets, equivariant face structure, and lifting certificates."""

from dendroid.broadposet import Forest, Tree, broad_closure, corolla, eta, linear
from dendroid.genuine import (
    SetOperad,
    TruncatedPresheaf,
    constant_presheaf,
    grafting_pullback,
    is_normal,
    lifting_equivalence_suite,
    nerve,
    strict_segal_check,
    tree_operad,
    truncation,
    upsilon_star,
)
from dendroid.tensor import maximal_subtrees, tensor, verify_tensor_characteristic
from dendroid.treemaps import FaceDescriptor, TreeMap, inner_face, outer_face

__all__ = [
    "Forest",
    "Tree",
    "broad_closure",
    "corolla",
    "eta",
    "linear",
    "FaceDescriptor",
    "TreeMap",
    "inner_face",
    "outer_face",
    "maximal_subtrees",
    "tensor",
    "verify_tensor_characteristic",
    "SetOperad",
    "TruncatedPresheaf",
    "constant_presheaf",
    "grafting_pullback",
    "is_normal",
    "lifting_equivalence_suite",
    "nerve",
    "strict_segal_check",
    "tree_operad",
    "truncation",
    "upsilon_star",
]

__version__ = "0.1.0"
