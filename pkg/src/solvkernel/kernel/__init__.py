from .mgk import (
    KernelMatrix,
    available_backends,
    cross_kernel_matrix,
    default_threads,
    distance_from_kernel,
    edge_kernel,
    get_backend,
    graph_distance,
    kernel_matrix,
    mgk_normalized,
    mgk_raw,
    self_kernels,
    set_backend,
    vertex_kernel,
)
from .oracle import brute_force_kernel, brute_force_terms
from .params import KernelHyperparameters

__all__ = [
    "KernelHyperparameters",
    "KernelMatrix",
    "available_backends",
    "brute_force_kernel",
    "brute_force_terms",
    "cross_kernel_matrix",
    "default_threads",
    "distance_from_kernel",
    "edge_kernel",
    "get_backend",
    "graph_distance",
    "kernel_matrix",
    "mgk_normalized",
    "mgk_raw",
    "self_kernels",
    "set_backend",
    "vertex_kernel",
]
