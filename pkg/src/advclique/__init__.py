"""Maximum common cliques across adversarially perturbed graphs.

A penalized continuous min-max model solved by a projection-free
Frank-Wolfe method, with an exact branch-and-bound oracle and a
benchmark harness.
"""

from .graph import (Graph, InstanceSpec, UncertaintySet, generate_instance, intersection_graph,
                    load_instance, parse_dimacs, planted_instance, regularized_matrix, save_instance)
from .model import FeasiblePoint, ModelParams

__version__ = "0.1.0"
