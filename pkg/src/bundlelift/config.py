"""Shared numeric defaults: the tolerance ladder and integration parameters.

Two tolerance tiers are used throughout: ``exact`` for closed-formula
constructions and algebraic identities on freshly built objects, and
``transport`` for anything derived from ODE integration at the default
step count. ``pipeline`` sits in between for multi-stage compositions.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-10
    pipeline: float = 1e-8
    transport: float = 1e-5
    # rank decisions: singular values relative to the largest one
    rank_rel: float = 1e-8
    # eigenvalue floor for "positive definite"
    spd_eig: float = 1e-12
    # central-difference step for Jacobians and projector derivatives
    fd_delta: float = 1e-6


DEFAULT_TOLERANCES = Tolerances()

DEFAULT_SEED = 42
DEFAULT_SAMPLES = 200
DEFAULT_TRANSPORT_STEPS = 1024
DEFAULT_MESH_LEVEL = 4
