"""Numerical obstructions to lifting: lattice first Chern numbers,
pullback-invariance reports, holonomy sign profiles and the integer
criterion for torus line bundles.

The Chern number of a complex line bundle over the two-sphere is computed
from gauge-invariant Bargmann phases arg tr(Q_a Q_b Q_c) accumulated over
an icosphere triangulation; the orientation convention is pinned by the
calibration anchor c1(tautological line over CP^1) = -1. Only
convention-independent ratios and products are meaningful across other
conventions.
"""

import functools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bundles import holonomy_sign, pullback, torus_line
from .config import DEFAULT_TRANSPORT_STEPS
from .errors import BadParams, DegeneratePlaquette, NonConvergent
from .manifolds import (ComplexProjective, Sphere, icosphere, integer_inverse,
                        sphere_to_cp1)

__all__ = [
    "ChernResult",
    "lattice_chern_number",
    "pullback_invariance_report",
    "TorusCriterionResult",
    "torus_criterion",
    "w1_profile",
]


@dataclass
class ChernResult:
    value: int
    raw: float
    mesh_level: int
    stable: bool

    def to_dict(self):
        return {"value": self.value, "raw": self.raw,
                "mesh_level": self.mesh_level, "stable": self.stable}


@functools.lru_cache(maxsize=8)
def _cp1_mesh_points(level):
    verts, _ = icosphere(level)
    return [sphere_to_cp1(v) for v in verts]


def _mesh_base_points(base, level):
    if isinstance(base, ComplexProjective) and base.n == 1:
        return _cp1_mesh_points(level)
    if isinstance(base, Sphere) and base.n == 2:
        verts, _ = icosphere(level)
        return list(verts)
    raise BadParams(f"chern computation needs a base S^2 or CP^1, got {base}")


def plaquette_phases(line_bundle, mesh_level):
    """Per-triangle Bargmann phases of the bundle on the icosphere mesh,
    in triangle-index order."""
    pts = _mesh_base_points(line_bundle.base, mesh_level)
    _, tris = icosphere(mesh_level)
    qv = np.stack([line_bundle.complex_fiber_projector(p) for p in pts])
    phases, min_abs = _kernels.plaquette_phases(
        np.ascontiguousarray(qv), np.ascontiguousarray(tris))
    if min_abs < 1e-12:
        raise DegeneratePlaquette(
            f"plaquette overlap {min_abs:.3e} < 1e-12 at level {mesh_level}"
        )
    return phases


def _chern_raw(line_bundle, mesh_level):
    # sum of outward-oriented plaquette phases equals 2 pi c1 in this
    # package's conventions (anchor: tautological bundle -> -1)
    phases = plaquette_phases(line_bundle, mesh_level)
    return float(np.sum(phases)) / (2.0 * np.pi)


def lattice_chern_number(line_bundle, mesh_level):
    """First Chern number of a complex line bundle over S^2 / CP^1.

    The integer is required to agree across mesh_level and mesh_level+1;
    ``stable`` additionally records whether both raw sums sit within 0.05
    of the integer.
    """
    if mesh_level < 3:
        raise BadParams("mesh_level must be >= 3")
    if line_bundle.real_rank != 2 or not line_bundle.has_complex_structure:
        raise BadParams("lattice_chern_number needs a complex line bundle")
    raw = _chern_raw(line_bundle, mesh_level)
    raw_next = _chern_raw(line_bundle, mesh_level + 1)
    value = int(round(raw))
    value_next = int(round(raw_next))
    if value != value_next:
        raise NonConvergent(
            f"chern estimate changed across levels: {raw:.4f} @ {mesh_level} "
            f"vs {raw_next:.4f} @ {mesh_level + 1}"
        )
    stable = abs(raw - value) <= 0.05 and abs(raw_next - value_next) <= 0.05
    return ChernResult(value=value, raw=raw, mesh_level=mesh_level, stable=stable)


def pullback_invariance_report(diffeo, line_bundle, mesh_level=4):
    """Compare c1 of a bundle with c1 of its pullback along a
    diffeomorphism; disagreement obstructs any C-linear lift."""
    c1 = lattice_chern_number(line_bundle, mesh_level)
    c1_pb = lattice_chern_number(pullback(diffeo, line_bundle), mesh_level)
    return {
        "c1": c1.value,
        "c1_pullback": c1_pb.value,
        "lift_obstructed": c1.value != c1_pb.value,
        "raw": c1.raw,
        "raw_pullback": c1_pb.raw,
        "mesh_level": mesh_level,
    }


# ---------------------------------------------------------------------------
# Torus line bundles


@dataclass
class TorusCriterionResult:
    a: np.ndarray
    b: np.ndarray
    fast_verdict: bool
    oracle_verdict: bool

    @property
    def liftable(self):
        return self.fast_verdict


def _check_bits(b):
    b = np.asarray(b, dtype=np.int64)
    if b.ndim != 1 or not np.all((b == 0) | (b == 1)) or not np.any(b):
        raise BadParams("b must be a nonzero 0/1 vector")
    return b


def subgroup_generators(b):
    """Generators of the index-2 subgroup {x : b.x even} of Z^n: e_i for
    the zero bits, one doubled basis vector for the first set bit, and the
    pairwise sums of set-bit basis vectors."""
    b = _check_bits(b)
    n = b.shape[0]
    eye = np.eye(n, dtype=np.int64)
    ones = [i for i in range(n) if b[i] == 1]
    gens = [eye[i] for i in range(n) if b[i] == 0]
    gens.append(2 * eye[ones[0]])
    for i in range(len(ones)):
        for j in range(i + 1, len(ones)):
            gens.append(eye[ones[i]] + eye[ones[j]])
    return gens


def torus_criterion(a, b):
    """Does the torus automorphism x -> Ax lift to the line bundle L_b?

    The fast mod-2 verdict (b^T A = b^T mod 2) is always cross-checked
    against the brute-force subgroup oracle A(S_b) <= S_b on generators;
    a mismatch is a hard internal error.
    """
    b = _check_bits(b)
    a = np.asarray(a)
    if a.shape != (b.shape[0], b.shape[0]):
        raise BadParams(f"A must be {b.shape[0]}x{b.shape[0]}, got {a.shape}")
    integer_inverse(a)  # validates integrality and |det| = 1
    a = a.astype(np.int64)
    fast = bool(np.all(np.mod(b @ a - b, 2) == 0))
    oracle = all(int(b @ (a @ g)) % 2 == 0 for g in subgroup_generators(b))
    if fast != oracle:
        raise AssertionError(
            f"criterion mismatch for A={a.tolist()}, b={b.tolist()}: "
            f"fast={fast}, oracle={oracle}"
        )
    return TorusCriterionResult(a=a, b=b, fast_verdict=fast, oracle_verdict=oracle)


def w1_profile(b, n=None, steps=DEFAULT_TRANSPORT_STEPS):
    """Holonomy signs of L_b around the n coordinate loops of the torus
    (the first Stiefel-Whitney class evaluated on the standard 1-cycles)."""
    b = _check_bits(b)
    if n is None:
        n = b.shape[0]
    if n != b.shape[0]:
        raise BadParams("n must match len(b)")
    if n > 4:
        raise BadParams("w1_profile supports n <= 4")
    bundle = torus_line(b)
    signs = []
    for i in range(n):
        direction = np.zeros(n)
        direction[i] = 1.0
        loop = lambda t, d=direction: t * d
        signs.append(holonomy_sign(bundle, loop, steps=steps))
    return np.array(signs, dtype=np.int64)
