"""Vector bundles presented as fiber-projector fields, parallel transport
for the projection connection, and loop holonomy.

Every bundle fixes an ambient fiber space R^N and a smooth field of
orthogonal projectors Q(x); the fiber over x is the image of Q(x) and the
metric is the restricted Euclidean product. Complex bundles store their
Hermitian projector field and expose the realified picture (C^m as R^{2m},
J the realified multiplication by i restricted to the fiber).

Transport integrates chi'(t) = Q'(t) chi(t) with classical RK4 and
re-projects after every step; Q' comes from central differences on the
path parameter unless both the path and the bundle provide exact
derivatives.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import DEFAULT_TOLERANCES as TOL
from .config import DEFAULT_TRANSPORT_STEPS
from .errors import Ambiguous, BadParams, NotInFiber
from .manifolds import (ComplexProjective, GrassmannReal, Product, Sphere,
                        Torus)
from .numkernel import realify, standard_complex_structure, sym_eigh

__all__ = [
    "BundleModel",
    "FiberVector",
    "Path",
    "homotopy_path",
    "tautological_real",
    "tautological_complex",
    "pullback",
    "torus_line",
    "tangent_sphere",
    "trivial",
    "complement",
    "direct_sum",
    "transport",
    "transport_operator",
    "holonomy_sign",
]


def _point_key(point):
    if isinstance(point, tuple):
        return tuple(_point_key(p) for p in point)
    return np.asarray(point).tobytes()


class BundleModel:
    """A vector bundle as a projector field on a fixed ambient fiber space."""

    def __init__(self, key, base, ambient_fiber_dim, real_rank, fiber_projector,
                 complex_projector=None, projector_differential=None):
        self.key = key
        self.base = base
        self.ambient_fiber_dim = ambient_fiber_dim
        self.real_rank = real_rank
        self._fiber_projector = fiber_projector
        self._complex_projector = complex_projector
        self.projector_differential = projector_differential
        if complex_projector is not None:
            self._j_std = standard_complex_structure(ambient_fiber_dim // 2)
        else:
            self._j_std = None
        self._basis_cache = {}

    def __repr__(self):
        return f"<BundleModel {self.key}>"

    def __eq__(self, other):
        return isinstance(other, BundleModel) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def has_complex_structure(self):
        return self._complex_projector is not None

    def fiber_projector(self, x):
        return self._fiber_projector(x)

    def complex_fiber_projector(self, x):
        if self._complex_projector is None:
            raise BadParams(f"bundle {self.key} has no complex structure")
        return self._complex_projector(x)

    def complex_structure(self, x):
        """J(x): realified multiplication by i restricted to the fiber;
        satisfies J Q = Q J and J^2 = -Q."""
        if self._j_std is None:
            return None
        q = self.fiber_projector(x)
        return q @ self._j_std @ q

    def fiber_basis(self, x):
        """Orthonormal basis of the fiber over x as columns of an (N, r)
        matrix; deterministic, cached per point."""
        key = _point_key(x)
        cached = self._basis_cache.get(key)
        if cached is not None:
            return cached
        q = self.fiber_projector(x)
        w, v = sym_eigh(q)
        cols = v[:, w > 0.5]
        if cols.shape[1] != self.real_rank:
            raise BadParams(
                f"projector rank {cols.shape[1]} != bundle rank {self.real_rank}"
            )
        if len(self._basis_cache) > 4096:
            self._basis_cache.clear()
        self._basis_cache[key] = cols
        return cols

    def random_fiber_vector(self, x, rng, unit=True):
        q = self.fiber_projector(x)
        for _ in range(8):
            v = q @ rng.normal(size=self.ambient_fiber_dim)
            nrm = np.linalg.norm(v)
            if nrm > 1e-6:
                return v / nrm if unit else v
        raise BadParams("could not sample a fiber vector (degenerate projector?)")

    def membership_residual(self, x, v):
        q = self.fiber_projector(x)
        return float(np.linalg.norm(q @ v - v))


@dataclass
class FiberVector:
    base_point: object
    ambient: np.ndarray


# ---------------------------------------------------------------------------
# Concrete constructors


def tautological_real(k, n):
    """gamma^k(R^n) over the Grassmannian of k-planes: the fiber over a
    projector point P is the image of P, so Q(P) = P."""
    base = GrassmannReal(k, n)
    return BundleModel(
        key=("tautological_real", k, n),
        base=base,
        ambient_fiber_dim=n,
        real_rank=k,
        fiber_projector=lambda p: np.asarray(p, dtype=float),
        projector_differential=lambda p, pdot: np.asarray(pdot, dtype=float),
    )


def tautological_complex(n):
    """gamma^1(C^{n+1}) over CP^n, realified."""
    base = ComplexProjective(n)
    return BundleModel(
        key=("tautological_complex", n),
        base=base,
        ambient_fiber_dim=2 * (n + 1),
        real_rank=2,
        fiber_projector=lambda p: realify(p),
        complex_projector=lambda p: np.asarray(p, dtype=complex),
        projector_differential=lambda p, pdot: realify(pdot),
    )


def pullback(f, w):
    """Pullback bundle f^* W with fibers Q(x) = Q_W(f(x))."""
    if f.target != w.base:
        raise BadParams(f"map target {f.target} does not match bundle base {w.base}")
    cproj = None
    if w.has_complex_structure:
        cproj = lambda x: w.complex_fiber_projector(f.forward(x))
    return BundleModel(
        key=("pullback", f.name, w.key),
        base=f.source,
        ambient_fiber_dim=w.ambient_fiber_dim,
        real_rank=w.real_rank,
        fiber_projector=lambda x: w.fiber_projector(f.forward(x)),
        complex_projector=cproj,
    )


def torus_line(b):
    """The real line bundle L_b over the torus, embedded in a trivial R^2:
    Q(x) = u u^T with u(x) = (cos(pi b.x), sin(pi b.x)).

    Changing x by an integer vector m flips u by (-1)^{b.m}, so Q is
    well defined on the torus.
    """
    b = np.asarray(b, dtype=np.int64)
    if b.ndim != 1 or not np.all((b == 0) | (b == 1)) or not np.any(b):
        raise BadParams("b must be a nonzero 0/1 vector")
    n = b.shape[0]
    bf = b.astype(float)

    def u_of(x):
        phase = np.pi * float(bf @ np.asarray(x, dtype=float))
        return np.array([np.cos(phase), np.sin(phase)])

    def q_of(x):
        u = u_of(x)
        return np.outer(u, u)

    def q_diff(x, xdot):
        phase = np.pi * float(bf @ np.asarray(x, dtype=float))
        u = np.array([np.cos(phase), np.sin(phase)])
        du = np.pi * float(bf @ np.asarray(xdot, dtype=float)) * np.array([-u[1], u[0]])
        return np.outer(du, u) + np.outer(u, du)

    model = BundleModel(
        key=("torus_line", tuple(int(v) for v in b)),
        base=Torus(n),
        ambient_fiber_dim=2,
        real_rank=1,
        fiber_projector=q_of,
        projector_differential=q_diff,
    )
    model.unit_section = u_of
    model.bits = b
    return model


def tangent_sphere(n):
    """TS^n embedded in R^{n+1}: Q(x) = I - x x^T."""
    eye = np.eye(n + 1)
    return BundleModel(
        key=("tangent_sphere", n),
        base=Sphere(n),
        ambient_fiber_dim=n + 1,
        real_rank=n,
        fiber_projector=lambda x: eye - np.outer(x, x),
        projector_differential=lambda x, xdot: -(np.outer(xdot, x) + np.outer(x, xdot)),
    )


def trivial(model, rank, complex_fibers=False):
    """The product bundle with constant fiber R^rank (or C^rank realified)."""
    if complex_fibers:
        eye_c = np.eye(rank, dtype=complex)
        eye_r = np.eye(2 * rank)
        return BundleModel(
            key=("trivial_complex", model, rank),
            base=model,
            ambient_fiber_dim=2 * rank,
            real_rank=2 * rank,
            fiber_projector=lambda x: eye_r.copy(),
            complex_projector=lambda x: eye_c.copy(),
            projector_differential=lambda x, xdot: np.zeros((2 * rank, 2 * rank)),
        )
    eye = np.eye(rank)
    return BundleModel(
        key=("trivial", model, rank),
        base=model,
        ambient_fiber_dim=rank,
        real_rank=rank,
        fiber_projector=lambda x: eye.copy(),
        projector_differential=lambda x, xdot: np.zeros((rank, rank)),
    )


def complement(w):
    """Orthogonal complement of W inside its ambient trivial bundle."""
    n = w.ambient_fiber_dim
    eye = np.eye(n)
    cproj = None
    if w.has_complex_structure:
        eye_c = np.eye(n // 2, dtype=complex)
        cproj = lambda x: eye_c - w.complex_fiber_projector(x)
    pdiff = None
    if w.projector_differential is not None:
        pdiff = lambda x, xdot: -w.projector_differential(x, xdot)
    return BundleModel(
        key=("complement", w.key),
        base=w.base,
        ambient_fiber_dim=n,
        real_rank=n - w.real_rank,
        fiber_projector=lambda x: eye - w.fiber_projector(x),
        complex_projector=cproj,
        projector_differential=pdiff,
    )


def direct_sum(v1, v2):
    """External direct sum over the product base: the fiber over (x1, x2)
    is fiber_1(x1) + fiber_2(x2), block diagonal in the ambient space."""
    base = Product(v1.base, v2.base)
    n1, n2 = v1.ambient_fiber_dim, v2.ambient_fiber_dim

    def q_of(p):
        x1, x2 = p
        out = np.zeros((n1 + n2, n1 + n2))
        out[:n1, :n1] = v1.fiber_projector(x1)
        out[n1:, n1:] = v2.fiber_projector(x2)
        return out

    cproj = None
    if v1.has_complex_structure and v2.has_complex_structure:
        c1, c2 = n1 // 2, n2 // 2

        def cproj(p):
            x1, x2 = p
            out = np.zeros((c1 + c2, c1 + c2), dtype=complex)
            out[:c1, :c1] = v1.complex_fiber_projector(x1)
            out[c1:, c1:] = v2.complex_fiber_projector(x2)
            return out

    return BundleModel(
        key=("direct_sum", v1.key, v2.key),
        base=base,
        ambient_fiber_dim=n1 + n2,
        real_rank=v1.real_rank + v2.real_rank,
        fiber_projector=q_of,
        complex_projector=cproj,
    )


# ---------------------------------------------------------------------------
# Parallel transport


class Path:
    """Curve [0,1] -> base, optionally carrying an exact velocity."""

    def __init__(self, fn, velocity=None, name="path"):
        self.fn = fn
        self.velocity = velocity
        self.name = name

    def __call__(self, t):
        return self.fn(t)


def homotopy_path(homotopy, x):
    """The track t -> family(t, x) of a point under a homotopy."""
    vel = None
    if homotopy.velocity is not None:
        vel = lambda t: homotopy.velocity(t, x)
    return Path(lambda t: homotopy.family(t, x), velocity=vel,
                name=f"{homotopy.name}@point")


def _as_path(path):
    return path if isinstance(path, Path) else Path(path)


def _stage_arrays(bundle, path, steps, derivative):
    """Projector derivatives at the 2*steps+1 RK4 stage times and the
    projectors at the steps+1 nodes."""
    n = bundle.ambient_fiber_dim
    h = 1.0 / steps
    n_stage = 2 * steps + 1
    use_exact = derivative == "exact" or (
        derivative == "auto"
        and path.velocity is not None
        and bundle.projector_differential is not None
    )
    if use_exact and (path.velocity is None or bundle.projector_differential is None):
        raise BadParams("exact derivative requested but not available")
    qp = np.empty((n_stage, n, n))
    if use_exact:
        for j in range(n_stage):
            t = 0.5 * h * j
            qp[j] = bundle.projector_differential(path(t), path.velocity(t))
    else:
        delta = TOL.fd_delta
        for j in range(n_stage):
            t = 0.5 * h * j
            qp[j] = (bundle.fiber_projector(path(t + delta))
                     - bundle.fiber_projector(path(t - delta))) / (2.0 * delta)
    qnode = np.empty((steps + 1, n, n))
    for i in range(steps + 1):
        qnode[i] = bundle.fiber_projector(path(i * h))
    return qp, qnode


def transport(bundle, path, v0, steps=DEFAULT_TRANSPORT_STEPS, derivative="fd"):
    """Parallel transport of a fiber vector along a path.

    ``derivative`` selects how Q' is obtained: "fd" (central differences,
    the default), "exact" (requires path velocity and the bundle's
    projector differential) or "auto".
    """
    if steps < 16:
        raise BadParams("transport needs at least 16 steps")
    path = _as_path(path)
    if isinstance(v0, FiberVector):
        vec = np.asarray(v0.ambient, dtype=float)
    else:
        vec = np.asarray(v0, dtype=float)
    x0 = path(0.0)
    if bundle.membership_residual(x0, vec) > 1e-8:
        raise NotInFiber(
            f"start vector is not in the fiber (residual "
            f"{bundle.membership_residual(x0, vec):.3e})"
        )
    qp, qnode = _stage_arrays(bundle, path, steps, derivative)
    out = _kernels.rk4_transport(qp, qnode, np.ascontiguousarray(vec.reshape(-1, 1)))
    return FiberVector(base_point=path(1.0), ambient=out[:, 0])


def transport_operator(bundle, path, steps=DEFAULT_TRANSPORT_STEPS,
                       derivative="fd"):
    """The full transport map fiber(path(0)) -> fiber(path(1)) as an
    ambient matrix (the orthogonal complement of the fiber is killed)."""
    if steps < 16:
        raise BadParams("transport needs at least 16 steps")
    path = _as_path(path)
    qp, qnode = _stage_arrays(bundle, path, steps, derivative)
    x0 = np.ascontiguousarray(qnode[0])
    return _kernels.rk4_transport(qp, qnode, x0)


def holonomy_sign(line_bundle, loop, steps=DEFAULT_TRANSPORT_STEPS,
                  derivative="fd"):
    """Orientation sign picked up by a real line bundle around a closed loop."""
    if line_bundle.real_rank != 1:
        raise BadParams("holonomy_sign needs a real line bundle (rank 1)")
    loop = _as_path(loop)
    gap = line_bundle.base.distance(loop(0.0), loop(1.0))
    if gap > 1e-10:
        raise BadParams(f"loop is not closed (gap {gap:.3e})")
    v0 = line_bundle.fiber_basis(loop(0.0))[:, 0]
    out = transport(line_bundle, loop, v0, steps=steps, derivative=derivative)
    v1 = out.ambient / np.linalg.norm(out.ambient)
    inner = float(v1 @ v0)
    if abs(inner) <= 0.9:
        raise Ambiguous(
            f"|<chi(1), v0>| = {abs(inner):.3f} <= 0.9; increase steps"
        )
    return 1 if inner > 0 else -1
