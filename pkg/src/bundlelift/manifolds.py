"""Concrete manifold models, named diffeomorphisms, homotopies and sphere
map degrees.

Point representations by model:

* ``Sphere(n)`` -- unit vector in R^{n+1}
* ``Torus(n)`` -- coordinates reduced to [0,1)^n
* ``GrassmannReal(k,n)`` -- symmetric rank-k projector matrix (n x n)
* ``ComplexProjective(n)`` -- Hermitian rank-1 projector ((n+1) x (n+1),
  complex). Homogeneous coordinate vectors are a convenience view.
* ``Product(left, right)`` -- tuple of factor points
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BadParams, BadPlane, NonConvergent, UnknownName

__all__ = [
    "ManifoldModel",
    "Sphere",
    "Torus",
    "GrassmannReal",
    "ComplexProjective",
    "Product",
    "SmoothMap",
    "Diffeo",
    "Homotopy",
    "random_point",
    "named_diffeo",
    "product_diffeo",
    "identity_diffeo",
    "rotation_homotopy",
    "cpn_phase_homotopy",
    "cp1_plane_rotation_homotopy",
    "sphere_to_cp1",
    "cp1_to_sphere",
    "cp1_power_map",
    "sphere_power_map",
    "icosphere",
    "degree",
    "random_orthogonal",
    "random_unimodular",
]


# ---------------------------------------------------------------------------
# Models


@dataclass(frozen=True)
class ManifoldModel:
    def membership_residual(self, point):
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    def copy_point(self, point):
        return np.array(point)


@dataclass(frozen=True)
class Sphere(ManifoldModel):
    n: int

    @property
    def ambient_dim(self):
        return self.n + 1

    @property
    def intrinsic_dim(self):
        return self.n

    def membership_residual(self, point):
        return abs(float(np.linalg.norm(point)) - 1.0)

    def distance(self, a, b):
        return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))

    def random_point(self, rng):
        v = rng.normal(size=self.n + 1)
        return v / np.linalg.norm(v)

    def retract(self, raw):
        raw = np.asarray(raw, dtype=float)
        return raw / np.linalg.norm(raw)


@dataclass(frozen=True)
class Torus(ManifoldModel):
    n: int

    @property
    def ambient_dim(self):
        return self.n

    @property
    def intrinsic_dim(self):
        return self.n

    def membership_residual(self, point):
        point = np.asarray(point, dtype=float)
        return float(np.linalg.norm(point - np.mod(point, 1.0)))

    def distance(self, a, b):
        d = np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5
        return float(np.linalg.norm(d))

    def random_point(self, rng):
        return rng.uniform(0.0, 1.0, size=self.n)

    def retract(self, raw):
        return np.mod(np.asarray(raw, dtype=float), 1.0)


def _projector_residual(p, trace_target):
    p = np.asarray(p)
    idem = float(np.max(np.abs(p @ p - p)))
    herm = float(np.max(np.abs(p - p.conj().T)))
    tr = abs(complex(np.trace(p)).real - trace_target) + abs(complex(np.trace(p)).imag)
    return max(idem, herm, tr)


@dataclass(frozen=True)
class GrassmannReal(ManifoldModel):
    k: int
    n: int

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise BadParams(f"need 0 < k < n, got k={self.k}, n={self.n}")

    @property
    def ambient_dim(self):
        return self.n * self.n

    @property
    def intrinsic_dim(self):
        return self.k * (self.n - self.k)

    def membership_residual(self, point):
        return _projector_residual(point, self.k)

    def distance(self, a, b):
        return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))

    def random_point(self, rng):
        a = rng.normal(size=(self.n, self.k))
        q, _ = np.linalg.qr(a)
        return q @ q.T

    def retract(self, raw):
        from .numkernel import sym_eigh

        w, v = sym_eigh(0.5 * (raw + raw.T))
        cols = v[:, -self.k:]
        return cols @ cols.T


@dataclass(frozen=True)
class ComplexProjective(ManifoldModel):
    n: int

    @property
    def ambient_dim(self):
        # realified matrix entries
        return 2 * (self.n + 1) ** 2

    @property
    def intrinsic_dim(self):
        return 2 * self.n

    def membership_residual(self, point):
        return _projector_residual(point, 1.0)

    def distance(self, a, b):
        return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))

    def random_point(self, rng):
        z = rng.normal(size=self.n + 1) + 1j * rng.normal(size=self.n + 1)
        z = z / np.linalg.norm(z)
        return np.outer(z, z.conj())

    def retract(self, raw):
        h = 0.5 * (raw + raw.conj().T)
        _, v = np.linalg.eigh(h)
        z = v[:, -1]
        return np.outer(z, z.conj())


@dataclass(frozen=True)
class Product(ManifoldModel):
    left: ManifoldModel
    right: ManifoldModel

    @property
    def ambient_dim(self):
        return self.left.ambient_dim + self.right.ambient_dim

    @property
    def intrinsic_dim(self):
        return self.left.intrinsic_dim + self.right.intrinsic_dim

    def membership_residual(self, point):
        a, b = point
        return max(self.left.membership_residual(a), self.right.membership_residual(b))

    def distance(self, a, b):
        return max(self.left.distance(a[0], b[0]), self.right.distance(a[1], b[1]))

    def random_point(self, rng):
        return (self.left.random_point(rng), self.right.random_point(rng))

    def retract(self, raw):
        return (self.left.retract(raw[0]), self.right.retract(raw[1]))

    def copy_point(self, point):
        return (self.left.copy_point(point[0]), self.right.copy_point(point[1]))


def random_point(model, seed):
    """Deterministic membership-valid point for the given seed."""
    return model.random_point(np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# Maps, diffeomorphisms, homotopies


class SmoothMap:
    """A smooth map between models, given by an explicit point formula."""

    def __init__(self, name, forward, source, target):
        self.name = name
        self.forward = forward
        self.source = source
        self.target = target

    def __call__(self, point):
        return self.forward(point)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Diffeo(SmoothMap):
    """Invertible smooth self-map with an exact inverse formula."""

    def __init__(self, name, forward, inverse, source, target=None):
        super().__init__(name, forward, source, target or source)
        self.inverse = inverse

    def inverted(self):
        return Diffeo(f"{self.name}^-1", self.inverse, self.forward,
                      self.target, self.source)

    def then(self, other):
        """Composite other . self (apply self first)."""
        return Diffeo(
            f"{other.name}.{self.name}",
            lambda x: other.forward(self.forward(x)),
            lambda x: self.inverse(other.inverse(x)),
            self.source,
            other.target,
        )


class Homotopy:
    """One-parameter family family(t, x) with family(0, .) = id.

    ``velocity(t, x)``, when provided, returns the exact time derivative of
    the family at (t, x) in point coordinates; transport can use it instead
    of finite differences.
    """

    def __init__(self, name, family, endpoint, source, velocity=None):
        self.name = name
        self.family = family
        self.endpoint = endpoint
        self.source = source
        self.velocity = velocity

    def __call__(self, t, point):
        return self.family(t, point)


def identity_diffeo(model):
    return Diffeo("identity", lambda x: model.copy_point(x),
                  lambda x: model.copy_point(x), model)


def product_diffeo(model, left, right, name=None):
    """Componentwise diffeomorphism of a product model."""
    if not isinstance(model, Product):
        raise BadParams("product_diffeo needs a Product model")
    return Diffeo(
        name or f"{left.name}x{right.name}",
        lambda p: (left.forward(p[0]), right.forward(p[1])),
        lambda p: (left.inverse(p[0]), right.inverse(p[1])),
        model,
    )


def _check_orthogonal(a, n):
    a = np.asarray(a, dtype=float)
    if a.shape != (n, n):
        raise BadParams(f"expected a {n}x{n} matrix, got {a.shape}")
    defect = np.max(np.abs(a @ a.T - np.eye(n)))
    if defect > 1e-10:
        raise BadParams(f"matrix is not orthogonal (defect {defect:.3e})")
    return a


def _check_unitary(u, n):
    u = np.asarray(u, dtype=complex)
    if u.shape != (n, n):
        raise BadParams(f"expected a {n}x{n} matrix, got {u.shape}")
    defect = np.max(np.abs(u @ u.conj().T - np.eye(n)))
    if defect > 1e-10:
        raise BadParams(f"matrix is not unitary (defect {defect:.3e})")
    return u


def integer_inverse(a):
    """Exact inverse of an integer matrix with |det| = 1."""
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.integer):
        raise BadParams("expected an integer matrix")
    det = int(round(float(np.linalg.det(a.astype(float)))))
    if abs(det) != 1:
        raise BadParams(f"matrix is not unimodular (det {det})")
    inv = np.rint(np.linalg.inv(a.astype(float))).astype(np.int64)
    if not np.array_equal(a @ inv, np.eye(a.shape[0], dtype=np.int64)):
        raise BadParams("integer inverse reconstruction failed")
    return inv


def _build_sphere_rotation(model, params):
    a = _check_orthogonal(params["matrix"], model.n + 1)
    return Diffeo("sphere_rotation", lambda x: a @ x, lambda x: a.T @ x, model)


def _build_sphere_reflection(model, params):
    axis = int(params.get("axis", 1))
    if not 0 <= axis <= model.n:
        raise BadParams(f"axis {axis} out of range for S^{model.n}")
    d = np.ones(model.n + 1)
    d[axis] = -1.0

    def refl(x):
        return d * x

    return Diffeo(f"sphere_reflection[{axis}]", refl, refl, model)


def _build_sphere_antipodal(model, params):
    return Diffeo("antipodal", lambda x: -x, lambda x: -x, model)


def _build_grassmann_action(model, params):
    a = _check_orthogonal(params["matrix"], model.n)
    return Diffeo("grassmann_action", lambda p: a @ p @ a.T,
                  lambda p: a.T @ p @ a, model)


def _build_grassmann_involution(model, params):
    if model.n != 2 * model.k:
        raise BadParams("orthocomplement involution needs n = 2k")
    eye = np.eye(model.n)

    def inv(p):
        return eye - p

    return Diffeo("grassmann_involution", inv, inv, model)


def _build_cpn_conjugation(model, params):
    def conj(p):
        return np.conj(p)

    return Diffeo("cpn_conjugation", conj, conj, model)


def _build_cpn_unitary(model, params):
    u = _check_unitary(params["matrix"], model.n + 1)
    uh = u.conj().T
    return Diffeo("cpn_unitary", lambda p: u @ p @ uh, lambda p: uh @ p @ u, model)


def _build_cp1_antipodal(model, params):
    if model.n != 1:
        raise BadParams("antipodal map is registered for CP^1 only")
    # [w0, w1] -> [-conj(w1), conj(w0)]; on projectors: conjugate then
    # rotate by the standard symplectic matrix.
    j = np.array([[0.0, -1.0], [1.0, 0.0]])

    def anti(p):
        return j @ np.conj(p) @ j.T

    return Diffeo("cp1_antipodal", anti, anti, model)


def _build_torus_auto(model, params):
    a = np.asarray(params["matrix"])
    if a.shape != (model.n, model.n):
        raise BadParams(f"expected {model.n}x{model.n}, got {a.shape}")
    a = a.astype(np.int64)
    ainv = integer_inverse(a)
    af = a.astype(float)
    ainvf = ainv.astype(float)
    return Diffeo("torus_auto", lambda x: np.mod(af @ x, 1.0),
                  lambda x: np.mod(ainvf @ x, 1.0), model)


_DIFFEO_REGISTRY = {
    (Sphere, "sphere_rotation"): _build_sphere_rotation,
    (Sphere, "sphere_reflection"): _build_sphere_reflection,
    (Sphere, "antipodal"): _build_sphere_antipodal,
    (GrassmannReal, "grassmann_action"): _build_grassmann_action,
    (GrassmannReal, "grassmann_involution"): _build_grassmann_involution,
    (ComplexProjective, "cpn_conjugation"): _build_cpn_conjugation,
    (ComplexProjective, "cpn_unitary"): _build_cpn_unitary,
    (ComplexProjective, "cp1_antipodal"): _build_cp1_antipodal,
    (Torus, "torus_auto"): _build_torus_auto,
}


def named_diffeo(model, name, **params):
    """Look up a registered diffeomorphism family on the given model.

    Known names: sphere_rotation, sphere_reflection, antipodal (spheres);
    grassmann_action, grassmann_involution (real Grassmannians);
    cpn_conjugation, cpn_unitary, cp1_antipodal (complex projective);
    torus_auto (tori).
    """
    builder = _DIFFEO_REGISTRY.get((type(model), name))
    if builder is None:
        raise UnknownName(f"no diffeomorphism named {name!r} on {model}")
    diffeo = builder(model, params)
    for s in (3, 17, 40):
        x = random_point(model, s)
        if model.distance(diffeo.inverse(diffeo.forward(x)), x) > 1e-8:
            raise BadParams(f"{name}: inverse round-trip check failed")
    return diffeo


def registered_diffeo_names():
    return sorted({name for _, name in _DIFFEO_REGISTRY})


# ---------------------------------------------------------------------------
# Homotopies


def rotation_homotopy(model, plane, angle):
    """Family of rotations by t*angle in a coordinate plane of the ambient
    space of a sphere; at t=0 the identity."""
    if not isinstance(model, Sphere):
        raise BadPlane("rotation_homotopy is defined on spheres")
    i, j = plane
    dim = model.n + 1
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise BadPlane(f"invalid plane {plane} for ambient dimension {dim}")
    gen = np.zeros((dim, dim))
    gen[i, j] = -1.0
    gen[j, i] = 1.0

    def rot(alpha):
        r = np.eye(dim)
        c, s = math.cos(alpha), math.sin(alpha)
        r[i, i] = c
        r[j, j] = c
        r[i, j] = -s
        r[j, i] = s
        return r

    endpoint = Diffeo("sphere_rotation", lambda x: rot(angle) @ x,
                      lambda x: rot(-angle) @ x, model)

    def family(t, x):
        return rot(t * angle) @ x

    def velocity(t, x):
        return angle * (gen @ family(t, x))

    return Homotopy(f"rotation[{i},{j};{angle:g}]", family, endpoint, model,
                    velocity=velocity)


def _unitary_family_homotopy(model, x_gen, name):
    """Homotopy P(t) = U(t) P U(t)^* with U(t) = exp(t X), X anti-Hermitian."""
    dim = model.n + 1
    x_gen = np.asarray(x_gen, dtype=complex)
    herm = -1j * x_gen
    if np.max(np.abs(herm - herm.conj().T)) > 1e-12:
        raise BadParams("generator must be anti-Hermitian")
    w, v = np.linalg.eigh(herm)
    vh = v.conj().T

    def unitary(t):
        return (v * np.exp(1j * t * w)) @ vh

    u1 = unitary(1.0)
    endpoint = Diffeo("cpn_unitary", lambda p: u1 @ p @ u1.conj().T,
                      lambda p: u1.conj().T @ p @ u1, model)

    def family(t, p):
        u = unitary(t)
        return u @ p @ u.conj().T

    def velocity(t, p):
        pt = family(t, p)
        return x_gen @ pt - pt @ x_gen

    return Homotopy(name, family, endpoint, model, velocity=velocity)


def cpn_phase_homotopy(model, angle, slot=0):
    """Rotation of CP^n induced by diag(..., e^{i t angle} at slot, ...)."""
    if not isinstance(model, ComplexProjective):
        raise BadParams("cpn_phase_homotopy is defined on CP^n")
    if not 0 <= slot <= model.n:
        raise BadParams(f"slot {slot} out of range")
    gen = np.zeros((model.n + 1, model.n + 1), dtype=complex)
    gen[slot, slot] = 1j * angle
    return _unitary_family_homotopy(model, gen, f"cpn_phase[{slot};{angle:g}]")


def cp1_plane_rotation_homotopy(model, angle):
    """Rotation of CP^1 covering the sphere rotation about the x2-axis.

    The endpoint at angle pi is the Moebius map z -> -1/z, which composed
    with conjugation gives the antipodal map.
    """
    if not isinstance(model, ComplexProjective) or model.n != 1:
        raise BadParams("cp1_plane_rotation_homotopy is defined on CP^1")
    gen = 0.5 * angle * np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
    return _unitary_family_homotopy(model, gen, f"cp1_plane_rotation[{angle:g}]")


def constant_homotopy(model):
    ident = identity_diffeo(model)
    return Homotopy("constant", lambda t, x: model.copy_point(x), ident, model,
                    velocity=None)


# ---------------------------------------------------------------------------
# The sphere <-> CP^1 identification and the power maps f_n


def sphere_to_cp1(x):
    """Inverse stereographic identification; north pole (0,0,1) -> [1,0]."""
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    if x3 >= 0.0:
        w = np.array([1.0 + x3, x1 - 1j * x2])
    else:
        w = np.array([x1 + 1j * x2, 1.0 - x3])
    w = w / np.linalg.norm(w)
    return np.outer(w, w.conj())


def cp1_to_sphere(p):
    return np.array([2.0 * p[0, 1].real, 2.0 * p[0, 1].imag,
                     p[0, 0].real - p[1, 1].real])


def cpn_homogeneous(p, canonical=False):
    """A unit homogeneous-coordinate vector spanning the image of p.

    With ``canonical=True`` the first sizable coordinate is made real
    positive.
    """
    p = np.asarray(p)
    norms = np.linalg.norm(p, axis=0)
    w = p[:, int(np.argmax(norms))]
    w = w / np.linalg.norm(w)
    if canonical:
        idx = int(np.nonzero(np.abs(w) > 1e-8)[0][0])
        w = w * (np.conj(w[idx]) / abs(w[idx]))
    return w


def cp1_power_map(n):
    """The degree-n self map [w0, w1] -> [w0^n, w1^n] of CP^1."""
    if n < 1:
        raise BadParams("power must be >= 1")
    model = ComplexProjective(1)

    def fwd(p):
        w = cpn_homogeneous(p)
        v = np.array([w[0] ** n, w[1] ** n])
        v = v / np.linalg.norm(v)
        return np.outer(v, v.conj())

    return SmoothMap(f"cp1_power[{n}]", fwd, model, model)


def sphere_power_map(n):
    """cp1_power_map conjugated onto S^2 through the stereographic chart."""
    f = cp1_power_map(n)
    model = Sphere(2)

    def fwd(x):
        return cp1_to_sphere(f.forward(sphere_to_cp1(x)))

    return SmoothMap(f"sphere_power[{n}]", fwd, model, model)


# ---------------------------------------------------------------------------
# Icosphere meshes and mapping degree


@functools.lru_cache(maxsize=None)
def icosphere(level):
    """Subdivided icosahedron: (vertices (nv,3), triangles (nt,3)).

    Triangles are oriented outward (positive triple product); vertex and
    triangle order are deterministic.
    """
    if level < 0:
        raise BadParams("subdivision level must be >= 0")
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in raw]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    faces = [
        f if np.linalg.det(np.stack([verts[f[0]], verts[f[1]], verts[f[2]]])) > 0
        else (f[0], f[2], f[1])
        for f in faces
    ]
    for _ in range(level):
        midpoint = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    verts_arr = np.array(verts)
    faces_arr = np.array(faces, dtype=np.int64)
    # cached and shared: guard against accidental mutation
    verts_arr.setflags(write=False)
    faces_arr.setflags(write=False)
    return verts_arr, faces_arr


def _degree_raw(f, level):
    verts, tris = icosphere(level)
    fwd = f.forward if isinstance(f, SmoothMap) else f
    img = np.empty_like(verts)
    for i in range(verts.shape[0]):
        img[i] = fwd(verts[i])
    img = img / np.linalg.norm(img, axis=1, keepdims=True)
    angles = _kernels.solid_angles(img, np.ascontiguousarray(tris))
    return float(np.sum(angles)) / (4.0 * math.pi)


def degree(f, mesh_level):
    """Degree of a smooth self-map of S^2 via the pulled-back area form.

    Sums signed solid angles of image triangles over an icosphere mesh;
    the identity has degree +1. Retries one level finer before declaring
    non-convergence.
    """
    if mesh_level < 3:
        raise BadParams("mesh_level must be >= 3")
    raw = _degree_raw(f, mesh_level)
    if abs(raw - round(raw)) <= 0.1:
        return int(round(raw))
    raw2 = _degree_raw(f, mesh_level + 1)
    if abs(raw2 - round(raw2)) <= 0.1:
        return int(round(raw2))
    raise NonConvergent(
        f"degree estimate not near an integer at levels {mesh_level} "
        f"({raw:.4f}) and {mesh_level + 1} ({raw2:.4f})"
    )


# ---------------------------------------------------------------------------
# Seeded parameter generators


def random_orthogonal(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def random_unimodular(n, seed, max_ops=8):
    """Product of at most ``max_ops`` elementary integer matrices (row
    additions and swaps), so |det| = 1 holds exactly in integer arithmetic."""
    rng = np.random.default_rng(seed)
    a = np.eye(n, dtype=np.int64)
    n_ops = int(rng.integers(1, max_ops + 1))
    for _ in range(n_ops):
        if n == 1:
            break
        kind = rng.integers(0, 2)
        i, j = rng.choice(n, size=2, replace=False)
        if kind == 0:
            coeff = int(rng.choice([-2, -1, 1, 2]))
            a[i] = a[i] + coeff * a[j]
        else:
            a[[i, j]] = a[[j, i]]
    return a
