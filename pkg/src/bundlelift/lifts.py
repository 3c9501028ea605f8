"""Bundle automorphisms covering base diffeomorphisms: the Lift model,
the universal checker, constructors, polar metrization, frame views and
complex-linearity tooling.

A Lift is a closure pair (base diffeomorphism, fiberwise action); fiber
matrices are extracted on demand by probing an orthonormal fiber basis.
Formula-backed lifts carry the ``exact`` tolerance, transport-derived ones
the looser ``transport`` tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from .bundles import (FiberVector, direct_sum, homotopy_path, pullback,
                      tangent_sphere, tautological_complex, tautological_real,
                      torus_line, transport_operator)
from .config import DEFAULT_SAMPLES, DEFAULT_TOLERANCES as TOL
from .config import DEFAULT_TRANSPORT_STEPS
from .errors import (BadParams, BundleMismatch, CriterionFails,
                     DegenerateJacobian, NoComplexStructure, NonInjective,
                     NotIsometric, NotOrthonormal, Singular)
from .manifolds import (Diffeo, Sphere, cp1_plane_rotation_homotopy,
                        cp1_power_map, identity_diffeo, named_diffeo,
                        product_diffeo, random_point)
from .numkernel import (complex_structure_conjugator, polar_two_metric,
                        singular_values, sym_eigh)

__all__ = [
    "Lift",
    "LiftReport",
    "FiberFrame",
    "check_lift",
    "compose",
    "invert",
    "identity_lift",
    "lift_from_homotopy",
    "metrize",
    "differential_lift",
    "ambient_projection_lift",
    "grassmann_orthogonal_lift",
    "cpn_conjugation_lift",
    "pullback_conjugation_lift",
    "torus_line_lift",
    "s1xs2_generator_lift",
    "frame_lift_view",
    "complex_linearity_defect",
    "fiberwise_complex_correction",
]


class Lift:
    """A lift of a base diffeomorphism to a bundle automorphism."""

    def __init__(self, bundle, base_map, action, provenance, tolerance):
        self.bundle = bundle
        self.base_map = base_map
        self._action = action
        self.provenance = provenance
        self.tolerance = tolerance

    def __repr__(self):
        return f"<Lift {self.provenance} over {self.bundle.key}>"

    def action(self, x, v):
        """Apply the fiber map at x to an ambient fiber vector."""
        return self._action(x, np.asarray(v, dtype=float))

    def apply(self, fv):
        w = self.action(fv.base_point, fv.ambient)
        return FiberVector(self.base_map.forward(fv.base_point), w)

    def fiber_matrix(self, x):
        """Ambient matrix of the fiber map at x (zero on the complement)."""
        basis = self.bundle.fiber_basis(x)
        images = np.column_stack([self.action(x, basis[:, i])
                                  for i in range(basis.shape[1])])
        return images @ basis.T

    def fiber_matrix_between(self, x, b_in, b_out):
        """r x r matrix of the fiber map against explicit orthonormal
        bases of the source and target fibers."""
        images = np.column_stack([self.action(x, b_in[:, i])
                                  for i in range(b_in.shape[1])])
        return b_out.T @ images

    def fiber_matrix_in_bases(self, x):
        """r x r matrix in the cached orthonormal fiber bases at x and
        phi(x). The bases of degenerate eigenspaces are only defined up to
        rotation, so use this for basis-invariant quantities (Gram
        defects, singular values); pass explicit bases otherwise."""
        return self.fiber_matrix_between(
            x, self.bundle.fiber_basis(x),
            self.bundle.fiber_basis(self.base_map.forward(x)))


@dataclass
class LiftReport:
    base_residual: float
    linearity_residual: float
    min_singular_value: float
    isometry_residual: float
    complex_linearity_residual: float | None
    anti_linearity_residual: float | None
    samples: int
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self):
        return (self.verdicts["base"] and self.verdicts["linearity"]
                and self.verdicts["invertibility"])

    def to_dict(self):
        return {
            "base_residual": self.base_residual,
            "linearity_residual": self.linearity_residual,
            "min_singular_value": self.min_singular_value,
            "isometry_residual": self.isometry_residual,
            "complex_linearity_residual": self.complex_linearity_residual,
            "anti_linearity_residual": self.anti_linearity_residual,
            "samples": self.samples,
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
        }


def check_lift(lift, samples=DEFAULT_SAMPLES, seed=0, tolerance=None):
    """Evaluate lift residuals on seeded random (x, v) probes.

    Residuals: base compatibility (declared base point and membership of
    the image in the fiber over phi(x)), fiberwise linearity,
    invertibility (min singular value of the extracted fiber matrix),
    isometry, and, when the bundle is complex, commutation and
    anti-commutation defects against J. Verdict thresholds default to the
    lift's own tolerance tier.
    """
    if samples < 1:
        raise BadParams("samples must be >= 1")
    tol = lift.tolerance if tolerance is None else tolerance
    bundle = lift.bundle
    base = bundle.base
    has_j = bundle.has_complex_structure

    base_res = 0.0
    lin_res = 0.0
    iso_res = 0.0
    min_sv = np.inf
    c_res = 0.0 if has_j else None
    a_res = 0.0 if has_j else None

    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        x = base.random_point(rng)
        v = bundle.random_fiber_vector(x, rng)
        u = bundle.random_fiber_vector(x, rng)
        alpha, beta = rng.normal(size=2)

        y = lift.base_map.forward(x)
        out = lift.apply(FiberVector(x, v))
        w = out.ambient
        q_y = bundle.fiber_projector(y)
        base_res = max(base_res,
                       base.distance(out.base_point, y),
                       float(np.linalg.norm(q_y @ w - w)))

        w_u = lift.action(x, u)
        w_mix = lift.action(x, alpha * u + beta * v)
        lin = np.linalg.norm(w_mix - alpha * w_u - beta * w)
        lin_res = max(lin_res, float(lin) / (abs(alpha) + abs(beta) + 1.0))

        m = lift.fiber_matrix_in_bases(x)
        gram = m.T @ m
        iso_res = max(iso_res, float(np.max(np.abs(gram - np.eye(m.shape[0])))))
        evals, _ = sym_eigh(gram)
        min_sv = min(min_sv, float(np.sqrt(max(evals[0], 0.0))))

        if has_j:
            j_x = bundle.complex_structure(x)
            j_y = bundle.complex_structure(y)
            w_jv = lift.action(x, j_x @ v)
            c_i = float(np.linalg.norm(w_jv - j_y @ w))
            a_i = float(np.linalg.norm(w_jv + j_y @ w))
            # sanity guard on the checker: both defects cannot vanish when
            # the image has nonzero J-component
            if c_i < 1e-12 and a_i < 1e-12 and np.linalg.norm(j_y @ w) > 1e-6:
                raise AssertionError("complex-linearity checker inconsistency")
            c_res = max(c_res, c_i)
            a_res = max(a_res, a_i)

    verdicts = {
        "base": base_res <= tol,
        "linearity": lin_res <= tol,
        "invertibility": min_sv > 1e-8,
        "isometry": iso_res <= tol,
    }
    if has_j:
        verdicts["complex_linear"] = c_res <= tol
        verdicts["anti_linear"] = a_res <= tol
    return LiftReport(
        base_residual=base_res,
        linearity_residual=lin_res,
        min_singular_value=min_sv,
        isometry_residual=iso_res,
        complex_linearity_residual=c_res,
        anti_linearity_residual=a_res,
        samples=samples,
        verdicts=verdicts,
    )


# ---------------------------------------------------------------------------
# Group operations


def identity_lift(bundle):
    return Lift(bundle, identity_diffeo(bundle.base),
                lambda x, v: v.copy(), "identity", TOL.exact)


def compose(outer, inner):
    """outer . inner (apply inner first); bundles must coincide."""
    if outer.bundle != inner.bundle:
        raise BundleMismatch(
            f"cannot compose lifts over {outer.bundle.key} and {inner.bundle.key}"
        )
    base = inner.base_map.then(outer.base_map)

    def action(x, v):
        return outer.action(inner.base_map.forward(x), inner.action(x, v))

    return Lift(outer.bundle, base, action,
                f"compose({outer.provenance},{inner.provenance})",
                max(outer.tolerance, inner.tolerance))


def invert(lift):
    """Inverse automorphism; fiber maps are inverted in orthonormal bases."""
    bundle = lift.bundle
    base = lift.base_map.inverted()
    cache = {}

    def action(x, v):
        key = np.asarray(x).tobytes() if not isinstance(x, tuple) else \
            tuple(np.asarray(p).tobytes() for p in x)
        entry = cache.get(key)
        if entry is None:
            y = base.forward(x)  # phi^{-1}(x)
            b_y = bundle.fiber_basis(y)
            b_x = bundle.fiber_basis(x)
            # b_x must be the basis at the caller's exact x: phi(y) only
            # reproduces x up to roundoff, and a degenerate-eigenspace
            # basis at a perturbed point can be arbitrarily rotated
            m = lift.fiber_matrix_between(y, b_y, b_x)
            sv = singular_values(m)
            if sv[0] <= 1e-8:
                raise Singular(f"fiber map not invertible (sv {sv[0]:.3e})")
            entry = (b_y, np.linalg.inv(m), b_x)
            cache[key] = entry
        b_y, m_inv, b_x = entry
        return b_y @ (m_inv @ (b_x.T @ v))

    return Lift(bundle, base, action, f"invert({lift.provenance})",
                max(lift.tolerance, TOL.pipeline))


# ---------------------------------------------------------------------------
# Constructors


def lift_from_homotopy(bundle, homotopy, steps=DEFAULT_TRANSPORT_STEPS,
                       derivative="fd"):
    """Lift of the homotopy endpoint by parallel transport along the
    tracks t -> family(t, x)."""
    if homotopy.source != bundle.base:
        raise BadParams("homotopy lives on a different model than the bundle")
    cache = {}

    def action(x, v):
        key = np.asarray(x).tobytes() if not isinstance(x, tuple) else \
            tuple(np.asarray(p).tobytes() for p in x)
        op = cache.get(key)
        if op is None:
            op = transport_operator(bundle, homotopy_path(homotopy, x),
                                    steps=steps, derivative=derivative)
            if len(cache) > 2048:
                cache.clear()
            cache[key] = op
        return op @ v

    return Lift(bundle, homotopy.endpoint, action,
                f"homotopy({homotopy.name},steps={steps})", TOL.transport)


def metrize(lift):
    """Replace each fiber map by the isometric factor of its two-metric
    polar decomposition; the base map is unchanged and isometric lifts are
    fixed points."""
    bundle = lift.bundle
    cache = {}

    def action(x, v):
        key = np.asarray(x).tobytes() if not isinstance(x, tuple) else \
            tuple(np.asarray(p).tobytes() for p in x)
        entry = cache.get(key)
        if entry is None:
            b_in = bundle.fiber_basis(x)
            b_out = bundle.fiber_basis(lift.base_map.forward(x))
            f = lift.fiber_matrix_between(x, b_in, b_out)
            r = f.shape[0]
            # orthonormal bases make both fiber metrics the identity
            psi, _ = polar_two_metric(f, np.eye(r), np.eye(r))
            entry = (b_in, psi, b_out)
            cache[key] = entry
        b_in, psi, b_out = entry
        return b_out @ (psi @ (b_in.T @ v))

    return Lift(bundle, lift.base_map, action,
                f"metrize({lift.provenance})", lift.tolerance)


def differential_lift(diffeo, fd_delta=None):
    """Lift of a sphere diffeomorphism to the tangent bundle by its
    Jacobian (central differences on the radial extension), projected to
    the target tangent fiber."""
    model = diffeo.source
    if not isinstance(model, Sphere):
        raise BadParams("differential_lift is defined for sphere diffeomorphisms")
    bundle = tangent_sphere(model.n)
    delta = TOL.fd_delta if fd_delta is None else fd_delta
    dim = model.n + 1
    cache = {}

    def extended(y):
        nrm = np.linalg.norm(y)
        return nrm * np.asarray(diffeo.forward(y / nrm))

    def jacobian(x):
        key = np.asarray(x).tobytes()
        jac = cache.get(key)
        if jac is None:
            jac = np.empty((dim, dim))
            for i in range(dim):
                step = np.zeros(dim)
                step[i] = delta
                jac[:, i] = (extended(x + step) - extended(x - step)) / (2 * delta)
            b_in = bundle.fiber_basis(x)
            b_out = bundle.fiber_basis(diffeo.forward(x))
            sv = singular_values(b_out.T @ jac @ b_in)
            if sv[0] < 1e-6:
                raise DegenerateJacobian(
                    f"Jacobian singular value {sv[0]:.3e} below 1e-6"
                )
            cache[key] = jac
        return jac

    def action(x, v):
        y = diffeo.forward(x)
        q_y = bundle.fiber_projector(y)
        return q_y @ (jacobian(x) @ v)

    return Lift(bundle, diffeo, action,
                f"differential({diffeo.name})", TOL.transport)


def ambient_projection_lift(bundle, diffeo, variant="fiber",
                            certify_samples=25, seed=1):
    """Lift by projecting fiber vectors onto the fiber over phi(x) inside
    the ambient trivial bundle, when that projection is injective.

    ``variant="fiber"`` projects onto the target fiber (image of
    Q(phi(x))). ``variant="orthocomplement"`` projects onto its orthogonal
    complement instead; that image leaves the bundle's fibers, so the
    resulting map fails membership checks -- it is kept for comparison
    only.
    """
    if variant not in ("fiber", "orthocomplement"):
        raise BadParams(f"unknown variant {variant!r}")
    base = bundle.base

    def target_projector(y):
        q = bundle.fiber_projector(y)
        if variant == "fiber":
            return q
        return np.eye(bundle.ambient_fiber_dim) - q

    for i in range(certify_samples):
        x = random_point(base, np.random.default_rng([seed, i]).integers(2**32))
        b_in = bundle.fiber_basis(x)
        cols = target_projector(diffeo.forward(x)) @ b_in
        sv = singular_values(cols)
        if sv[0] <= 1e-6:
            raise NonInjective(
                f"projection onto the target not injective at a probe point "
                f"(singular value {sv[0]:.3e})",
                witness_point=x, singular_value=float(sv[0]),
            )

    def action(x, v):
        return target_projector(diffeo.forward(x)) @ v

    return Lift(bundle, diffeo, action,
                f"ambient_projection({diffeo.name},{variant})", TOL.exact)


def grassmann_orthogonal_lift(a, k):
    """The natural lift (P, v) -> (A P A^T, A v) of the O(n) action on the
    tautological bundle over the Grassmannian."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    defect = np.max(np.abs(a @ a.T - np.eye(n)))
    if defect > 1e-10:
        raise BadParams(f"matrix is not orthogonal (defect {defect:.3e})")
    bundle = tautological_real(k, n)
    base = named_diffeo(bundle.base, "grassmann_action", matrix=a)
    return Lift(bundle, base, lambda x, v: a @ v,
                "grassmann_orthogonal", TOL.exact)


def _realified_conjugation(v):
    # (Re w, Im w) -> (Re w, -Im w)
    n = v.shape[0] // 2
    out = v.copy()
    out[n:] = -out[n:]
    return out


def cpn_conjugation_lift(n):
    """The anti-linear lift of the conjugation diffeomorphism of CP^n on
    the tautological line bundle: entrywise conjugation upstairs."""
    bundle = tautological_complex(n)
    base = named_diffeo(bundle.base, "cpn_conjugation")
    return Lift(bundle, base, lambda x, v: _realified_conjugation(v),
                "cpn_conjugation", TOL.exact)


def pullback_conjugation_lift(n):
    """Lift of the conjugation of CP^1 to the pullback of the tautological
    line bundle along the degree-n power map; the power map commutes with
    conjugation, so entrywise conjugation maps pulled-back fibers to
    pulled-back fibers."""
    if n < 1:
        raise BadParams("power must be >= 1")
    f = cp1_power_map(n)
    bundle = pullback(f, tautological_complex(1))
    base = named_diffeo(bundle.base, "cpn_conjugation")
    return Lift(bundle, base, lambda x, v: _realified_conjugation(v),
                f"pullback_conjugation[{n}]", TOL.exact)


def torus_line_lift(a, b):
    """Lift of the torus automorphism x -> Ax over the line bundle L_b.

    Exists exactly when b^T A = b^T mod 2; otherwise the fiber formula is
    inconsistent across representatives of the same torus point and the
    construction is refused with a sign-mismatch witness.
    """
    from .obstruction import torus_criterion

    result = torus_criterion(a, b)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if not result.fast_verdict:
        mismatch = np.mod(b @ a - b, 2)
        j = int(np.nonzero(mismatch)[0][0])
        m = np.zeros(b.shape[0], dtype=np.int64)
        m[j] = 1
        raise CriterionFails(
            f"b^T A = {np.mod(b @ a, 2).tolist()} != {b.tolist()} mod 2; "
            f"representatives x=0 and x=m={m.tolist()} give fiber images of "
            f"opposite sign ((-1)^{{b.Am}} = -1 while (-1)^{{b.m}} = +1)",
            witness={"x": np.zeros(b.shape[0]), "m": m},
        )
    bundle = torus_line(b)
    base = named_diffeo(bundle.base, "torus_auto", matrix=a)
    af = a.astype(float)
    u_of = bundle.unit_section

    def action(x, v):
        xr = np.mod(np.asarray(x, dtype=float), 1.0)
        s = float(u_of(xr) @ v)
        return s * u_of(af @ xr)

    return Lift(bundle, base, action, f"torus_line[{b.tolist()}]", TOL.exact)


def _split_product_lift(bundle, n1, base, act1, act2, provenance, tolerance):
    def action(p, v):
        x1, x2 = p
        out = np.empty_like(v)
        out[:n1] = act1(x1, v[:n1])
        out[n1:] = act2(x2, v[n1:])
        return out

    return Lift(bundle, base, action, provenance, tolerance)


def s1xs2_generator_lift(name, n, steps=DEFAULT_TRANSPORT_STEPS):
    """Lifts of the three diffeotopy generators of S^1 x S^2 on the product
    of the real tautological line bundle (S^1 as RP^1) with the degree-n
    pullback bundle over S^2 as CP^1.

    * ``s`` reverses the circle: the O(2) lift diag(1,-1) on the first
      summand, identity on the second.
    * ``r`` rotates the sphere by the circle coordinate: identity on the
      first summand, fiber multiplication by exp(i n theta) on the second.
    * ``a`` is the antipodal map on the sphere factor: conjugation lift
      composed with a transport lift along the half-turn rotation
      connecting it to the conjugation.
    """
    if n < 1:
        raise BadParams("power must be >= 1")
    v1 = tautological_real(1, 2)
    f = cp1_power_map(n)
    v2 = pullback(f, tautological_complex(1))
    bundle = direct_sum(v1, v2)
    model = bundle.base
    ident1 = identity_diffeo(v1.base)
    ident2 = identity_diffeo(v2.base)

    if name == "s":
        refl = np.diag([1.0, -1.0])
        left = grassmann_orthogonal_lift(refl, 1)
        base = product_diffeo(model, left.base_map, ident2, name="s")
        return _split_product_lift(bundle, 2, base, left.action,
                                   lambda x2, w: w.copy(), "s1xs2_s", TOL.exact)

    if name == "r":
        def theta_of(p1):
            # line at angle alpha in R^2 <-> circle coordinate theta = 2 alpha
            return float(np.arctan2(2.0 * p1[0, 1], p1[0, 0] - p1[1, 1]))

        def rotate(p, sign):
            x1, x2 = p
            th = theta_of(x1)
            u = np.diag([np.exp(sign * 1j * th), 1.0])
            return (x1, u @ x2 @ u.conj().T)

        base = Diffeo("r", lambda p: rotate(p, 1.0), lambda p: rotate(p, -1.0),
                       model)

        def act2(w2, theta):
            u = np.diag([np.exp(1j * n * theta), 1.0])
            z = u @ (w2[:2] + 1j * w2[2:])
            return np.concatenate([z.real, z.imag])

        def action(p, v):
            x1, _ = p
            out = np.empty_like(v)
            out[:2] = v[:2]
            out[2:] = act2(v[2:], theta_of(x1))
            return out

        return Lift(bundle, base, action, "s1xs2_r", TOL.exact)

    if name == "a":
        conj_lift = pullback_conjugation_lift(n)
        half_turn = cp1_plane_rotation_homotopy(v2.base, np.pi)
        rot_lift = lift_from_homotopy(v2, half_turn, steps=steps)
        right = compose(conj_lift, rot_lift)
        anti = named_diffeo(v2.base, "cp1_antipodal")
        base = product_diffeo(model, ident1, anti, name="a")
        return _split_product_lift(bundle, 2, base, lambda x1, w: w.copy(),
                                   right.action, "s1xs2_a", TOL.transport)

    raise BadParams(f"unknown generator {name!r}; expected one of a, r, s")


# ---------------------------------------------------------------------------
# Frame views and complex tooling


@dataclass
class FiberFrame:
    base_point: object
    vectors: np.ndarray  # (N, r), orthonormal columns


def frame_lift_view(lift, frame):
    """Image of an orthonormal fiber frame under an isometric lift.

    Equivariant for the right O(r) action on frames; this is the induced
    automorphism of the orthonormal frame bundle, evaluated pointwise.
    """
    vecs = np.asarray(frame.vectors, dtype=float)
    gram_in = vecs.T @ vecs
    defect_in = float(np.max(np.abs(gram_in - np.eye(vecs.shape[1]))))
    if defect_in > 1e-8:
        raise NotOrthonormal(f"input frame defect {defect_in:.3e} > 1e-8")
    x = frame.base_point
    out = np.column_stack([lift.action(x, vecs[:, i])
                           for i in range(vecs.shape[1])])
    gram_out = out.T @ out
    defect_out = float(np.max(np.abs(gram_out - np.eye(out.shape[1]))))
    if defect_out > 1e-6:
        raise NotIsometric(f"output frame defect {defect_out:.3e} > 1e-6")
    return FiberFrame(lift.base_map.forward(x), out)


def complex_linearity_defect(lift, samples=50, seed=0):
    """(c_residual, a_residual): worst-case commutation and anti-commutation
    defects of the lift against the complex structure, on unit probes."""
    bundle = lift.bundle
    if not bundle.has_complex_structure:
        raise NoComplexStructure(f"bundle {bundle.key} has no complex structure")
    c_res = 0.0
    a_res = 0.0
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        x = bundle.base.random_point(rng)
        v = bundle.random_fiber_vector(x, rng)
        y = lift.base_map.forward(x)
        j_x = bundle.complex_structure(x)
        j_y = bundle.complex_structure(y)
        w = lift.action(x, v)
        w_jv = lift.action(x, j_x @ v)
        c_res = max(c_res, float(np.linalg.norm(w_jv - j_y @ w)))
        a_res = max(a_res, float(np.linalg.norm(w_jv + j_y @ w)))
    return c_res, a_res


def fiberwise_complex_correction(lift, x):
    """The fiberwise witness that an R-linear lift admits a C-linear
    correction at x.

    Computes K = Phi J Phi^{-1} transported to the fiber over x, solves the
    conjugation problem psi^{-1} J psi = K, and certifies that psi composed
    with the fiber map commutes with J. Returns psi as an ambient matrix
    acting on the fiber over x (identity on the complement).
    """
    bundle = lift.bundle
    if not bundle.has_complex_structure:
        raise NoComplexStructure(f"bundle {bundle.key} has no complex structure")
    y = lift.base_map.inverse(x)  # phi^{-1}(x)
    b_y = bundle.fiber_basis(y)
    b_x = bundle.fiber_basis(x)
    m = b_x.T @ np.column_stack([lift.action(y, b_y[:, i])
                                 for i in range(b_y.shape[1])])
    sv = singular_values(m)
    if sv[0] <= 1e-8:
        raise Singular(f"fiber map not invertible at x (sv {sv[0]:.3e})")
    j_y = b_y.T @ bundle.complex_structure(y) @ b_y
    j_x = b_x.T @ bundle.complex_structure(x) @ b_x
    k = m @ j_y @ np.linalg.inv(m)
    psi = complex_structure_conjugator(j_x, k)
    conj_defect = np.max(np.abs(np.linalg.inv(psi) @ j_x @ psi - k))
    if conj_defect > 1e-8:
        raise AssertionError(f"conjugator residual {conj_defect:.3e} > 1e-8")
    corrected = psi @ m
    comm_defect = np.max(np.abs(corrected @ j_y - j_x @ corrected))
    if comm_defect > 1e-8:
        raise AssertionError(f"corrected map commutation {comm_defect:.3e} > 1e-8")
    q_x = bundle.fiber_projector(x)
    return b_x @ psi @ b_x.T + np.eye(bundle.ambient_fiber_dim) - q_x
