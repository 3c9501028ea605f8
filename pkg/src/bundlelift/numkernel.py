"""Small dense linear-algebra kernel shared by every other module.

All routines work on plain float64 numpy arrays (complex data travels in
the realified 2n x 2n block form, see :func:`realify`). The symmetric
eigensolver is a cyclic Jacobi sweep with a fixed rotation order and a
fixed eigenvector sign convention, so repeated calls on equal input are
bitwise identical.
"""

import numpy as np

from . import _kernels
from .config import DEFAULT_TOLERANCES as TOL
from .errors import NotComplexStructure, NotSPD, RankDeficient, Singular

__all__ = [
    "Projector",
    "sym_eigh",
    "sym_sqrt",
    "projector_from_span",
    "polar_two_metric",
    "complex_structure_conjugator",
    "singular_values",
    "realify",
    "complexify",
    "realify_vector",
    "complexify_vector",
]


def _as_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def sym_eigh(s):
    """Eigendecomposition of a symmetric matrix via Jacobi rotations.

    Returns (w, v) with eigenvalues ascending and each eigenvector's first
    nonzero component made positive.
    """
    s = _as_square(s)
    work = np.ascontiguousarray(0.5 * (s + s.T))
    w, v = _kernels.jacobi_eigh(work)
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        big = np.max(np.abs(col))
        if big == 0.0:
            continue
        nz = np.nonzero(np.abs(col) > 1e-12 * big)[0]
        if nz.size and col[nz[0]] < 0.0:
            v[:, j] = -col
    return w, v


def singular_values(f):
    """Singular values (ascending) of a rectangular matrix, computed from
    the symmetric eigenvalues of F^T F for determinism."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 2:
        raise ValueError("expected a 2-d array")
    g = f.T @ f if f.shape[0] >= f.shape[1] else f @ f.T
    w, _ = sym_eigh(g)
    return np.sqrt(np.clip(w, 0.0, None))


def sym_sqrt(s):
    """Symmetric positive-definite square root R with R @ R = S."""
    s = _as_square(s)
    defect = np.max(np.abs(s - s.T))
    if defect > 1e-10:
        raise NotSPD(f"symmetry defect {defect:.3e} exceeds 1e-10")
    w, v = sym_eigh(s)
    if w[0] <= TOL.spd_eig:
        raise NotSPD(f"eigenvalue {w[0]:.3e} below SPD floor {TOL.spd_eig:.0e}")
    return (v * np.sqrt(w)) @ v.T


def _inv_spd(s):
    w, v = sym_eigh(_as_square(s))
    if w[0] <= TOL.spd_eig:
        raise NotSPD(f"eigenvalue {w[0]:.3e} below SPD floor")
    return (v / w) @ v.T


class Projector:
    """Symmetric idempotent matrix together with its rank."""

    __slots__ = ("matrix", "rank")

    def __init__(self, matrix, rank):
        matrix = _as_square(matrix, "projector")
        idem = np.max(np.abs(matrix @ matrix - matrix))
        sym = np.max(np.abs(matrix - matrix.T))
        if idem > 1e-10 or sym > 1e-10:
            raise ValueError(
                f"not a projector: idempotency defect {idem:.3e}, symmetry {sym:.3e}"
            )
        if abs(np.trace(matrix) - rank) > 1e-8:
            raise ValueError(f"trace {np.trace(matrix):.6f} != rank {rank}")
        self.matrix = matrix
        self.rank = int(rank)

    @property
    def dim(self):
        return self.matrix.shape[0]


def projector_from_span(vectors):
    """Orthogonal projector onto the span of the given ambient vectors."""
    cols = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if not np.all(np.isfinite(cols)):
        raise ValueError("span vectors have non-finite entries")
    sv = singular_values(cols)
    if sv[0] <= TOL.rank_rel * sv[-1] or sv[-1] == 0.0:
        raise RankDeficient(
            f"smallest singular value {sv[0]:.3e} fails independence threshold"
        )
    gram_inv = _inv_spd(cols.T @ cols)
    p = cols @ gram_inv @ cols.T
    p = 0.5 * (p + p.T)
    return Projector(p, cols.shape[1])


def polar_two_metric(f, g_u, g_w):
    """Two-metric polar factorization F = Xi @ Psi.

    Psi is a (G_U, G_W)-isometry and Xi is G_W-self-adjoint positive
    definite; both factors are unique. Xi is the G_W-symmetric square root
    of F F^sharp with F^sharp = G_U^{-1} F^T G_W the metric adjoint.
    """
    f = _as_square(f, "F")
    g_u = _as_square(g_u, "G_U")
    g_w = _as_square(g_w, "G_W")
    sv = singular_values(f)
    if sv[0] <= 1e-10:
        raise Singular(f"min singular value {sv[0]:.3e} <= 1e-10")
    s = sym_sqrt(g_w)
    s_inv = _inv_spd(s)
    g_u_inv = _inv_spd(g_u)
    # F F^sharp is G_W-self-adjoint; conjugating by sqrt(G_W) makes it
    # symmetric in the Euclidean sense so sym_sqrt applies.
    m = s @ f @ g_u_inv @ f.T @ s
    m = 0.5 * (m + m.T)
    xi = s_inv @ sym_sqrt(m) @ s
    psi = np.linalg.solve(xi, f)
    return psi, xi


def _complex_adapted_basis(j, tol):
    """Columns (b1, J b1, b2, J b2, ...) orthonormal for the J-invariant
    inner product <u,w> + <Ju,Jw>."""
    n = j.shape[0]
    gram = np.eye(n) + j.T @ j

    def dot(u, w):
        return float(u @ gram @ w)

    basis = []
    for cand_idx in range(n):
        if 2 * len(basis) == n:
            break
        c = np.zeros(n)
        c[cand_idx] = 1.0
        for b in basis:
            c = c - dot(b, c) / dot(b, b) * b
            jb = j @ b
            c = c - dot(jb, c) / dot(jb, jb) * jb
        nrm = np.sqrt(dot(c, c))
        if nrm > tol:
            basis.append(c / nrm)
    if 2 * len(basis) != n:
        raise NotComplexStructure("failed to build a complex-adapted basis")
    cols = []
    for b in basis:
        cols.append(b)
        cols.append(j @ b)
    return np.column_stack(cols)


def complex_structure_conjugator(j, k):
    """Invertible psi with psi^{-1} J psi = K, for two complex structures
    J, K on R^{2r} (any two are conjugate)."""
    j = _as_square(j, "J")
    k = _as_square(k, "K")
    n = j.shape[0]
    if n % 2 != 0 or j.shape != k.shape:
        raise NotComplexStructure("need matching even-dimensional matrices")
    dj = np.max(np.abs(j @ j + np.eye(n)))
    dk = np.max(np.abs(k @ k + np.eye(n)))
    if dj > 1e-8:
        raise NotComplexStructure(f"J^2 + I defect {dj:.3e} exceeds 1e-8")
    if dk > 1e-8:
        raise NotComplexStructure(f"K^2 + I defect {dk:.3e} exceeds 1e-8")
    bj = _complex_adapted_basis(j, 1e-8)
    bk = _complex_adapted_basis(k, 1e-8)
    # psi maps the K-adapted basis onto the J-adapted one, pairwise; then
    # psi^{-1} J psi agrees with K on a basis, hence everywhere.
    return bj @ np.linalg.inv(bk)


# -- realification helpers ---------------------------------------------------
#
# Convention: z in C^n maps to (Re z, Im z) in R^{2n}; a complex-linear map
# A maps to [[Re A, -Im A], [Im A, Re A]].


def realify(a):
    a = np.asarray(a, dtype=complex)
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def complexify(m, check=True):
    m = np.asarray(m, dtype=float)
    n = m.shape[0] // 2
    a = m[:n, :n] + 1j * m[n:, :n]
    if check:
        defect = np.max(np.abs(m - realify(a)))
        if defect > 1e-8:
            raise ValueError(f"matrix is not complex-linear (defect {defect:.3e})")
    return a


def realify_vector(z):
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag])


def complexify_vector(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    return x[:n] + 1j * x[n:]


def standard_complex_structure(n):
    """Realified multiplication by i on C^n."""
    z = np.zeros((n, n))
    eye = np.eye(n)
    return np.block([[z, -eye], [eye, z]])
