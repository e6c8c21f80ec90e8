"""Dense complex linear algebra shared by the whole package.

Conventions used everywhere:

* complex matrices are numpy arrays of shape ``(rows, cols)``, rows first;
* an ``n x k`` complex matrix embeds into ``R^(2nk)`` by interleaving the
  real and imaginary parts of its row-major entries (``real_embed``);
* subspaces of ``R^m`` are carried as orthonormal row stacks (:class:`Subspace`).

Everything here is a pure function of its inputs; values are safe to share
between threads.
"""

import numpy as np

__all__ = [
    "NegativeGramDeterminant",
    "Subspace",
    "clamp_gram_det",
    "gram_det",
    "orthonormal_complement",
    "orthonormalize",
    "project_onto",
    "real_embed",
    "real_unembed",
]

#: stored orthonormality tolerance for Subspace rows
ORTHO_TOL = 1e-10
#: relative residual below which a vector counts as linearly dependent
DROP_TOL = 1e-10
#: negative Gram determinants beyond this magnitude raise instead of clamping
NEG_DET_CLAMP = 1e-12


class NegativeGramDeterminant(ArithmeticError):
    """A Gram determinant came out negative beyond round-off."""


def _as_complex_matrix(m):
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if a.size == 0:
        raise ValueError("empty matrices have no Gram determinant")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def clamp_gram_det(value, clamp=NEG_DET_CLAMP):
    """Apply the round-off policy for Gram determinants.

    Values in ``(-clamp, 0)`` are numerical noise and become ``0.0``; anything
    more negative signals a real numerics bug and raises.
    """
    if value < 0.0:
        if value < -clamp:
            raise NegativeGramDeterminant(
                f"Gram determinant {value:.6e} is negative beyond round-off"
            )
        return 0.0
    return float(value)


def gram_det(m):
    """det(M M^H) of a rectangular complex matrix M.

    Computed from the triangular factor of the Hermitian Gram matrix,
    obtained as the R factor of a QR factorization of ``M^H``.  That single
    code path covers fewer rows than columns, square, and more rows than
    columns (where the Gram matrix is singular and the result is exactly 0),
    and never forms ``M M^H`` explicitly, which keeps the result accurate
    when rows of very different scales are stacked together.
    """
    a = _as_complex_matrix(m)
    rows, cols = a.shape
    if rows > cols:
        # Gram rank is at most cols < rows, so the determinant vanishes.
        return 0.0
    r = np.linalg.qr(a.conj().T, mode="r")
    diag = np.abs(np.diagonal(r))
    return clamp_gram_det(float(np.prod(diag) ** 2))


def real_embed(x):
    """Flatten an ``n x k`` complex matrix into a real vector of length 2nk.

    The order is fixed and documented so that coefficient vectors are
    reproducible across runs: entries are taken row-major, and each entry
    contributes its (real, imaginary) pair consecutively.  The map is a real
    linear isometry: the Frobenius norm of the input equals the Euclidean
    norm of the output.
    """
    a = _as_complex_matrix(x)
    flat = a.ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out


def real_unembed(v, rows, cols):
    """Exact inverse of :func:`real_embed` for the given matrix shape."""
    vec = np.asarray(v, dtype=float)
    if vec.ndim != 1 or vec.size != 2 * rows * cols:
        raise ValueError(
            f"embedded vector of a {rows} x {cols} matrix must have length "
            f"{2 * rows * cols}, got {vec.shape}"
        )
    flat = vec[0::2] + 1j * vec[1::2]
    return flat.reshape(rows, cols)


def orthonormalize(vectors, ambient_dim=None):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Returns an orthonormal row stack spanning the same space.  A vector whose
    residual after projection removal drops below ``DROP_TOL`` times its input
    norm counts as linearly dependent and is dropped, so rank decisions are
    deterministic.
    """
    rows = np.asarray(vectors, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.size == 0:
        if rows.ndim == 2 and rows.shape[1]:
            ambient_dim = rows.shape[1]
        if ambient_dim is None:
            raise ValueError("ambient_dim is required to orthonormalize an empty set")
        return np.zeros((0, int(ambient_dim)))
    if rows.ndim != 2:
        raise ValueError(f"expected a stack of vectors, got shape {rows.shape}")
    kept = []
    for v in rows:
        scale = float(np.linalg.norm(v))
        if scale == 0.0:
            continue
        w = v.astype(float, copy=True)
        for _ in range(2):
            for u in kept:
                w -= (w @ u) * u
        residual = float(np.linalg.norm(w))
        if residual > DROP_TOL * scale:
            kept.append(w / residual)
    if not kept:
        return np.zeros((0, rows.shape[1]))
    return np.vstack(kept)


class Subspace:
    """A linear subspace of ``R^m`` held as orthonormal rows.

    ``vectors`` has shape ``(dim, ambient_dim)``; the zero subspace is the
    empty stack.  Orthonormality is the stored normal form and is validated
    on construction; use :meth:`span` to build one from arbitrary spanning
    vectors.  Instances are treated as immutable.
    """

    __slots__ = ("vectors", "ambient_dim")

    def __init__(self, vectors, ambient_dim=None):
        arr = np.asarray(vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.size == 0:
            if arr.ndim == 2 and arr.shape[1]:
                ambient_dim = arr.shape[1]
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for an empty basis")
            arr = np.zeros((0, int(ambient_dim)))
        if arr.ndim != 2:
            raise ValueError(f"expected a stack of vectors, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("basis vectors must be finite")
        if ambient_dim is not None and arr.shape[1] != int(ambient_dim):
            raise ValueError(
                f"vectors have length {arr.shape[1]}, expected ambient_dim={ambient_dim}"
            )
        if arr.shape[0] > arr.shape[1]:
            raise ValueError("more vectors than ambient dimensions")
        if arr.shape[0]:
            gram = arr @ arr.T
            if float(np.max(np.abs(gram - np.eye(arr.shape[0])))) > ORTHO_TOL:
                raise ValueError("vectors are not orthonormal; use Subspace.span")
        self.vectors = arr
        self.ambient_dim = arr.shape[1]

    @classmethod
    def span(cls, vectors, ambient_dim=None):
        """Orthonormalize arbitrary spanning vectors into a Subspace."""
        return cls(orthonormalize(vectors, ambient_dim), ambient_dim=ambient_dim)

    @property
    def dim(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def orthonormal_complement(s):
    """Orthonormal basis of the orthogonal complement of ``s``.

    Sweeps the standard basis in index order, keeping directions that survive
    projection removal; the result always has exactly
    ``ambient_dim - s.dim`` vectors, each orthogonal to ``s``.
    """
    m = s.ambient_dim
    target = m - s.dim
    kept = []
    for i in range(m):
        if len(kept) == target:
            break
        w = np.zeros(m)
        w[i] = 1.0
        for _ in range(2):
            w -= s.vectors.T @ (s.vectors @ w)
            for u in kept:
                w -= (w @ u) * u
        residual = float(np.linalg.norm(w))
        if residual > DROP_TOL:
            kept.append(w / residual)
    if len(kept) != target:
        raise ArithmeticError("complement sweep lost rank; the input basis is suspect")
    if not kept:
        return Subspace(np.zeros((0, m)), ambient_dim=m)
    return Subspace(np.vstack(kept), ambient_dim=m)


def project_onto(v, s):
    """Orthogonal projection of ``v`` onto the subspace ``s``.

    Idempotent and never increases the Euclidean norm.
    """
    vec = np.asarray(v, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != s.ambient_dim:
        raise ValueError(
            f"vector of shape {vec.shape} does not live in R^{s.ambient_dim}"
        )
    return s.vectors.T @ (s.vectors @ vec)
