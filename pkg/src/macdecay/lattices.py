"""Per-user matrix lattices and their finite codebook windows.

A user's lattice is the integer span of ``2kn`` complex ``n x k`` basis
matrices whose real embeddings are linearly independent; a window keeps the
integer coefficients within ``[-N, N]``.  Enumeration follows a fixed
odometer order (first coefficient slowest, last coefficient fastest, values
ascending from ``-N``), so every argmin report downstream is reproducible.

The minimization domain downstream treats all users as active: each user's
codeword is a *nonzero* window point.  Mixed cases with silent users are not
modelled.
"""

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "CodeEnsemble",
    "CodebookWindow",
    "DEFAULT_ENUM_BUDGET",
    "EnumerationBudgetError",
    "LatticeBasis",
    "SchemaError",
    "dumps_canonical",
    "ensemble_from_json",
    "ensemble_to_json",
    "enumerate_nonzero",
    "load_ensemble",
    "materialize",
    "random_ensemble",
    "sample_coeffs",
    "save_ensemble",
    "window_coefficients",
]

DEFAULT_ENUM_BUDGET = 10**8
_RANK_TOL = 1e-8
_MAX_RESAMPLE = 64


class EnumerationBudgetError(RuntimeError):
    """An enumeration would exceed the configured budget."""


class SchemaError(ValueError):
    """A lattice specification document violates the schema."""


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Integral basis of one user's full-rank matrix lattice.

    ``basis`` holds ``2kn`` complex matrices of shape ``(n, k)``; their real
    embeddings must be linearly independent (checked via the determinant of
    the row-normalized embedding matrix).
    """

    user_index: int
    n: int
    k: int
    basis: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("matrix dimensions must be positive")
        arr = np.asarray(self.basis, dtype=np.complex128)
        r = 2 * self.k * self.n
        if arr.shape != (r, self.n, self.k):
            raise ValueError(
                f"user {self.user_index}: basis must have shape "
                f"{(r, self.n, self.k)}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"user {self.user_index}: basis entries must be finite")
        object.__setattr__(self, "basis", arr)
        emb = self.embedded()
        norms = np.linalg.norm(emb, axis=1)
        if np.any(norms == 0.0):
            raise ValueError(f"user {self.user_index}: basis contains a zero matrix")
        if abs(np.linalg.det(emb / norms[:, None])) <= _RANK_TOL:
            raise ValueError(
                f"user {self.user_index}: real embeddings of the basis matrices "
                "are not linearly independent"
            )

    @property
    def rank(self):
        return 2 * self.k * self.n

    def embedded(self):
        """Real embeddings of the basis matrices, one per row, shape (2kn, 2kn)."""
        flat = self.basis.reshape(self.rank, -1)
        out = np.empty((self.rank, 2 * flat.shape[1]))
        out[:, 0::2] = flat.real
        out[:, 1::2] = flat.imag
        return out


def materialize(basis, coeffs):
    """Integer linear combination of the basis matrices; linear in ``coeffs``."""
    c = np.asarray(coeffs)
    if c.ndim != 1 or c.shape[0] != basis.rank:
        raise ValueError(f"expected {basis.rank} coefficients, got shape {c.shape}")
    return np.tensordot(c, basis.basis, axes=(0, 0))


@dataclass(frozen=True, eq=False)
class CodebookWindow:
    """A lattice basis restricted to integer coefficients in [-N, N]."""

    basis: LatticeBasis
    N: int

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValueError("window bound N must be at least 1")
        object.__setattr__(self, "N", int(self.N))

    @property
    def rank(self):
        return self.basis.rank

    def size(self):
        """Number of coefficient vectors in the window, zero vector included."""
        return (2 * self.N + 1) ** self.rank


def enumerate_nonzero(window, budget=DEFAULT_ENUM_BUDGET):
    """Yield every nonzero (coeffs, matrix) pair of the window in odometer order.

    Emits exactly ``(2N+1)^r - 1`` distinct pairs.  Streams lazily; refuse up
    front if the window is larger than the budget.  Consumers may partition
    work by slicing the leading coefficient range.
    """
    total = window.size() - 1
    if total > budget:
        raise EnumerationBudgetError(
            f"window enumeration needs {total} coefficient vectors, "
            f"budget is {budget}"
        )
    values = range(-window.N, window.N + 1)
    for combo in itertools.product(values, repeat=window.rank):
        if any(combo):
            c = np.array(combo, dtype=np.int64)
            yield c, materialize(window.basis, c)


def window_coefficients(window, budget=DEFAULT_ENUM_BUDGET):
    """All nonzero coefficient vectors of the window as one integer array.

    Rows follow the same odometer order as :func:`enumerate_nonzero`.
    """
    total = window.size()
    if total - 1 > budget:
        raise EnumerationBudgetError(
            f"window enumeration needs {total - 1} coefficient vectors, "
            f"budget is {budget}"
        )
    base = 2 * window.N + 1
    idx = np.arange(total, dtype=np.int64)
    out = np.empty((total, window.rank), dtype=np.int64)
    for pos in range(window.rank - 1, -1, -1):
        out[:, pos] = idx % base - window.N
        idx //= base
    return out[np.any(out != 0, axis=1)]


def sample_coeffs(window, count, seed):
    """Uniform coefficient vectors from the window; deterministic per seed.

    Duplicates are allowed.  Returns an integer array of shape (count, rank).
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = np.random.default_rng(seed)
    return rng.integers(
        -window.N, window.N + 1, size=(int(count), window.rank), dtype=np.int64
    )


@dataclass(frozen=True, eq=False)
class CodeEnsemble:
    """The multiuser code: one windowed lattice per user, shared shape n x k."""

    users: tuple

    def __post_init__(self):
        users = tuple(self.users)
        if not users:
            raise ValueError("an ensemble needs at least one user")
        n, k = users[0].basis.n, users[0].basis.k
        for w in users:
            if (w.basis.n, w.basis.k) != (n, k):
                raise ValueError("all users must share the matrix shape n x k")
        if k < len(users) * n:
            raise ValueError(
                f"code length k={k} must be at least U*n={len(users) * n}"
            )
        object.__setattr__(self, "users", users)

    @property
    def U(self):
        return len(self.users)

    @property
    def n(self):
        return self.users[0].basis.n

    @property
    def k(self):
        return self.users[0].basis.k

    def windows(self):
        return tuple(w.N for w in self.users)

    def with_windows(self, bounds):
        """Same lattices with replaced window bounds (int broadcasts to all)."""
        bounds = _broadcast_bounds(bounds, self.U)
        return CodeEnsemble(
            users=tuple(
                CodebookWindow(basis=w.basis, N=b)
                for w, b in zip(self.users, bounds)
            )
        )


def _broadcast_bounds(bounds, count):
    if isinstance(bounds, (int, np.integer)):
        return (int(bounds),) * count
    bounds = tuple(int(b) for b in bounds)
    if len(bounds) == 1:
        return bounds * count
    if len(bounds) != count:
        raise ValueError(f"expected 1 or {count} window bounds, got {len(bounds)}")
    return bounds


def random_ensemble(U, n, k, seed, N=1):
    """Seeded random ensemble with continuous (complex normal) basis entries.

    Continuous entries make exact determinant zeros over nonzero codeword
    tuples a null event, so decay curves stay informative.  Bases failing the
    full-rank invariant are resampled (essentially never needed).
    """
    if U < 1:
        raise ValueError("need at least one user")
    if k < U * n:
        raise ValueError(f"code length k={k} must be at least U*n={U * n}")
    bounds = _broadcast_bounds(N, U)
    rng = np.random.default_rng(seed)
    r = 2 * k * n
    users = []
    for j in range(U):
        for _ in range(_MAX_RESAMPLE):
            raw = rng.standard_normal((r, n, k)) + 1j * rng.standard_normal((r, n, k))
            try:
                basis = LatticeBasis(user_index=j, n=n, k=k, basis=raw)
                break
            except ValueError:
                continue
        else:
            raise RuntimeError("could not draw a full-rank basis")
        users.append(CodebookWindow(basis=basis, N=bounds[j]))
    return CodeEnsemble(users=tuple(users))


# ---------------------------------------------------------------------------
# lattice specification files
#
# {"U": 2, "n": 1, "k": 2, "users": [{"N": 4, "basis": [matrix, ...]}, ...]}
# where matrix = n rows, each a list of k [re, im] pairs.
# ---------------------------------------------------------------------------


def ensemble_to_json(ensemble):
    """Serialize an ensemble into the lattice specification document."""
    users = []
    for w in ensemble.users:
        mats = []
        for mat in w.basis.basis:
            mats.append(
                [[[float(z.real), float(z.imag)] for z in row] for row in mat]
            )
        users.append({"N": int(w.N), "basis": mats})
    return {"U": ensemble.U, "n": ensemble.n, "k": ensemble.k, "users": users}


def _require_int(doc, field, minimum=1):
    value = doc.get(field)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise SchemaError(f"{field}: expected an integer >= {minimum}, got {value!r}")
    return value


def ensemble_from_json(doc):
    """Parse and validate a lattice specification document."""
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    U = _require_int(doc, "U")
    n = _require_int(doc, "n")
    k = _require_int(doc, "k")
    users = doc.get("users")
    if not isinstance(users, list) or len(users) != U:
        raise SchemaError(f"users: expected a list of {U} entries")
    r = 2 * k * n
    windows = []
    for j, entry in enumerate(users):
        where = f"users[{j}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: expected an object")
        bound = entry.get("N")
        if not isinstance(bound, int) or isinstance(bound, bool) or bound < 1:
            raise SchemaError(f"{where}.N: expected an integer >= 1, got {bound!r}")
        mats = entry.get("basis")
        if not isinstance(mats, list) or len(mats) != r:
            raise SchemaError(f"{where}.basis: expected {r} matrices")
        parsed = np.empty((r, n, k), dtype=np.complex128)
        for i, mat in enumerate(mats):
            if not isinstance(mat, list) or len(mat) != n:
                raise SchemaError(f"{where}.basis[{i}]: expected {n} rows")
            for q, row in enumerate(mat):
                if not isinstance(row, list) or len(row) != k:
                    raise SchemaError(
                        f"{where}.basis[{i}][{q}]: expected {k} entries"
                    )
                for c, pair in enumerate(row):
                    if (
                        not isinstance(pair, list)
                        or len(pair) != 2
                        or not all(isinstance(x, (int, float)) for x in pair)
                    ):
                        raise SchemaError(
                            f"{where}.basis[{i}][{q}][{c}]: expected [re, im]"
                        )
                    parsed[i, q, c] = complex(pair[0], pair[1])
        if not np.all(np.isfinite(parsed)):
            raise SchemaError(f"{where}.basis: entries must be finite")
        try:
            basis = LatticeBasis(user_index=j, n=n, k=k, basis=parsed)
        except ValueError as exc:
            raise SchemaError(f"{where}.basis: {exc}") from exc
        windows.append(CodebookWindow(basis=basis, N=bound))
    try:
        return CodeEnsemble(users=tuple(windows))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def dumps_canonical(doc):
    """Canonical JSON form used for every file this package writes."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_ensemble(ensemble, path):
    Path(path).write_text(dumps_canonical(ensemble_to_json(ensemble)))


def load_ensemble(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return ensemble_from_json(doc)
