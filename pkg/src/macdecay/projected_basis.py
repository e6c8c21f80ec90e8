"""Bases of projected vectors with certified coefficient bounds.

Projecting a basis ``c_1 .. c_m`` of ``R^m`` onto a ``d``-dimensional
subspace yields a spanning set.  This module selects ``d`` of those
projections so that any window point ``sum(a_i c_i)`` with ``|a_i| <= N``
has coordinates bounded by ``m^2 * N`` in the selected basis.  The selection
is a single pass of bounded-coefficient swaps and keeps a log, so the bound
can be re-checked as a certificate on every run instead of being trusted.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import DROP_TOL, Subspace, orthonormalize, project_onto

__all__ = [
    "ProjectedBasis",
    "ProjectionSuiteResult",
    "SwapRecord",
    "coordinates_in",
    "run_projection_suite",
    "select_projected_basis",
]

_COORD_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class SwapRecord:
    removed: int      # source index leaving the basis
    entered: int      # source index taking its place
    max_coeff: float  # the violating coefficient magnitude, always > 1


@dataclass(eq=False)
class ProjectedBasis:
    """A coefficient-bounded basis of projected source vectors.

    ``basis_vectors[i]`` is the projection of source vector
    ``selected_indices[i]`` (0-based) onto ``subspace``.  The rows are
    linearly independent but deliberately not orthonormalized: the
    coefficient bound is a statement about these raw projections.
    """

    subspace: Subspace
    selected_indices: tuple
    basis_vectors: np.ndarray
    swap_log: tuple


def _solve_in_rows(rows, target):
    """Coefficients of ``target`` in the row stack via its Gram system."""
    gram = rows @ rows.T
    try:
        return np.linalg.solve(gram, rows @ target)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError("projected basis is numerically singular") from exc


def select_projected_basis(source, subspace):
    """Select a coefficient-bounded basis among the projected source vectors.

    Procedure, deterministic by construction:

    1. project every source vector onto the subspace;
    2. pick the initial basis greedily in index order, keeping a projection
       whenever its elimination residual exceeds ``DROP_TOL`` times the
       largest projection norm;
    3. examine each remaining projection once, in index order: express it in
       the current basis; if every coefficient has magnitude <= 1 the basis
       stays, otherwise the basis element carrying the maximal magnitude
       (ties break to the lowest position) is swapped out for the examined
       vector and the swap is logged;
    4. return the final basis with its swap log.

    Each non-selected vector is examined exactly once, so there are at most
    ``m - d`` swaps and the pass always terminates.
    """
    src = np.asarray(source, dtype=float)
    if src.ndim != 2 or src.shape[0] != src.shape[1]:
        raise ValueError(
            f"source must be m vectors of length m, got shape {src.shape}"
        )
    m = src.shape[0]
    if subspace.ambient_dim != m:
        raise ValueError(
            f"subspace lives in R^{subspace.ambient_dim}, source in R^{m}"
        )
    if orthonormalize(src).shape[0] != m:
        raise ValueError("source vectors do not span the ambient space")
    d = subspace.dim
    if d == 0:
        return ProjectedBasis(
            subspace=subspace,
            selected_indices=(),
            basis_vectors=np.zeros((0, m)),
            swap_log=(),
        )
    proj = (src @ subspace.vectors.T) @ subspace.vectors
    scale = float(np.max(np.linalg.norm(proj, axis=1)))
    if scale == 0.0:
        raise ArithmeticError("source projections all vanish on a nonzero subspace")
    selected = []
    frame = []  # orthonormal frame of the current selection, for rank tests only
    for j in range(m):
        if len(selected) == d:
            break
        w = proj[j].copy()
        for _ in range(2):
            for u in frame:
                w -= (w @ u) * u
        residual = float(np.linalg.norm(w))
        if residual > DROP_TOL * scale:
            selected.append(j)
            frame.append(w / residual)
    if len(selected) != d:
        raise ArithmeticError("projections of the source failed to span the subspace")
    basis = proj[selected].copy()
    log = []
    chosen = set(selected)
    for j in range(m):
        if j in chosen:
            continue
        coeffs = _solve_in_rows(basis, proj[j])
        mags = np.abs(coeffs)
        worst = int(np.argmax(mags))  # argmax resolves ties to the lowest index
        if mags[worst] > 1.0:
            log.append(
                SwapRecord(
                    removed=selected[worst], entered=j, max_coeff=float(mags[worst])
                )
            )
            selected[worst] = j
            basis[worst] = proj[j]
    return ProjectedBasis(
        subspace=subspace,
        selected_indices=tuple(selected),
        basis_vectors=basis,
        swap_log=tuple(log),
    )


def coordinates_in(pb, v):
    """Coordinates of the subspace projection of ``v`` in the selected basis.

    Solves the d x d Gram system of the basis rows; because those rows lie in
    the subspace, their inner products against ``v`` and against its
    projection agree, so no explicit projection is needed for the right-hand
    side.  The reconstruction is verified against the projection to
    ``1e-8 * |v|`` as a numerics guard.
    """
    vec = np.asarray(v, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != pb.subspace.ambient_dim:
        raise ValueError(
            f"vector of shape {vec.shape} does not live in "
            f"R^{pb.subspace.ambient_dim}"
        )
    coeffs = _solve_in_rows(pb.basis_vectors, vec)
    reconstructed = coeffs @ pb.basis_vectors
    target = project_onto(vec, pb.subspace)
    residual = float(np.linalg.norm(reconstructed - target))
    if residual > _COORD_RESIDUAL_RTOL * max(float(np.linalg.norm(vec)), 1e-300):
        raise ArithmeticError(
            f"coordinate reconstruction residual {residual:.3e} exceeds tolerance"
        )
    return coeffs


@dataclass
class ProjectionSuiteResult:
    trials: int
    passed: int
    worst_ratio: float  # max |coefficient| seen over the certified bound
    swaps: int

    @property
    def ok(self):
        return self.passed == self.trials


def run_projection_suite(trials=1000, seed=0, max_ambient=12, window_bounds=(1, 10, 100)):
    """Randomized certificate check of the ``m^2 N`` coordinate bound.

    Every trial draws a random spanning basis, a random subspace, and a
    random window point, then asserts the bound on its coordinates in the
    selected projected basis.  Violations count as failures; this is the
    executable form of the certificate.
    """
    rng = np.random.default_rng(seed)
    passed = 0
    worst = 0.0
    swaps = 0
    for t in range(trials):
        m = int(rng.integers(2, max_ambient + 1))
        src = rng.standard_normal((m, m))
        while orthonormalize(src).shape[0] != m:  # a.s. never loops
            src = rng.standard_normal((m, m))
        d = int(rng.integers(1, m + 1))
        sub = Subspace.span(rng.standard_normal((d, m)))
        bound = int(window_bounds[t % len(window_bounds)])
        amplitudes = rng.uniform(-bound, bound, size=m)
        point = amplitudes @ src
        pb = select_projected_basis(src, sub)
        coords = coordinates_in(pb, point)
        limit = m * m * bound
        swaps += len(pb.swap_log)
        ratio = float(np.max(np.abs(coords))) / limit
        worst = max(worst, ratio)
        passed += bool(np.all(np.abs(coords) <= limit))
    return ProjectionSuiteResult(
        trials=trials, passed=passed, worst_ratio=worst, swaps=swaps
    )
