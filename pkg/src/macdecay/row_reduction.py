"""Row replacement that preserves the Gram determinant.

A row system stores complex rows ``c_1 .. c_k`` together with, for each
``i < k``, explicit coefficients over the strictly later rows.  Replacing
``c_i`` by ``c_i`` minus its tail combination leaves ``det(A A^H)``
unchanged; the verifier recomputes both determinants and compares them.
Storing reductions as tail coefficients makes the membership precondition
true by construction, so only the conclusion needs numerical checking.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import gram_det

__all__ = [
    "ReductionReport",
    "RowSystem",
    "SuiteResult",
    "random_row_system",
    "reduce_rows",
    "run_reduction_suite",
    "verify_reduction_identity",
]


@dataclass(frozen=True, eq=False)
class RowSystem:
    """Rows plus tail-reduction coefficients.

    ``tail_coeffs[i]`` has length ``k - 1 - i`` and applies to rows
    ``i+1 .. k-1``, so every reduction references only strictly later rows.
    """

    rows: np.ndarray
    tail_coeffs: tuple

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.complex128)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError("rows must form a nonempty 2-D stack")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows must be finite")
        k = rows.shape[0]
        coeffs = tuple(
            np.asarray(c, dtype=np.complex128).reshape(-1) for c in self.tail_coeffs
        )
        if len(coeffs) != k - 1:
            raise ValueError(
                f"expected {k - 1} tail coefficient lists, got {len(coeffs)}"
            )
        for i, c in enumerate(coeffs):
            if c.shape[0] != k - 1 - i:
                raise ValueError(
                    f"reduction {i} must carry exactly {k - 1 - i} coefficients "
                    f"(rows {i + 1}..{k - 1}), got {c.shape[0]}"
                )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "tail_coeffs", coeffs)

    @property
    def k(self):
        return self.rows.shape[0]

    @property
    def n(self):
        return self.rows.shape[1]


def reduce_rows(system):
    """Replace each row by itself minus its tail combination.

    The last row is carried over untouched, bit for bit.
    """
    rows = system.rows
    out = rows.copy()
    for i, coeffs in enumerate(system.tail_coeffs):
        if coeffs.shape[0]:
            out[i] = rows[i] - coeffs @ rows[i + 1 :]
    return out


@dataclass(frozen=True)
class ReductionReport:
    det_original: float
    det_reduced: float
    passed: bool
    gap: float


def verify_reduction_identity(system, tol=1e-9):
    """Check det(A A^H) == det(B B^H) for the reduced system.

    Passes iff ``|detA - detB| <= tol * max(1, |detA|)`` — the relative and
    absolute blend matters because determinants span many orders of magnitude
    in decay experiments.  Numerical trouble shows up as ``passed=False``,
    never as an exception.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        det_a = gram_det(system.rows)
        det_b = gram_det(reduce_rows(system))
    except ArithmeticError:
        return ReductionReport(float("nan"), float("nan"), False, float("inf"))
    gap = abs(det_a - det_b) / max(1.0, abs(det_a))
    return ReductionReport(det_a, det_b, bool(gap <= tol), gap)


def random_row_system(rng, k, n, coeff_scale=10.0):
    """Random complex rows with random tail reductions of the given magnitude."""
    rows = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    coeffs = tuple(
        rng.uniform(-coeff_scale, coeff_scale, size=k - 1 - i)
        + 1j * rng.uniform(-coeff_scale, coeff_scale, size=k - 1 - i)
        for i in range(k - 1)
    )
    return RowSystem(rows=rows, tail_coeffs=coeffs)


@dataclass
class SuiteResult:
    trials: int
    passed: int
    worst_gap: float

    @property
    def ok(self):
        return self.passed == self.trials


def run_reduction_suite(trials=10_000, seed=0, max_dim=6, coeff_scale=10.0, tol=1e-9):
    """Randomized identity check stratified over k<n, k=n and k>n.

    Trials cycle through the three shape regimes so all proof-relevant cases
    are exercised regardless of the trial count.
    """
    if max_dim < 2:
        raise ValueError("max_dim must be at least 2 to cover all shape regimes")
    rng = np.random.default_rng(seed)
    passed = 0
    worst = 0.0
    for t in range(trials):
        regime = t % 3
        if regime == 0:  # fewer rows than columns
            n = int(rng.integers(2, max_dim + 1))
            k = int(rng.integers(1, n))
        elif regime == 1:  # square
            n = int(rng.integers(1, max_dim + 1))
            k = n
        else:  # more rows than columns
            n = int(rng.integers(1, max_dim))
            k = int(rng.integers(n + 1, max_dim + 1))
        report = verify_reduction_identity(
            random_row_system(rng, k, n, coeff_scale), tol=tol
        )
        passed += report.passed
        if np.isfinite(report.gap):
            worst = max(worst, report.gap)
        else:
            worst = float("inf")
    return SuiteResult(trials=trials, passed=passed, worst_gap=worst)
