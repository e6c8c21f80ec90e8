"""Exact desk-scale decay computation, power-law fitting, and bound reports.

The oracle enumerates every tuple of nonzero codewords (one per user) and
takes the exact minimum of the stacked Gram determinant.  No pruning:
determinants are not monotone under appending rows, so any partial-stack
cutoff would be unsound; the honest version is a full scan with batched
determinant evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .lattices import DEFAULT_ENUM_BUDGET, EnumerationBudgetError, window_coefficients
from .linalg import gram_det

__all__ = [
    "BoundReport",
    "DecayCurve",
    "DecaySample",
    "ReportRow",
    "bound_report",
    "brute_force_decay",
    "decay_samples_to_csv",
    "decay_samples_to_json",
    "fit_log_slope",
]

_FEASIBILITY_RTOL = 1e-9
_CHUNK = 8192


@dataclass(eq=False)
class DecaySample:
    """Exact decay value at one window tuple, with its first-attainer argmin."""

    windows: tuple
    value: float
    argmin: tuple
    evaluations: int


def brute_force_decay(ensemble, budget=DEFAULT_ENUM_BUDGET, chunk=_CHUNK):
    """Exact minimum of det(M M^H) over all tuples of nonzero codewords.

    Tuples run user-major (first user slowest) in odometer order; the
    reported argmin is the first attainer of the minimum, so results are
    reproducible.  Intermediate batched determinants clamp tiny negative
    round-off to zero; the final value is recomputed with the stable
    single-matrix routine at the argmin.
    """
    sizes = [w.size() - 1 for w in ensemble.users]
    total = math.prod(sizes)
    if total > budget:
        raise EnumerationBudgetError(
            f"decay enumeration needs {total} tuples, budget is {budget}"
        )
    per_user_coeffs = []
    per_user_mats = []
    for w in ensemble.users:
        co = window_coefficients(w, budget=budget)
        per_user_coeffs.append(co)
        per_user_mats.append(np.tensordot(co, w.basis.basis, axes=(1, 0)))
    strides = []
    acc = 1
    for count in reversed(sizes):
        strides.append(acc)
        acc *= count
    strides.reverse()
    best_value = np.inf
    best_flat = 0
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        parts = []
        rem = idx
        for j in range(len(sizes)):
            sel = rem // strides[j]
            rem = rem - sel * strides[j]
            parts.append(per_user_mats[j][sel])
        batch = np.concatenate(parts, axis=1)
        gram = batch @ batch.conj().transpose(0, 2, 1)
        dets = np.linalg.det(gram).real
        np.maximum(dets, 0.0, out=dets)  # LU round-off on near-singular tuples
        pos = int(np.argmin(dets))
        if dets[pos] < best_value:
            best_value = float(dets[pos])
            best_flat = start + pos
    rem = best_flat
    argmin = []
    stacked = []
    for j in range(len(sizes)):
        sel = rem // strides[j]
        rem -= sel * strides[j]
        argmin.append(per_user_coeffs[j][sel].copy())
        stacked.append(per_user_mats[j][sel])
    value = gram_det(np.concatenate(stacked, axis=0))
    return DecaySample(
        windows=ensemble.windows(),
        value=value,
        argmin=tuple(argmin),
        evaluations=total,
    )


@dataclass(eq=False)
class DecayCurve:
    """Sampled (N, value) pairs with an ordinary least-squares log-log fit.

    Zero values carry no logarithm; they are excluded from the fit and
    counted in ``excluded_zeros``.  Fit fields are NaN when no fit exists.
    """

    samples: tuple
    fitted_slope: float
    fitted_log_k: float
    residual: float
    excluded_zeros: int

    @classmethod
    def from_samples(cls, pairs):
        """Lenient constructor: fits when possible, NaN fit fields otherwise."""
        try:
            return fit_log_slope(pairs)
        except ValueError:
            pts = tuple((int(nv), float(val)) for nv, val in pairs)
            zeros = sum(1 for _, val in pts if val <= 0.0)
            nan = float("nan")
            return cls(
                samples=pts,
                fitted_slope=nan,
                fitted_log_k=nan,
                residual=nan,
                excluded_zeros=zeros,
            )

    def grid(self):
        return tuple(nv for nv, _ in self.samples)


def fit_log_slope(pairs):
    """Least-squares line through (log N, log value); natural logarithms.

    Needs at least two positive values at distinct N, else raises.
    """
    pts = tuple((int(nv), float(val)) for nv, val in pairs)
    usable = [(nv, val) for nv, val in pts if val > 0.0]
    excluded = len(pts) - len(usable)
    if len({nv for nv, _ in usable}) < 2:
        raise ValueError("need at least 2 positive samples with distinct N to fit")
    x = np.log([float(nv) for nv, _ in usable])
    y = np.log([val for _, val in usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((np.polyval([slope, intercept], x) - y) ** 2)))
    return DecayCurve(
        samples=pts,
        fitted_slope=float(slope),
        fitted_log_k=float(intercept),
        residual=residual,
        excluded_zeros=excluded,
    )


@dataclass(eq=False)
class ReportRow:
    window: int
    oracle_value: float
    witness_value: float
    ratio: float
    feasible: bool


@dataclass(eq=False)
class BoundReport:
    """Oracle-versus-witness comparison on a shared N grid.

    ``include_roots`` is set for equal-length configurations (k = U n), where
    the square root of the determinant minimum is meaningful and reported as
    a derived column.
    """

    alpha: float
    per_level: tuple
    rows: tuple
    oracle_fit: DecayCurve
    witness_fit: DecayCurve | None
    include_roots: bool
    all_feasible: bool

    def to_json_dict(self):
        def fit_doc(curve):
            if curve is None:
                return None
            return {
                "samples": [[nv, val] for nv, val in curve.samples],
                "slope": curve.fitted_slope,
                "log_k": curve.fitted_log_k,
                "residual": curve.residual,
                "excluded_zeros": curve.excluded_zeros,
            }

        rows = []
        for row in self.rows:
            doc = {
                "N": row.window,
                "oracle": row.oracle_value,
                "witness": row.witness_value,
                "ratio": row.ratio,
                "feasible": row.feasible,
            }
            if self.include_roots:
                doc["oracle_root"] = math.sqrt(max(row.oracle_value, 0.0))
                doc["witness_root"] = math.sqrt(max(row.witness_value, 0.0))
            rows.append(doc)
        return {
            "alpha": self.alpha,
            "per_level": list(self.per_level),
            "rows": rows,
            "oracle_fit": fit_doc(self.oracle_fit),
            "witness_fit": fit_doc(self.witness_fit),
            "all_feasible": self.all_feasible,
        }

    def to_table(self):
        lines = [
            f"{'N':>6}  {'oracle':>13}  {'witness':>13}  {'ratio':>10}  feasible"
        ]
        for row in self.rows:
            lines.append(
                f"{row.window:>6}  {row.oracle_value:>13.6e}  "
                f"{row.witness_value:>13.6e}  {row.ratio:>10.4f}  "
                f"{'yes' if row.feasible else 'NO'}"
            )
        if not self.rows:
            for nv, val in self.oracle_fit.samples:
                lines.append(f"{nv:>6}  {val:>13.6e}  {'-':>13}  {'-':>10}  -")
        lines.append(
            f"target exponent alpha = {self.alpha:.6f}; "
            f"oracle slope = {self.oracle_fit.fitted_slope:.4f}"
            + (
                f"; witness slope = {self.witness_fit.fitted_slope:.4f}"
                if self.witness_fit is not None
                else ""
            )
        )
        return "\n".join(lines)


def bound_report(oracle, witness, spec):
    """Join an oracle curve and a witness curve over one N grid.

    ``witness`` may be None (or carry no samples) for an oracle-only report.
    Feasibility per row is ``oracle <= witness`` with 1e-9 relative slack for
    the two determinant evaluation paths.
    """
    has_witness = witness is not None and len(witness.samples) > 0
    if has_witness:
        if oracle.grid() != witness.grid():
            raise ValueError(
                f"curves disagree on the N grid: {oracle.grid()} vs {witness.grid()}"
            )
        rows = []
        for (nv, oval), (_, wval) in zip(oracle.samples, witness.samples):
            feasible = oval <= wval * (1.0 + _FEASIBILITY_RTOL)
            ratio = oval / wval if wval > 0.0 else float("nan")
            rows.append(
                ReportRow(
                    window=nv,
                    oracle_value=oval,
                    witness_value=wval,
                    ratio=ratio,
                    feasible=bool(feasible),
                )
            )
        rows = tuple(rows)
    else:
        rows = ()
    return BoundReport(
        alpha=spec.alpha,
        per_level=spec.per_level,
        rows=rows,
        oracle_fit=oracle,
        witness_fit=witness if has_witness else None,
        include_roots=spec.k == spec.U * spec.n,
        all_feasible=all(row.feasible for row in rows),
    )


def decay_samples_to_csv(samples):
    """CSV rows: N_1..N_U, value, evaluations, argmin.

    The argmin column joins users with ';' and a user's coefficients with
    single spaces.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples to serialize")
    users = len(samples[0].windows)
    header = [f"N{j + 1}" for j in range(users)] + ["value", "evaluations", "argmin"]
    lines = [",".join(header)]
    for s in samples:
        argmin = ";".join(
            " ".join(str(int(c)) for c in vec) for vec in s.argmin
        )
        row = [str(int(nv)) for nv in s.windows]
        row += [repr(s.value), str(int(s.evaluations)), argmin]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def decay_samples_to_json(samples):
    """JSON mirror of the CSV emission."""
    return {
        "samples": [
            {
                "windows": [int(nv) for nv in s.windows],
                "value": s.value,
                "evaluations": int(s.evaluations),
                "argmin": [[int(c) for c in vec] for vec in s.argmin],
            }
            for s in samples
        ]
    }
