"""Gaussian covariance-matrix substrate: orderings, symplectic transforms, reduction, PDFs.

Conventions fixed here and relied on by every other module:

* quadrature orderings are xp-interleaved per mode, e.g. (x_A1, p_A1, x_B1, p_B1);
* the vacuum covariance matrix is the identity;
* the symplectic form is block-diagonal Omega with 2x2 blocks [[0, 1], [-1, 0]];
* a full-state covariance matrix is physical when V + i*Omega >= 0, tested against
  a -1e-9 eigenvalue floor that absorbs accumulated round-off.

The literature carries at least three incompatible normalizations (vacuum variance
1/2, 1, or 2); nothing in this package is compatible with any convention other than
vacuum = identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-9
PHYSICALITY_THRESHOLD = -1e-9
CONDITION_LIMIT = 1e12

QUADRATURES = ("x", "p")


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """Iteration budget exhausted; carries the best iterate found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def as_label(label) -> tuple[str, str]:
    """Normalize a quadrature label to a (mode, quadrature) tuple.

    Accepts ("A1", "x") pairs or "x_A1" strings.
    """
    if isinstance(label, str):
        quad, _, mode = label.partition("_")
        if not mode or quad not in QUADRATURES:
            raise ValidationError(f"malformed quadrature label: {label!r}")
        return (mode, quad)
    mode, quad = label
    if quad not in QUADRATURES:
        raise ValidationError(f"unknown quadrature {quad!r} in label {label!r}")
    return (str(mode), str(quad))


@dataclass(frozen=True)
class QuadratureOrdering:
    """Ordered assignment of (mode, quadrature) labels to vector/matrix slots.

    A full ordering carries exactly one x and one p per mode; an ordering marked
    ``reduced`` is a post-measurement selection and may pick any label subset.
    """

    labels: tuple
    reduced: bool = False

    def __post_init__(self):
        labels = tuple(as_label(lbl) for lbl in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate quadrature labels in {self.names}")
        if not self.reduced:
            per_mode: dict[str, set] = {}
            for mode, quad in labels:
                per_mode.setdefault(mode, set()).add(quad)
            bad = sorted(m for m, quads in per_mode.items() if quads != {"x", "p"})
            if bad:
                raise ValidationError(
                    f"full ordering must pair x and p for every mode; incomplete: {bad}"
                )

    @classmethod
    def interleaved(cls, *modes: str) -> "QuadratureOrdering":
        """Full xp-interleaved ordering over the given modes."""
        return cls(tuple((m, q) for m in modes for q in QUADRATURES))

    @classmethod
    def selection(cls, labels) -> "QuadratureOrdering":
        """Reduced ordering over an explicit label list."""
        return cls(tuple(labels), reduced=True)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def modes(self) -> tuple[str, ...]:
        seen: list[str] = []
        for mode, _ in self.labels:
            if mode not in seen:
                seen.append(mode)
        return tuple(seen)

    @property
    def n_modes(self) -> int:
        if self.reduced:
            raise ValidationError("mode count is only defined for full orderings")
        return self.dim // 2

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"{q}_{m}" for m, q in self.labels)

    def index(self, label) -> int:
        lbl = as_label(label)
        try:
            return self.labels.index(lbl)
        except ValueError:
            raise ValidationError(f"label {lbl} not in ordering {self.names}") from None

    def is_permutation_of(self, other: "QuadratureOrdering") -> bool:
        return set(self.labels) == set(other.labels) and self.dim == other.dim


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric second-moment matrix over an explicit quadrature ordering.

    Entries are dimensionless quadrature variances with vacuum = 1 on the diagonal.
    The array is stored read-only; instances are immutable and safe to share.
    """

    ordering: QuadratureOrdering
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        d = self.ordering.dim
        if m.shape != (d, d):
            raise ValidationError(f"entries shape {m.shape} does not match ordering dim {d}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("covariance entries must be finite")
        skew = float(np.max(np.abs(m - m.T), initial=0.0))
        if skew > SYMMETRY_TOL:
            raise ValidationError(f"covariance not symmetric (max |V - V^T| = {skew:.3e})")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.ordering.dim


@dataclass(frozen=True)
class PhysicalityReport:
    """Minimum eigenvalue of V + i*Omega and the pass/fail verdict."""

    min_eigenvalue: float
    passed: bool
    threshold: float = PHYSICALITY_THRESHOLD


def symplectic_form(n_modes: int) -> np.ndarray:
    """Symplectic form Omega for n modes in xp-interleaved ordering.

    Omega is antisymmetric and squares to -I.
    """
    if n_modes < 1:
        raise ValidationError("n_modes must be >= 1")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return omega


def direct_sum(v1: CovarianceMatrix, v2: CovarianceMatrix) -> CovarianceMatrix:
    """Covariance matrix of a product state: block-diagonal over concatenated modes."""
    common = set(v1.ordering.modes) & set(v2.ordering.modes)
    if common:
        raise ValidationError(f"mode names collide in direct sum: {sorted(common)}")
    d1, d2 = v1.dim, v2.dim
    entries = np.zeros((d1 + d2, d1 + d2))
    entries[:d1, :d1] = v1.entries
    entries[d1:, d1:] = v2.entries
    ordering = QuadratureOrdering(
        v1.ordering.labels + v2.ordering.labels,
        reduced=v1.ordering.reduced or v2.ordering.reduced,
    )
    return CovarianceMatrix(ordering, entries)


def permute_modes(v: CovarianceMatrix, target: QuadratureOrdering) -> CovarianceMatrix:
    """Reorder a covariance matrix onto a target ordering of the same labels.

    Equivalent to conjugation by the permutation matrix; exact (pure indexing),
    so permute-then-inverse-permute restores the input bit for bit.
    """
    if not target.is_permutation_of(v.ordering):
        raise ValidationError(
            f"target ordering {target.names} is not a permutation of {v.ordering.names}"
        )
    perm = [v.ordering.index(lbl) for lbl in target.labels]
    entries = v.entries[np.ix_(perm, perm)]
    return CovarianceMatrix(target, entries)


def apply_symplectic(v: CovarianceMatrix, s: np.ndarray) -> CovarianceMatrix:
    """Transform V -> S V S^T for a symplectic matrix S.

    S must satisfy S Omega S^T = Omega to within SYMPLECTIC_TOL; the residual
    norm is reported on rejection. The result is symmetrized before return so
    round-off cannot break the symmetry invariant.
    """
    if v.ordering.reduced:
        raise ValidationError("symplectic transforms require a full ordering")
    s = np.asarray(s, dtype=float)
    d = v.dim
    if s.shape != (d, d):
        raise ValidationError(f"matrix shape {s.shape} does not match state dim {d}")
    omega = symplectic_form(d // 2)
    residual = float(np.max(np.abs(s @ omega @ s.T - omega)))
    if residual > SYMPLECTIC_TOL:
        raise ValidationError(
            f"matrix is not symplectic: max |S Omega S^T - Omega| = {residual:.3e}"
        )
    out = s @ v.entries @ s.T
    out = (out + out.T) / 2.0
    return CovarianceMatrix(v.ordering, out)


# Pade scaling-and-squaring, order chosen by the 1-norm (Higham's method).
# Matrices in this package are 4x4 to 8x8, so accuracy is the only concern.
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068,
    13: 5.371920351148152,
}
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0,
        8821612800.0,
        2075673600.0,
        302702400.0,
        30270240.0,
        2162160.0,
        110880.0,
        3960.0,
        90.0,
        1.0,
    ),
    13: (
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ),
}


def _pade_u_v(a: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE_COEFFS[order]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    if order == 13:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (
            a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
            + b[7] * a6
            + b[5] * a4
            + b[3] * a2
            + b[1] * ident
        )
        v = (
            a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
            + b[6] * a6
            + b[4] * a4
            + b[2] * a2
            + b[0] * ident
        )
        return u, v
    even_powers = [ident, a2]
    for _ in range((order - 1) // 2 - 1):
        even_powers.append(even_powers[-1] @ a2)
    u = a @ sum(b[2 * k + 1] * even_powers[k] for k in range(len(even_powers)))
    v = sum(b[2 * k] * even_powers[k] for k in range(len(even_powers)))
    return u, v


def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """exp(M) by Pade approximant with scaling and squaring.

    Order is selected from the 1-norm; matrices above the order-13 threshold are
    scaled by 2^-s first and the result squared s times. exp(0) = I exactly.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix exponential needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix exponential needs finite entries")
    norm = float(np.linalg.norm(a, 1))
    if norm == 0.0:
        return np.eye(a.shape[0])
    for order in (3, 5, 7, 9):
        if norm <= _PADE_THETA[order]:
            u, v = _pade_u_v(a, order)
            return np.linalg.solve(v - u, v + u)
    squarings = max(0, math.ceil(math.log2(norm / _PADE_THETA[13])))
    u, v = _pade_u_v(a / (2.0**squarings), 13)
    result = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        result = result @ result
    return result


def reduce(v: CovarianceMatrix, keep) -> CovarianceMatrix:
    """Principal submatrix over the quadrature labels in ``keep``, in that order.

    Keeping every label in the original order returns the input unchanged;
    otherwise the result ordering is marked reduced.
    """
    labels = tuple(as_label(lbl) for lbl in keep)
    if labels == v.ordering.labels:
        return v
    idx = [v.ordering.index(lbl) for lbl in labels]
    entries = v.entries[np.ix_(idx, idx)]
    return CovarianceMatrix(QuadratureOrdering.selection(labels), entries)


def _check_positive_definite(entries: np.ndarray, what: str) -> np.ndarray:
    eigs = np.linalg.eigvalsh(entries)
    if eigs[0] <= 0.0:
        raise NumericalError(f"{what} is not positive definite (min eigenvalue {eigs[0]:.3e})")
    if eigs[-1] / eigs[0] > CONDITION_LIMIT:
        raise NumericalError(
            f"{what} is numerically singular (condition number {eigs[-1] / eigs[0]:.3e})"
        )
    return eigs


def gaussian_log_pdf(v: CovarianceMatrix, x: np.ndarray) -> float:
    """Log density of the zero-mean Gaussian with covariance V at outcome x.

    log P(x) = -x^T V^-1 x / 2 - log((2 pi)^d det V) / 2, the normalized density
    (the Monte Carlo integral of exp(log_pdf) over R^d is 1; see tests).
    """
    x = np.asarray(x, dtype=float)
    d = v.dim
    if x.shape != (d,):
        raise ValidationError(f"outcome shape {x.shape} does not match dimension {d}")
    _check_positive_definite(v.entries, "measurement covariance")
    chol = np.linalg.cholesky(v.entries)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    y = np.linalg.solve(chol, x)
    return -0.5 * float(y @ y) - half_logdet - 0.5 * d * math.log(2.0 * math.pi)


def gaussian_log_pdf_rows(v: CovarianceMatrix, xs: np.ndarray) -> np.ndarray:
    """Vectorized ``gaussian_log_pdf`` over the rows of an (n, d) outcome array."""
    xs = np.asarray(xs, dtype=float)
    d = v.dim
    if xs.ndim != 2 or xs.shape[1] != d:
        raise ValidationError(f"outcome array shape {xs.shape} does not match dimension {d}")
    _check_positive_definite(v.entries, "measurement covariance")
    chol = np.linalg.cholesky(v.entries)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    ys = np.linalg.solve(chol, xs.T)
    quad = np.sum(ys * ys, axis=0)
    return -0.5 * quad - half_logdet - 0.5 * d * math.log(2.0 * math.pi)


def check_physicality(v: CovarianceMatrix) -> PhysicalityReport:
    """Diagnostic for the uncertainty condition V + i*Omega >= 0 on full states."""
    if v.ordering.reduced:
        raise ValidationError("physicality is only defined for full orderings")
    omega = symplectic_form(v.ordering.n_modes)
    herm = v.entries + 1j * omega
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    return PhysicalityReport(min_eig, min_eig >= PHYSICALITY_THRESHOLD)
