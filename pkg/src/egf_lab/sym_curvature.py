"""Symmetric-function algebra of principal curvatures.

Everything here is exact up to floating tolerance: power sums and elementary
symmetric functions of a curvature spectrum, the Newton recurrences linking
them, the deformation tensor h(b) in the principal frame, conformal shifts of
the Weingarten spectrum, and the extrinsic Ricci quantities built from it.

Conventions used throughout:
  * tau_j = sum_i k_i**j for j >= 1; tau_0 = n (trace of the identity on the
    leaf) wherever a recurrence reaches index zero.
  * sigma_j are the elementary symmetric functions, sigma_0 = 1 implicit.
  * Newton recurrence, low range (1 <= j <= n):
        tau_j - tau_{j-1} sigma_1 + ... + (-1)^j j sigma_j = 0
  * Newton recurrence, high range (j > n):
        tau_j - tau_{j-1} sigma_1 + ... + (-1)^n tau_{j-n} sigma_n = 0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Identity assertions use relative 1e-10 with an absolute floor of 1e-12:
# double precision leaves ample headroom at desk-scale condition numbers.
REL_TOL = 1e-10
ABS_TOL = 1e-12

# tau-vectors used to probe that a functional is not identically zero.
_PROBE_TAUS = (0.0, 1.0, -1.0, 0.5, 2.0, -3.0, 7.5)


def _tols(scale: float) -> float:
    return max(ABS_TOL, REL_TOL * abs(scale))


@dataclass(frozen=True)
class PrincipalCurvatureSpectrum:
    """Eigenvalues of the Weingarten operator at a point of a leaf.

    ``k`` holds the n principal curvatures with respect to the unit normal.
    Every symmetric-function operation is insensitive to their order.
    """

    k: tuple[float, ...]

    def __post_init__(self):
        k = tuple(float(v) for v in self.k)
        if len(k) < 1:
            raise ValueError("spectrum needs at least one principal curvature")
        if not all(np.isfinite(k)):
            raise ValueError("principal curvatures must be finite")
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return len(self.k)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float)


@dataclass(frozen=True)
class SymmetricInvariants:
    """A consistent (tau, sigma) pair for an n-dimensional leaf.

    Construction validates both Newton recurrences, so holding an instance is
    proof (to tolerance) that the two lists describe the same spectrum.
    """

    n: int
    tau: tuple[float, ...]
    sigma: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("leaf dimension must be >= 1")
        if len(self.tau) < self.n:
            raise ValueError("need at least tau_1..tau_n")
        if len(self.sigma) != self.n:
            raise ValueError("sigma must have exactly n entries")
        dev = newton_defect(self.tau, self.sigma, self.n)
        scale = max(1.0, max(abs(t) for t in self.tau))
        if dev > _tols(scale):
            raise ValueError(
                f"tau/sigma violate the Newton recurrences (defect {dev:.3e})"
            )


def newton_defect(tau: Sequence[float], sigma: Sequence[float], n: int) -> float:
    """Largest violation of either Newton recurrence over the given entries."""
    tau = np.asarray(tau, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    worst = 0.0
    for j in range(1, len(tau) + 1):
        acc = tau[j - 1]
        if j <= n:
            for i in range(1, j):
                acc += (-1) ** i * tau[j - i - 1] * sigma[i - 1]
            acc += (-1) ** j * j * sigma[j - 1]
        else:
            for i in range(1, n + 1):
                acc += (-1) ** i * tau[j - i - 1] * sigma[i - 1]
        worst = max(worst, abs(acc))
    return worst


@dataclass(frozen=True)
class FlowFunctional:
    """Coefficient functions f_0..f_{n-1} of the leafwise deformation tensor.

    Each callback receives the tau-vector as an ndarray whose final axis has
    length n (tau[..., j] is tau_{j+1}) and must evaluate elementwise over any
    leading axes.  ``tags`` carry short display strings for reports.
    """

    n: int
    f: tuple[Callable[[np.ndarray], np.ndarray], ...]
    tags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("leaf dimension must be >= 1")
        if len(self.f) != self.n:
            raise ValueError(f"need exactly n={self.n} coefficient functions")
        if not self.tags:
            object.__setattr__(self, "tags", tuple(f"f{j}" for j in range(self.n)))
        if len(self.tags) != self.n:
            raise ValueError("tags must match the coefficient list")
        if not self._nonzero_somewhere():
            raise ValueError("all coefficient functions vanish on the probe set")

    def _nonzero_somewhere(self) -> bool:
        for fj in self.f:
            for t in _PROBE_TAUS:
                tau = np.full(self.n, t)
                if abs(float(fj(tau))) > 0.0:
                    return True
        return False

    def evaluate(self, tau: np.ndarray) -> np.ndarray:
        """Stack f_j(tau) along a new final axis; tau has shape (..., n)."""
        tau = np.asarray(tau, dtype=float)
        vals = [np.broadcast_to(np.asarray(fj(tau), dtype=float), tau.shape[:-1])
                for fj in self.f]
        return np.stack(vals, axis=-1)


def power_sums(spec: PrincipalCurvatureSpectrum, m: int) -> np.ndarray:
    """tau_1..tau_m of the spectrum; tau_0 = n is implied, not returned."""
    if m < 1:
        raise ValueError("m must be >= 1")
    k = spec.as_array()
    return np.array([np.sum(k ** j) for j in range(1, m + 1)])


def elementary_from_power(tau, n: int) -> np.ndarray:
    """sigma_1..sigma_n from tau_1..tau_n via the low-range Newton recurrence.

    ``tau`` may carry leading batch axes; the recurrence runs on the last one.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.shape[-1] < n:
        raise ValueError(f"need at least {n} power sums, got {tau.shape[-1]}")
    sigma = np.zeros(tau.shape[:-1] + (n,))
    for j in range(1, n + 1):
        acc = tau[..., j - 1].copy()
        for i in range(1, j):
            acc += (-1) ** i * tau[..., j - i - 1] * sigma[..., i - 1]
        sigma[..., j - 1] = (-1) ** (j + 1) * acc / j
    return sigma


def extend_power(tau, sigma, m: int, n: int | None = None) -> np.ndarray:
    """tau_{n+1}..tau_m from (tau_1..tau_n, sigma_1..sigma_n).

    The inputs must already satisfy the Newton recurrences; inconsistent data
    is rejected with the measured defect.  Batch axes are allowed.
    """
    tau = np.asarray(tau, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if n is None:
        n = sigma.shape[-1]
    if m <= n:
        raise ValueError(f"m={m} must exceed n={n}")
    if tau.ndim == 1 and sigma.ndim == 1:
        dev = newton_defect(tau, sigma, n)
        scale = max(1.0, float(np.max(np.abs(tau))))
        if dev > 100.0 * _tols(scale):
            raise ValueError(
                f"inconsistent tau/sigma pair (Newton defect {dev:.3e} "
                f"exceeds tolerance {100.0 * _tols(scale):.3e})"
            )
    seeded = min(tau.shape[-1], m)
    full = np.zeros(np.broadcast_shapes(tau.shape[:-1], sigma.shape[:-1]) + (m,))
    full[..., :seeded] = tau[..., :seeded]
    for j in range(max(n, seeded) + 1, m + 1):
        acc = np.zeros(full.shape[:-1])
        for i in range(1, n + 1):
            acc += (-1) ** (i + 1) * sigma[..., i - 1] * full[..., j - i - 1]
        full[..., j - 1] = acc
    return full[..., n:]


def power_sums_with_tau0(tau, n: int, m: int) -> np.ndarray:
    """(tau_0, tau_1, ..., tau_m) with tau_0 = n, extending beyond n as needed.

    Convenience for PDE kernels that index the recurrence from zero; ``tau``
    holds tau_1..tau_n with arbitrary leading axes.
    """
    tau = np.asarray(tau, dtype=float)
    if m > n:
        sigma = elementary_from_power(tau, n)
        ext = extend_power(tau, sigma, m, n)
        body = np.concatenate([tau[..., :n], ext], axis=-1)
    else:
        body = tau[..., :m]
    t0 = np.full(body.shape[:-1] + (1,), float(n))
    return np.concatenate([t0, body], axis=-1)


def umbilical_tau(n: int, lam) -> np.ndarray:
    """tau-vector (n*lam, n*lam^2, ..., n*lam^n) of an umbilical spectrum."""
    lam = np.asarray(lam, dtype=float)
    powers = np.stack([lam ** j for j in range(1, n + 1)], axis=-1)
    return n * powers


def psi_of_lambda(F: FlowFunctional, lam):
    """Scalar flow speed of the umbilical reduction.

    psi(lam) = sum_j f_j(n lam, n lam^2, ..., n lam^n) lam^j.  Vectorized over
    ``lam`` of any shape.
    """
    lam = np.asarray(lam, dtype=float)
    tau = umbilical_tau(F.n, lam)
    coeffs = F.evaluate(tau)
    lam_pows = np.stack([lam ** j for j in range(F.n)], axis=-1)
    out = np.sum(coeffs * lam_pows, axis=-1)
    return out if out.ndim else float(out)


def psi_prime(F: FlowFunctional, lam):
    """d psi / d lam by central difference with step 1e-6 * max(1, |lam|)."""
    lam = np.asarray(lam, dtype=float)
    h = 1e-6 * np.maximum(1.0, np.abs(lam))
    out = (psi_of_lambda(F, lam + h) - psi_of_lambda(F, lam - h)) / (2.0 * h)
    return out if np.ndim(out) else float(out)


def assemble_h_eigen(spec: PrincipalCurvatureSpectrum, F: FlowFunctional) -> np.ndarray:
    """Eigenvalues of the deformation tensor in the principal frame.

    h_i = sum_j f_j(tau) k_i**j with tau = power_sums(spec, n).
    """
    if F.n != spec.n:
        raise ValueError(f"functional is for n={F.n}, spectrum has n={spec.n}")
    k = spec.as_array()
    tau = power_sums(spec, spec.n)
    coeffs = F.evaluate(tau)
    return sum(coeffs[j] * k ** j for j in range(spec.n))


def conformal_shift(spec: PrincipalCurvatureSpectrum, c: float) -> PrincipalCurvatureSpectrum:
    """Spectrum after a leafwise conformal change whose normal log-derivative is c."""
    return PrincipalCurvatureSpectrum(tuple(ki - c for ki in spec.k))


def extrinsic_ricci_eigen(spec: PrincipalCurvatureSpectrum) -> np.ndarray:
    """Eigenvalues tau_1 k_i - k_i^2 of the extrinsic Ricci tensor."""
    k = spec.as_array()
    return float(np.sum(k)) * k - k ** 2


def extrinsic_scalar(spec: PrincipalCurvatureSpectrum) -> float:
    """Extrinsic scalar curvature tau_1^2 - tau_2 (equals 2 sigma_2)."""
    tau = power_sums(spec, max(2, spec.n))
    value = tau[0] ** 2 - tau[1]
    if spec.n >= 2:
        sigma = elementary_from_power(tau[:spec.n], spec.n)
        if abs(value - 2.0 * sigma[1]) > _tols(max(abs(value), abs(2 * sigma[1]))) * 10:
            raise AssertionError(
                f"tau_1^2 - tau_2 = {value!r} disagrees with 2 sigma_2 = {2 * sigma[1]!r}"
            )
    return float(value)


@dataclass(frozen=True)
class RicciFlatVerdict:
    """Outcome of the extrinsic-Ricci-flat test at a point.

    ``totally_geodesic`` is reported separately from ``flat``: vanishing of
    the extrinsic Ricci eigenvalues forces k = 0 except for the rank-one
    spectra (c, 0, ..., 0), so the implication flat => totally geodesic is
    checked, never assumed.
    """

    flat: bool
    totally_geodesic: bool | None
    max_ricci_eigen: float
    max_curvature: float

    @property
    def verdict(self) -> str:
        if not self.flat:
            return "not_flat"
        return "flat+totally_geodesic" if self.totally_geodesic else "flat"


def classify_extrinsic_ricci_flat(
    spec: PrincipalCurvatureSpectrum, tol: float
) -> RicciFlatVerdict:
    """Decide whether the extrinsic Ricci tensor vanishes at this spectrum."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    ric = extrinsic_ricci_eigen(spec)
    max_ric = float(np.max(np.abs(ric)))
    max_k = float(np.max(np.abs(spec.as_array())))
    flat = max_ric <= tol
    return RicciFlatVerdict(
        flat=flat,
        totally_geodesic=(max_k <= tol) if flat else None,
        max_ricci_eigen=max_ric,
        max_curvature=max_k,
    )
