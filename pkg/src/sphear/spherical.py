"""Spherical harmonics and the discrete spherical harmonics transform (SHT).

The complex orthonormal basis is used throughout:

    Y_n^m(theta, phi) = sqrt((2n+1)/(4pi) * (n-m)!/(n+m)!)
                        * P_n^m(cos theta) * exp(1j*m*phi)

with ``P_n^m`` the unnormalized associated Legendre function including the
Condon-Shortley phase.  The normalization factor is applied exactly once,
here; ``assoc_legendre`` returns the bare function.

Coefficients are stored flat in ACN order, index ``n*n + n + m``, so a
truncation order ``N`` yields ``(N+1)**2`` values
(Y_0^0, Y_1^-1, Y_1^0, Y_1^1, ...).

The discrete analysis over an I-microphone geometry approximates the
continuous sphere integral with equal weights:

    p_nm = (4pi/I) * sum_i p_i * conj(Y_n^m(theta_i, phi_i))

which is accurate when the sampling is close to an equal-weight spherical
quadrature rule for the field's bandwidth; no regularized inversion is
attempted for deficient geometries (a single ring cannot resolve all
orders, and none is claimed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .array import ArrayGeometry, SphDirection

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class ShOrderIndex:
    """Order ``n`` and degree ``m`` of one spherical harmonic, ``|m| <= n``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"order must be >= 0, got {self.n}")
        if abs(self.m) > self.n:
            raise ValueError(f"degree {self.m} out of range for order {self.n}")

    @property
    def flat(self) -> int:
        """Flat (ACN) index ``n*n + n + m``."""
        return self.n * self.n + self.n + self.m

    @classmethod
    def from_flat(cls, index: int) -> "ShOrderIndex":
        if index < 0:
            raise ValueError("flat index must be >= 0")
        n = int(math.isqrt(index))
        return cls(n=n, m=index - n * n - n)


@dataclass
class ShCoeffVector:
    """Spherical-harmonic coefficients up to ``order``, flat ACN layout."""

    order: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.order + 1) ** 2
        if self.values.shape != (expected,):
            raise ValueError(
                f"coefficient vector for order {self.order} must have length "
                f"{expected}, got shape {self.values.shape}"
            )

    def __getitem__(self, idx: ShOrderIndex) -> complex:
        if idx.n > self.order:
            raise IndexError(f"order {idx.n} exceeds truncation order {self.order}")
        return complex(self.values[idx.flat])


def assoc_legendre(n: int, m: int, x):
    """Associated Legendre function P_n^m(x), Condon-Shortley phase included.

    Evaluated by the stable upward recurrence in ``n`` starting from the
    closed form for P_m^m.  Only ``0 <= m <= n`` is accepted; negative
    degrees are the caller's job via the conjugation symmetry of Y_n^m.

    Parameters
    ----------
    n, m : int
        Order and degree, ``0 <= m <= n``.
    x : float or np.ndarray
        Argument(s) in [-1, 1].

    Returns
    -------
    float or np.ndarray
        P_n^m evaluated at ``x``.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    if not 0 <= m <= n:
        raise ValueError(f"degree must satisfy 0 <= m <= n, got m={m}, n={n}")
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("argument must lie in [-1, 1]")

    # P_m^m = (-1)^m (2m-1)!! (1-x^2)^(m/2)
    pmm = np.ones_like(x)
    if m > 0:
        s = np.sqrt((1.0 - x) * (1.0 + x))
        fact = 1.0
        for _ in range(m):
            pmm = pmm * (-fact) * s
            fact += 2.0
    if n == m:
        return pmm if pmm.ndim else float(pmm)

    pmm1 = x * (2.0 * m + 1.0) * pmm  # P_{m+1}^m
    if n == m + 1:
        return pmm1 if pmm1.ndim else float(pmm1)

    for ell in range(m + 2, n + 1):
        pmm, pmm1 = pmm1, (
            (2.0 * ell - 1.0) * x * pmm1 - (ell + m - 1.0) * pmm
        ) / (ell - m)
    return pmm1 if pmm1.ndim else float(pmm1)


def _norm_factor(n: int, m: int) -> float:
    # sqrt((2n+1)/(4pi) * (n-m)!/(n+m)!) for 0 <= m <= n
    log_ratio = math.lgamma(n - m + 1) - math.lgamma(n + m + 1)
    return math.sqrt((2 * n + 1) / FOUR_PI * math.exp(log_ratio))


def sph_harm_eval(idx: ShOrderIndex, direction: SphDirection) -> complex:
    """Evaluate the orthonormal complex spherical harmonic Y_n^m.

    Negative degrees use ``Y_n^{-m} = (-1)^m * conj(Y_n^m)``.
    """
    n, m = idx.n, idx.m
    if m < 0:
        pos = sph_harm_eval(ShOrderIndex(n, -m), direction)
        return (-1) ** (-m) * pos.conjugate()
    p = assoc_legendre(n, m, math.cos(direction.theta))
    return _norm_factor(n, m) * p * complex(
        math.cos(m * direction.phi), math.sin(m * direction.phi)
    )


def sh_basis_matrix(order: int, thetas, phis) -> np.ndarray:
    """Matrix of Y_n^m values over a set of directions.

    Returns shape ``(len(thetas), (order+1)**2)`` with columns in flat ACN
    order.  Used to vectorize analysis/synthesis over many directions.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
    phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
    if thetas.shape != phis.shape:
        raise ValueError("thetas and phis must have matching shapes")
    x = np.cos(thetas)
    out = np.empty((thetas.size, (order + 1) ** 2), dtype=np.complex128)
    for n in range(order + 1):
        for m in range(0, n + 1):
            ynm = _norm_factor(n, m) * assoc_legendre(n, m, x) * np.exp(1j * m * phis)
            out[:, n * n + n + m] = ynm
            if m > 0:
                out[:, n * n + n - m] = (-1) ** m * np.conj(ynm)
    return out


def sht_forward(samples, geometry: ArrayGeometry, order: int) -> ShCoeffVector:
    """Discrete spherical harmonics analysis of one snapshot over an array.

    Parameters
    ----------
    samples : array_like
        Complex pressure values, one per microphone.
    geometry : ArrayGeometry
        Microphone directions (radii are not used by the transform).
    order : int
        Truncation order N; ``(N+1)**2`` coefficients are produced.

    Returns
    -------
    ShCoeffVector
        ``p_nm = (4pi/I) * sum_i samples[i] * conj(Y_n^m(theta_i, phi_i))``.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.shape != (geometry.count,):
        raise ValueError(
            f"expected {geometry.count} samples to match the geometry, "
            f"got shape {samples.shape}"
        )
    basis = sh_basis_matrix(order, geometry.thetas, geometry.phis)
    values = (FOUR_PI / geometry.count) * (np.conj(basis).T @ samples)
    return ShCoeffVector(order=order, values=values)


def sht_inverse(coeffs: ShCoeffVector, direction: SphDirection) -> complex:
    """Synthesize the field value at one direction from its coefficients."""
    basis = sh_basis_matrix(coeffs.order, [direction.theta], [direction.phi])
    return complex(basis[0] @ coeffs.values)


def sht_quadrature_oracle(
    field: Callable[[np.ndarray, np.ndarray], np.ndarray],
    idx: ShOrderIndex,
    n_theta: int = 64,
    n_phi: int = 128,
) -> complex:
    """Continuous-integral SHT coefficient by numerical quadrature.

    Approximates ``integral p(theta,phi) conj(Y_n^m) sin(theta) dtheta dphi``
    on a product grid: Gauss-Legendre nodes in cos(theta) (which absorb the
    sin(theta) weight exactly) and a uniform periodic rule in phi.  For
    band-limited fields this is exact to round-off once the grid resolves
    the bandwidth; it serves as the reference against which the discrete
    array-side transform is validated.

    Parameters
    ----------
    field : callable
        Vectorized ``field(thetas, phis) -> complex`` accepting broadcast
        arrays.
    idx : ShOrderIndex
        Coefficient to extract.
    n_theta, n_phi : int
        Grid resolution; each must be at least ``2*(n+1)`` for the
        requested order.
    """
    min_pts = 2 * (idx.n + 1)
    if n_theta < min_pts or n_phi < min_pts:
        raise ValueError(
            f"grid too coarse for order {idx.n}: need >= {min_pts} points "
            f"per angular dimension, got {n_theta} x {n_phi}"
        )
    x, w = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(x)
    phis = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    tg, pg = np.meshgrid(thetas, phis, indexing="ij")
    values = np.asarray(field(tg, pg), dtype=np.complex128)
    if values.shape != tg.shape:
        raise ValueError("field must return one value per grid point")

    n, m = idx.n, idx.m
    mm = abs(m)
    ynm = _norm_factor(n, mm) * assoc_legendre(n, mm, np.cos(tg)) * np.exp(1j * mm * pg)
    if m < 0:
        ynm = (-1) ** mm * np.conj(ynm)
    phi_sum = (values * np.conj(ynm)).sum(axis=1) * (2.0 * math.pi / n_phi)
    return complex(np.dot(w, phi_sum))


def far_field_min_distance(array_radius: float, freq: float, sound_speed: float = 343.0) -> float:
    """Minimum source distance for the plane-wave (far-field) assumption.

    Returns ``8 * r^2 * f / c``; a source farther than this has negligible
    wavefront curvature over the aperture.
    """
    if array_radius < 0 or freq < 0:
        raise ValueError("array_radius and freq must be >= 0")
    if sound_speed <= 0:
        raise ValueError("sound_speed must be > 0")
    return 8.0 * array_radius * array_radius * freq / sound_speed
