"""Microphone array geometry, spherical coordinates, and plane-wave steering vectors.

Coordinate convention: elevation ``theta`` is measured downward from the
z-axis (colatitude, 0..pi) and azimuth ``phi`` counterclockwise from the
x-axis (0..2pi).  A point at distance ``r`` in direction ``(theta, phi)``
has Cartesian coordinates
``(r cos(phi) sin(theta), r sin(phi) sin(theta), r cos(theta))``.

The wave-number vector of a plane wave arriving from direction ``psi``
points opposite to the direction of arrival, ``k_vec = -k * unit(psi)``,
so a steering-vector entry is ``exp(-1j * dot(k_vec, mic_position))``.
The sign convention matters: a mic displaced toward the source leads in
phase (positive phase angle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SphDirection:
    """A direction on the sphere: colatitude ``theta``, azimuth ``phi``.

    ``phi`` is normalized into [0, 2pi); ``theta`` must lie in [0, pi].
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must be in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)

    def unit_vector(self) -> np.ndarray:
        """Unit vector pointing along this direction."""
        st = math.sin(self.theta)
        return np.array(
            [math.cos(self.phi) * st, math.sin(self.phi) * st, math.cos(self.theta)]
        )


@dataclass(frozen=True)
class PlaneWaveSource:
    """A far-field plane wave: direction of propagation and complex amplitude."""

    direction: SphDirection
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (math.isfinite(self.amplitude.real) and math.isfinite(self.amplitude.imag)):
            raise ValueError("plane-wave amplitude must be finite")


@dataclass(frozen=True)
class ArrayGeometry:
    """Positions of the microphones of an array, in spherical coordinates.

    ``mics`` is a sequence of ``(radius, theta, phi)`` triples relative to
    the array center.
    """

    mics: tuple[tuple[float, float, float], ...]
    _cartesian: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mics = tuple((float(r), float(t), float(p)) for (r, t, p) in self.mics)
        if len(mics) < 1:
            raise ValueError("array must have at least one microphone")
        for r, t, p in mics:
            if r < 0:
                raise ValueError(f"microphone radius must be >= 0, got {r}")
            SphDirection(t, p)  # validates angle ranges
        object.__setattr__(self, "mics", mics)
        pos = np.array([sph_to_cart(r, SphDirection(t, p)) for r, t, p in mics])
        object.__setattr__(self, "_cartesian", pos)

    @property
    def count(self) -> int:
        return len(self.mics)

    @property
    def radii(self) -> np.ndarray:
        return np.array([m[0] for m in self.mics])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([m[1] for m in self.mics])

    @property
    def phis(self) -> np.ndarray:
        return np.array([m[2] for m in self.mics])

    def positions(self) -> np.ndarray:
        """Cartesian mic positions relative to the array center, shape (I, 3)."""
        return self._cartesian.copy()

    def to_dict(self) -> dict:
        return {"mics": [list(m) for m in self.mics]}

    @classmethod
    def from_dict(cls, d: dict) -> "ArrayGeometry":
        return cls(mics=tuple(tuple(m) for m in d["mics"]))


def uniform_circular_array(count: int, radius: float) -> ArrayGeometry:
    """Uniform circular array in the horizontal plane (theta = pi/2).

    Mic ``i`` sits at azimuth ``2*pi*i/count``; mic 0 lies on the x-axis.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mics = tuple(
        (radius, math.pi / 2.0, TWO_PI * i / count) for i in range(count)
    )
    return ArrayGeometry(mics=mics)


def sph_to_cart(r: float, direction: SphDirection) -> np.ndarray:
    """Convert spherical ``(r, theta, phi)`` to Cartesian ``(x, y, z)``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return r * direction.unit_vector()


def cart_to_sph(x: float, y: float, z: float) -> tuple[float, SphDirection]:
    """Convert Cartesian coordinates to ``(r, SphDirection)``.

    The origin maps to ``(0, theta=0, phi=0)`` by convention; points on the
    z-axis get ``phi = 0``.
    """
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        return 0.0, SphDirection(0.0, 0.0)
    theta = math.acos(min(1.0, max(-1.0, z / r)))
    phi = math.atan2(y, x)
    return r, SphDirection(theta, phi % TWO_PI)


def steering_vector(
    wavenumber: float, source_dir: SphDirection, geometry: ArrayGeometry
) -> np.ndarray:
    """Unit-magnitude steering vector of a plane wave over the array.

    Entry ``i`` is ``exp(-1j * dot(k_vec, r_i))`` with
    ``k_vec = -wavenumber * unit(source_dir)``; equivalently
    ``exp(+1j * wavenumber * dot(unit(source_dir), r_i))``.

    Parameters
    ----------
    wavenumber : float
        Wave number ``2*pi*f/c`` in rad/m, >= 0.
    source_dir : SphDirection
        Direction the wave arrives from.
    geometry : ArrayGeometry
        Microphone positions.

    Returns
    -------
    np.ndarray
        Complex vector of length ``geometry.count``, all entries of
        magnitude 1.
    """
    if wavenumber < 0:
        raise ValueError("wavenumber must be >= 0")
    u = source_dir.unit_vector()
    phase = wavenumber * (geometry.positions() @ u)
    return np.exp(1j * phase)
