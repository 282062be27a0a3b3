"""Elliptic reference orbit kinematics and the transition matrices of
linearized relative motion in the true-anomaly domain.

States are scaled local-frame coordinates (rho times the physical offsets),
ordered (x, y, z, x', y', z') with primes denoting derivatives with respect
to true anomaly.  Positions carry km, derivatives km/rad.
"""

import math
from dataclasses import dataclass

import numpy as np

# A 6x6 transition matrix in the (x, y, z, x', y', z') ordering.  All
# builders below accept a scalar anomaly or an array and return matching
# (..., 6, 6) stacks.
Stm6 = np.ndarray


@dataclass(frozen=True)
class Tolerances:
    """Central tolerances for the matrix identity checks used by the tests."""

    identity: float = 1e-10
    composition: float = 1e-9
    oracle: float = 1e-8


@dataclass(frozen=True)
class ReferenceOrbit:
    """Elliptic reference orbit: mu (km^3/s^2), semilatus rectum p (km),
    eccentricity e (dimensionless)."""

    mu: float
    p: float
    e: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu!r}")
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p!r}")
        # the linearized relative-motion model is only trusted at low eccentricity
        if not 0.0 <= self.e <= 0.8:
            raise ValueError(f"e must lie in [0, 0.8], got {self.e!r}")

    @property
    def n(self):
        """Rate constant sqrt(mu/p^3), rad/s."""
        return math.sqrt(self.mu / self.p**3)

    @property
    def beta(self):
        """Control scaling 1/n^2, s^2."""
        return 1.0 / (self.n * self.n)

    @property
    def a(self):
        """Semimajor axis, km."""
        return self.p / (1.0 - self.e * self.e)


@dataclass(frozen=True)
class AnomalyPoint:
    """A true anomaly together with its continued eccentric anomaly and rho."""

    f: float
    E: float
    rho: float


def anomaly_point(orbit, f):
    """Bundle f with E(f) and rho(f)."""
    return AnomalyPoint(
        f=float(f),
        E=float(true_to_eccentric(orbit, f)),
        rho=float(rho(orbit, f)),
    )


def rho(orbit, f):
    """1 + e cos f."""
    return 1.0 + orbit.e * np.cos(f)


def true_to_eccentric(orbit, f):
    """Eccentric anomaly on the branch that keeps E - f inside (-pi, pi),
    so multi-revolution anomalies continue instead of wrapping."""
    e = orbit.e
    f = np.asarray(f, dtype=float)
    r = 1.0 + e * np.cos(f)
    wrapped = np.arctan2(np.sqrt(1.0 - e * e) * np.sin(f) / r, (np.cos(f) + e) / r)
    out = wrapped + f - np.arctan2(np.sin(f), np.cos(f))
    return out if out.ndim else float(out)


def eccentric_to_true(orbit, E):
    """Inverse of true_to_eccentric on the same branch."""
    e = orbit.e
    E = np.asarray(E, dtype=float)
    den = 1.0 - e * np.cos(E)
    wrapped = np.arctan2(np.sqrt(1.0 - e * e) * np.sin(E) / den, (np.cos(E) - e) / den)
    out = wrapped + E - np.arctan2(np.sin(E), np.cos(E))
    return out if out.ndim else float(out)


def secular_l(orbit, f):
    """Secular term L(f) = (E - e sin E) / (1 - e^2)^(3/2), continued in f."""
    e = orbit.e
    E = true_to_eccentric(orbit, f)
    return (E - e * np.sin(E)) / (1.0 - e * e) ** 1.5


def _phi_terms(orbit, f):
    """Scalar building blocks of the fundamental matrix, vectorized over f."""
    e = orbit.e
    q = 1.0 - e * e
    sf = np.sin(f)
    cf = np.cos(f)
    r = 1.0 + e * cf
    E = np.asarray(true_to_eccentric(orbit, f))
    lf = (E - e * np.sin(E)) / q**1.5
    p1 = r * sf
    p1p = r * cf - e * sf * sf
    s1 = -cf - 0.5 * e * cf * cf
    # dl collects the mixed secular/periodic factor shared by p2, p3
    dl = sf * (2.0 + e * cf) / (r * r) - 3.0 * e * lf
    p2 = e * p1 / q * dl - cf / r
    p3 = -p1 / q * dl - cf * cf / r - cf * cf
    p2p = e * p1p / q * dl + e * sf * cf / (r * r) + sf / r
    s2 = -r * r * dl / (2.0 * q)
    # antiderivative of 2*p3 + 1
    s31 = e * sf * (2.0 + e * cf) / q - 3.0 * r * r * lf / q
    p3p = 2.0 * (p1p * s2 - p2p * s1)
    return sf, cf, p1, p2, p3, p1p, p2p, p3p, s1, s2, s31


def phi(orbit, f):
    """Fundamental matrix of the uncontrolled relative motion at f.

    Columns solve y' = A(f) y in the tilde coordinates; the in-plane part
    mixes the two periodic solutions with the secular one, the out-of-plane
    part is a rotation."""
    f = np.asarray(f, dtype=float)
    sf, cf, p1, p2, p3, p1p, p2p, p3p, s1, s2, s31 = _phi_terms(orbit, f)
    out = np.zeros(f.shape + (6, 6))
    out[..., 0, 0] = p1
    out[..., 0, 1] = p2
    out[..., 0, 2] = p3
    out[..., 1, 0] = -2.0 * s1
    out[..., 1, 1] = -2.0 * s2
    out[..., 1, 2] = -s31
    out[..., 1, 3] = 1.0
    out[..., 2, 4] = cf
    out[..., 2, 5] = sf
    out[..., 3, 0] = p1p
    out[..., 3, 1] = p2p
    out[..., 3, 2] = p3p
    out[..., 4, 0] = -2.0 * p1
    out[..., 4, 1] = -2.0 * p2
    out[..., 4, 2] = -2.0 * p3 - 1.0
    out[..., 5, 4] = -sf
    out[..., 5, 5] = cf
    return out


def phi_inv(orbit, f):
    """Closed-form inverse of phi(f); not a numerical inversion."""
    f = np.asarray(f, dtype=float)
    sf, cf, p1, p2, p3, p1p, p2p, p3p, s1, s2, s31 = _phi_terms(orbit, f)
    out = np.zeros(f.shape + (6, 6))
    out[..., 0, 0] = 4.0 * s2 + p2p
    out[..., 0, 3] = -p2
    out[..., 0, 4] = 2.0 * s2
    out[..., 1, 0] = -4.0 * s1 - p1p
    out[..., 1, 3] = p1
    out[..., 1, 4] = -2.0 * s1
    out[..., 2, 0] = -2.0
    out[..., 2, 4] = -1.0
    out[..., 3, 0] = -2.0 * s31 - p3p
    out[..., 3, 1] = 1.0
    out[..., 3, 3] = p3
    out[..., 3, 4] = -s31
    out[..., 4, 2] = cf
    out[..., 4, 5] = -sf
    out[..., 5, 2] = sf
    out[..., 5, 5] = cf
    return out


def omega11(orbit, f2, f1):
    """State transition matrix of the uncontrolled system from f1 to f2.

    Equal anomalies return the exact identity so that downstream terminal
    conditions hold to the bit."""
    f2 = np.asarray(f2, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    f2b, f1b = np.broadcast_arrays(f2, f1)
    out = phi(orbit, f2b) @ phi_inv(orbit, f1b)
    eq = f2b == f1b
    if np.any(eq):
        out = np.where(eq[..., None, None], np.eye(6), out)
    return out


def omega22(orbit, f2, f1):
    """Costate transition matrix from f1 to f2; equals omega11(f2, f1)^-T."""
    f2 = np.asarray(f2, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    f2b, f1b = np.broadcast_arrays(f2, f1)
    left = np.swapaxes(phi_inv(orbit, f2b), -1, -2)
    right = np.swapaxes(phi(orbit, f1b), -1, -2)
    out = left @ right
    eq = f2b == f1b
    if np.any(eq):
        out = np.where(eq[..., None, None], np.eye(6), out)
    return out
