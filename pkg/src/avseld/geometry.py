"""Direction helpers shared by the label, ensemble and metric code.

Azimuth is counter-clockwise from the front (x axis), elevation is positive
upwards; both in degrees.
"""
import numpy as np


def wrap_azimuth(az):
    """Wrap degrees into [-180, 180)."""
    return (np.asarray(az, dtype=float) + 180.0) % 360.0 - 180.0


def sph_to_cart(az, el):
    az = np.radians(az)
    el = np.radians(el)
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def cart_to_sph(xyz):
    """Unit-normalize ``xyz`` (..., 3) and return (azimuth, elevation) in degrees."""
    xyz = np.asarray(xyz, dtype=float)
    n = np.linalg.norm(xyz, axis=-1, keepdims=True)
    u = xyz / np.where(n > 0, n, 1.0)
    az = np.degrees(np.arctan2(u[..., 1], u[..., 0]))
    el = np.degrees(np.arcsin(np.clip(u[..., 2], -1.0, 1.0)))
    return wrap_azimuth(az), el


def angular_distance(a, b):
    """Great-circle angle in degrees between (az, el) pairs ``a`` and ``b``."""
    return vector_angle(sph_to_cart(*a), sph_to_cart(*b))


def vector_angle(u, v):
    """Angle in degrees between vectors ``u`` and ``v`` (..., 3).

    atan2 form: arccos of the dot product loses about 1e-6 degrees of
    resolution near zero.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    return np.degrees(np.arctan2(cross, np.sum(u * v, axis=-1)))
