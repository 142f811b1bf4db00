"""Plane stress at a material point of the thin-walled link wall.

Curvature histories at the critical station map linearly to the normal
stress sigma_xx and, by projecting the two Saint-Venant torsion shear
components onto the local wall tangent, to a single in-plane shear
sigma_xy. Cutting-plane rotation and the Tresca equivalent stress act on
that plane stress state (sigma_yy = 0 at the free surface).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .beam import CrossSection, Material

_MIDLINE_RTOL = 1e-6


@dataclass(frozen=True)
class MaterialPoint:
    """Point on the section wall midline where stresses are evaluated.

    Coordinates (y, z) lie on the midline square of half-width (a-t)/2;
    the tangent is the unit wall direction, counterclockwise around the
    section when viewed along +x.
    """

    xi: float
    y: float
    z: float
    tangent: tuple[float, float]


def _face_tangent(y: float, z: float, half: float) -> tuple[float, float]:
    # counterclockwise around the section; corners resolve to the z-face
    if abs(abs(z) - half) <= abs(abs(y) - half):
        return (-1.0, 0.0) if z > 0 else (1.0, 0.0)
    return (0.0, 1.0) if y > 0 else (0.0, -1.0)


def material_point(
    section: CrossSection,
    xi: float,
    y: float,
    z: float,
    tangent: tuple[float, float] | None = None,
) -> MaterialPoint:
    """Validated wall-midline point; tangent defaults to the face direction."""
    half = 0.5 * (section.a - section.t)
    on_wall = abs(max(abs(y), abs(z)) - half) <= _MIDLINE_RTOL * section.a
    inside = max(abs(y), abs(z)) <= half * (1.0 + _MIDLINE_RTOL)
    if not (on_wall and inside):
        raise ValueError(
            f"point (y={y}, z={z}) is not on the wall midline (half-width {half:.6g})"
        )
    if tangent is None:
        tangent = _face_tangent(y, z, half)
    norm = float(np.hypot(*tangent))
    if norm == 0.0:
        raise ValueError("tangent must be a non-zero 2-vector")
    return MaterialPoint(xi=xi, y=y, z=z, tangent=(tangent[0] / norm, tangent[1] / norm))


def default_stress_point(section: CrossSection, xi_crit: float = 0.0) -> MaterialPoint:
    """Outer mid-wall point of the top face, where bending stress peaks."""
    return material_point(section, xi_crit, 0.0, 0.5 * (section.a - section.t))


@dataclass(frozen=True)
class StressHistory:
    """Sampled plane-stress components at one material point."""

    times: np.ndarray
    sigma_xx: np.ndarray
    sigma_xy: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        sxx = np.asarray(self.sigma_xx, dtype=float)
        sxy = np.asarray(self.sigma_xy, dtype=float)
        if not (t.shape == sxx.shape == sxy.shape) or t.ndim != 1:
            raise ValueError("times and stress components must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(sxx)) and np.all(np.isfinite(sxy))):
            raise ValueError("stress history contains non-finite values")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sigma_xx", sxx)
        object.__setattr__(self, "sigma_xy", sxy)

    def __len__(self) -> int:
        return self.times.size

    def scaled(self, factor: float) -> "StressHistory":
        return replace(
            self, sigma_xx=self.sigma_xx * factor, sigma_xy=self.sigma_xy * factor
        )


def stresses_from_curvature(
    times, kappa, point: MaterialPoint, mat: Material
) -> StressHistory:
    """Plane stress history from a curvature history (columns theta', v'', w'').

    sigma_xx = E(-v'' y - w'' z); the raw torsion shears (-G theta' z,
    +G theta' y) are projected onto the wall tangent to give sigma_xy.
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 2 or kappa.shape[1] != 3:
        raise ValueError(f"expected curvature history of shape (n, 3), got {kappa.shape}")
    tp, vpp, wpp = kappa[:, 0], kappa[:, 1], kappa[:, 2]
    sxx = mat.E * (-vpp * point.y - wpp * point.z)
    ty, tz = point.tangent
    sxy = (-mat.G * tp * point.z) * ty + (mat.G * tp * point.y) * tz
    return StressHistory(times=np.asarray(times, dtype=float), sigma_xx=sxx, sigma_xy=sxy)


def cutting_plane_stress(sigma_xx, sigma_yy, sigma_xy, phi: float):
    """Normal/shear components (sigma_nn, sigma_nm) on the plane at angle phi."""
    s, c = np.sin(2.0 * phi), np.cos(2.0 * phi)
    half_sum = 0.5 * (np.asarray(sigma_xx) + np.asarray(sigma_yy))
    half_diff = 0.5 * (np.asarray(sigma_xx) - np.asarray(sigma_yy))
    return half_sum + half_diff * c + sigma_xy * s, -half_diff * s + sigma_xy * c


def tau_phi(history: StressHistory, phi: float) -> np.ndarray:
    """Shear stress history on the cutting plane at angle phi (sigma_yy = 0)."""
    return -0.5 * history.sigma_xx * np.sin(2.0 * phi) + history.sigma_xy * np.cos(2.0 * phi)


def tresca_history(history: StressHistory, phi: float) -> np.ndarray:
    """Tresca equivalent stress history: twice the cutting-plane shear."""
    return 2.0 * tau_phi(history, phi)


def write_stress_csv(path, history: StressHistory) -> None:
    with open(path, "w", newline="") as fh:
        _write_stress(fh, history)


def _write_stress(fh: io.TextIOBase, history: StressHistory) -> None:
    writer = csv.writer(fh)
    writer.writerow(["t", "sigma_xx", "sigma_xy"])
    for t, sxx, sxy in zip(history.times, history.sigma_xx, history.sigma_xy):
        writer.writerow([f"{t:.17g}", f"{sxx:.17g}", f"{sxy:.17g}"])


def read_stress_csv(path) -> StressHistory:
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("t", "sigma_xx", "sigma_xy"):
        if col not in (data.dtype.names or ()):
            raise ValueError(f"stress CSV is missing required column '{col}'")
    t = np.atleast_1d(data["t"])
    return StressHistory(
        times=t,
        sigma_xx=np.atleast_1d(data["sigma_xx"]),
        sigma_xy=np.atleast_1d(data["sigma_xy"]),
    )
