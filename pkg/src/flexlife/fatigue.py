"""Damage accumulation and lifetime estimation on critical cutting planes.

Every rainflow bin is mapped to a damage increment: the bin's mean stress
enters the Haigh diagram to give the fatigue-resistant amplitude, the
synthetic Woehler line anchored at (2e4 cycles, R_e) and (2e6 cycles,
sigma_Da) gives the allowable cycle count for the bin's amplitude, and the
increments accumulate linearly (Palmgren-Miner). The damage is maximized
over a set of cutting-plane angles; the lifetime of one task execution of
duration t_task is t_task / D_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rainflow
from .stress import StressHistory, tresca_history

N_LCF_DEFAULT = 2.0e4
N_HCF_DEFAULT = 2.0e6


@dataclass(frozen=True)
class FatigueMaterial:
    """Haigh polyline from (0, sigma_w) to (R_e, 0) plus Woehler anchors."""

    yield_strength: float  # R_e, Pa
    fatigue_strength: float  # sigma_w (fully reversed), Pa
    haigh: tuple[tuple[float, float], ...] = ()
    n_lcf: float = N_LCF_DEFAULT
    n_hcf: float = N_HCF_DEFAULT

    def __post_init__(self):
        re_, sw = self.yield_strength, self.fatigue_strength
        if not (0.0 < sw < re_):
            raise ValueError(f"need 0 < sigma_w < R_e, got sigma_w={sw}, R_e={re_}")
        if not (1.0 < self.n_lcf < self.n_hcf):
            raise ValueError("Woehler anchors must satisfy 1 < n_lcf < n_hcf")
        pts = tuple((float(m), float(a)) for m, a in self.haigh) or ((0.0, sw), (re_, 0.0))
        if pts[0] != (0.0, sw) or pts[-1] != (re_, 0.0):
            raise ValueError("Haigh polyline must run from (0, sigma_w) to (R_e, 0)")
        means = [p[0] for p in pts]
        amps = [p[1] for p in pts]
        if any(b <= a for a, b in zip(means, means[1:])):
            raise ValueError("Haigh mean stresses must be strictly increasing")
        if any(b > a for a, b in zip(amps, amps[1:])):
            raise ValueError("Haigh amplitude limits must be non-increasing")
        object.__setattr__(self, "haigh", pts)


def haigh_fatigue_strength(mat: FatigueMaterial, sigma_m: float) -> float:
    """Allowable amplitude for a mean stress, linearly interpolated.

    Negative means clamp to the fully reversed strength (no compressive
    credit); means at or beyond the yield strength allow zero amplitude.
    """
    if sigma_m <= 0.0:
        return mat.fatigue_strength
    if sigma_m >= mat.yield_strength:
        return 0.0
    means = np.array([p[0] for p in mat.haigh])
    amps = np.array([p[1] for p in mat.haigh])
    return float(np.interp(sigma_m, means, amps))


def woehler_cycles(mat: FatigueMaterial, sigma_a: float, sigma_da: float) -> float:
    """Fatigue life N at amplitude sigma_a on the synthetic Woehler line.

    The line is straight in log-log coordinates through (n_lcf, R_e) and
    (n_hcf, sigma_da). Amplitudes below sigma_da do not consume life
    (infinite N); amplitudes at or above R_e saturate at n_lcf.
    """
    if sigma_da <= 0.0:
        raise ValueError("fatigue-resistant amplitude must be positive (degenerate Haigh data)")
    if sigma_a < 0.0:
        raise ValueError("stress amplitude must be non-negative")
    if sigma_a < sigma_da:
        return math.inf
    if sigma_a == sigma_da:
        return mat.n_hcf
    if sigma_a >= mat.yield_strength:
        return mat.n_lcf
    re_ = mat.yield_strength
    slope = (math.log(mat.n_hcf) - math.log(mat.n_lcf)) / (math.log(re_) - math.log(sigma_da))
    return math.exp(math.log(mat.n_lcf) + slope * (math.log(re_) - math.log(sigma_a)))


def damage_increment(n_counted: float, n_allowed: float) -> float:
    """Miner quotient of one rainflow bin; zero for infinite life."""
    if n_counted < 0.0:
        raise ValueError("cycle count must be non-negative")
    if math.isinf(n_allowed):
        return 0.0
    return n_counted / n_allowed


def accumulate(matrix: rainflow.RainflowMatrix, mat: FatigueMaterial) -> float:
    """Linear damage sum over all occupied rainflow bins (per task run).

    Bin centers are the representative (mean, amplitude) of each load
    collective. Bins whose mean reaches the yield strength have zero
    allowable amplitude; their life saturates at the low-cycle anchor
    (the continuous limit of the Woehler line).
    """
    damage = 0.0
    m_centers = matrix.mean_centers
    a_centers = matrix.amp_centers
    occupied = np.argwhere(matrix.counts > 0.0)
    for i, j in occupied:
        amp = a_centers[j]
        if amp <= 0.0:
            continue
        sigma_da = haigh_fatigue_strength(mat, m_centers[i])
        if sigma_da <= 0.0:
            n_allowed = mat.n_lcf
        else:
            n_allowed = woehler_cycles(mat, amp, sigma_da)
        damage += damage_increment(matrix.counts[i, j], n_allowed)
    return damage


def angle_grid(n_angles: int = 73) -> np.ndarray:
    """Uniform cutting-plane angles covering [0, pi] (pi-periodic)."""
    if n_angles < 1:
        raise ValueError("need at least one cutting angle")
    return np.linspace(0.0, math.pi, n_angles)


@dataclass(frozen=True)
class DamageReport:
    """Per-angle damage, its maximum and the resulting lifetime estimate."""

    angles: np.ndarray
    damage: np.ndarray
    d_max: float
    phi_critical: float
    t_task: float
    t_life_seconds: float  # inf when no damage accumulates
    finite_life: bool
    binning: tuple[int, int] = (32, 32)
    meta: dict = field(default_factory=dict)

    @property
    def t_life_hours(self) -> float:
        return self.t_life_seconds / 3600.0


def critical_plane_lifetime(
    history: StressHistory,
    angles,
    mat: FatigueMaterial,
    t_task: float,
    n_mean_bins: int = 32,
    n_amp_bins: int = 32,
    hysteresis_gate: float = 0.0,
    include_residue: bool = True,
) -> DamageReport:
    """Damage of one task execution, maximized over cutting planes.

    For every angle the Tresca equivalent history is rainflow-counted,
    binned and accumulated; the worst plane defines D_max and the
    lifetime t_task / D_max (infinite if nothing exceeds the fatigue
    strength).
    """
    angles = np.asarray(angles, dtype=float)
    if angles.size == 0:
        raise ValueError("angle set must not be empty")
    if t_task <= 0.0:
        raise ValueError("t_task must be positive")
    damage = np.empty(angles.size)
    for k, phi in enumerate(angles):
        equivalent = tresca_history(history, phi)
        series = rainflow.extract_extrema(history.times, equivalent, hysteresis_gate)
        cycles = rainflow.count_cycles(series, include_residue=include_residue)
        matrix = rainflow.bin_cycles(cycles, n_mean_bins, n_amp_bins)
        damage[k] = accumulate(matrix, mat)
    k_max = int(np.argmax(damage))
    d_max = float(damage[k_max])
    finite = d_max > 0.0
    return DamageReport(
        angles=angles,
        damage=damage,
        d_max=d_max,
        phi_critical=float(angles[k_max]),
        t_task=float(t_task),
        t_life_seconds=(t_task / d_max) if finite else math.inf,
        finite_life=finite,
        binning=(n_mean_bins, n_amp_bins),
    )
