# -*- coding: utf-8 -*-
"""
Closed-form a-priori bounds

- blowup_horizon: d_av=0에서 T* = (2/(p−1))(‖φ‖‖φ′‖)^{−(p−1)/2}
- barrier_dav0: Bihari 비교로 얻는 ‖D⁺u(t)‖ 상한
- energy_h1_bound: d_av>0, 1<p<5에서 질량/에너지 보존 + GN(상수 1)로 얻는 ‖D⁺u‖ 상한

All three only use the constant-1 Gagliardo–Nirenberg bound, so no fitted
constants enter.
"""

import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq


def blowup_horizon(l2: float, dplus: float, p: float) -> float:
    """T* = (2/(p−1))(‖φ‖·‖φ′‖)^{−(p−1)/2}, 노름이 0이면 ∞"""
    if p <= 1.0:
        raise ValueError(f"p={p} must exceed 1")
    product = l2 * dplus
    if product <= 0.0:
        return math.inf
    return 2.0 / (p - 1.0) * product ** (-(p - 1.0) / 2.0)


def barrier_dav0(t: float, phi_l2: float, phi_dl2: float, p: float) -> Tuple[float, bool]:
    """
    barrier(t) = (‖φ′‖^{−(p−1)/2} − ((p−1)/2)‖φ‖^{(p−1)/2} t)^{−2/(p−1)}

    Returns (value, finite). t ≥ T*이면 (∞, False)
    예: p=3, ‖φ‖=‖φ′‖=1 → T*=1, barrier(t) = 1/(1−t)
    """
    if t < 0.0:
        raise ValueError(f"t={t} must be nonnegative")
    if phi_l2 <= 0.0 or phi_dl2 <= 0.0:
        raise ValueError("norms must be positive")
    if p <= 1.0:
        raise ValueError(f"p={p} must exceed 1")
    k = (p - 1.0) / 2.0
    base = phi_dl2 ** (-k) - k * phi_l2**k * t
    if base <= 0.0:
        return math.inf, False
    return base ** (-1.0 / k), True


def energy_h1_bound(mass: float, energy: float, d_av: float, p: float) -> Optional[float]:
    """
    ‖D⁺u‖ 상한 (d_av > 0, 1 < p < 5)

    E ≥ (d_av/2)X² − (1/(p+1)) mass^{(p+3)/4} X^{(p−1)/2},  X = ‖D⁺u‖
    이므로 X는 g(X) = 우변 − E ≤ 0 의 최대 근 이하. 그 외 영역은 None
    """
    if d_av <= 0.0 or not (1.0 < p < 5.0):
        return None
    if mass <= 0.0:
        return 0.0
    coefficient = mass ** ((p + 3.0) / 4.0) / (p + 1.0)
    exponent = (p - 1.0) / 2.0

    def g(x: float) -> float:
        return 0.5 * d_av * x * x - coefficient * x**exponent - energy

    upper = 1.0
    while g(upper) <= 0.0:
        upper *= 2.0
    grid = np.linspace(0.0, upper, 4097)
    values = np.array([g(x) for x in grid])
    feasible = np.nonzero(values <= 0.0)[0]
    if feasible.size == 0:
        return 0.0
    last = int(feasible[-1])
    if last == grid.size - 1:
        return float(upper)
    return float(brentq(g, grid[last], grid[last + 1]))
