"""Optical superlattice mathematics for the fermion traps.

The matter potential is a sum of three standing waves; tuning their
relative weights and the diagonal beam's phase selects which sublattice
of bonds tunnels.  Everything here is classical field geometry: minima
location, beam polarizations, and the adiabatic shaping ramps.
"""

from __future__ import annotations

import math

import numpy as np

DENOMINATOR_TOL = 1e-9
MINIMA_DEDUP = 1e-6
GRID_SPACING = 0.25
DESCENT_CAP = 10000

SHAPING_STEPS = ("eh", "oh", "ev", "ov")
# hold configuration per tunneling step: which weight ramps, and the
# diagonal phase that picks the even or odd bond sublattice
_HOLD = {
    "eh": ("f", math.pi / 4),
    "oh": ("f", -math.pi / 4),
    "ev": ("g", math.pi / 4),
    "ov": ("g", -math.pi / 4),
}


def _weights(f: float, g: float, h: float) -> tuple[float, float, float]:
    d1 = 1.0 + f + h
    d2 = 1.0 + g + h
    d3 = 1.0 + f + g + h
    if min(d1, d2, d3) < DENOMINATOR_TOL:
        raise ValueError(
            f"degenerate potential denominators: 1+f+h={d1}, 1+g+h={d2}, 1+f+g+h={d3}")
    return 1.0 / d1, 1.0 / d2, (f + g + h) / d3


def v_mat(x, y, f: float, g: float, h: float, phi: float):
    """Matter-trap potential at (x, y); accepts array coordinates."""
    a, b, c = _weights(f, g, h)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    val = (a * np.cos(np.pi * x + np.pi / 2) ** 2
           + b * np.cos(np.pi * y + np.pi / 2) ** 2
           + c * np.cos(np.pi * (x + y) / 2 + phi) ** 2)
    return float(val) if val.ndim == 0 else val


def _grad(x: float, y: float, a: float, b: float, c: float, phi: float):
    u = np.pi * (x + y) / 2 + phi
    gx = a * np.pi * np.sin(2 * np.pi * x) - c * (np.pi / 2) * np.sin(2 * u)
    gy = b * np.pi * np.sin(2 * np.pi * y) - c * (np.pi / 2) * np.sin(2 * u)
    return gx, gy


def _hessian_definite(x: float, y: float, a: float, b: float, c: float,
                      phi: float) -> bool:
    u = np.pi * (x + y) / 2 + phi
    w = c * (np.pi ** 2 / 2) * np.cos(2 * u)
    hxx = 2 * a * np.pi ** 2 * np.cos(2 * np.pi * x) - w
    hyy = 2 * b * np.pi ** 2 * np.cos(2 * np.pi * y) - w
    hxy = -w
    tr = hxx + hyy
    det = hxx * hyy - hxy ** 2
    return det > 1e-9 and tr > 0


def v_mat_minima(f: float, g: float, h: float, phi: float,
                 window: tuple[float, float, float, float]) -> list[tuple[float, float]]:
    """Local minima of the potential inside (xmin, xmax, ymin, ymax).

    Gradient descent from a quarter-spacing grid of starts; converged
    points are kept when the Hessian is positive definite (saddles and
    maxima are discarded) and deduplicated within 1e-6.
    """
    a, b, c = _weights(f, g, h)
    xmin, xmax, ymin, ymax = window
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"empty window {window}")
    found: list[tuple[float, float]] = []
    xs = np.arange(xmin, xmax + GRID_SPACING / 2, GRID_SPACING)
    ys = np.arange(ymin, ymax + GRID_SPACING / 2, GRID_SPACING)
    for x0 in xs:
        for y0 in ys:
            x, y = float(x0), float(y0)
            rate = 0.05
            for _ in range(DESCENT_CAP):
                gx, gy = _grad(x, y, a, b, c, phi)
                if gx * gx + gy * gy < 1e-26:
                    break
                x -= rate * gx
                y -= rate * gy
            else:
                continue
            if not (xmin - 1e-9 <= x <= xmax + 1e-9 and ymin - 1e-9 <= y <= ymax + 1e-9):
                continue
            if not _hessian_definite(x, y, a, b, c, phi):
                continue
            if all((x - p) ** 2 + (y - q) ** 2 > MINIMA_DEDUP ** 2 for p, q in found):
                found.append((x, y))
    return sorted(found)


def wave_vectors(xi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three beam wave vectors; all share one magnitude by construction."""
    zeta = math.sqrt(xi ** 2 + 0.5)
    k1 = np.pi * np.array([1.0, 0.0, xi])
    k2 = np.pi * np.array([0.0, 1.0, xi])
    k3 = np.pi * np.array([0.5, 0.5, zeta])
    return k1, k2, k3


def lattice_spacing_valid(s: float, lambda_mat: float) -> bool:
    """Shared-wavelength beams require s > lambda_mat / (2 sqrt(2))."""
    if s <= 0 or lambda_mat <= 0:
        raise ValueError("s and lambda_mat must be positive")
    return s > lambda_mat / (2.0 * math.sqrt(2.0))


def polarization_vectors(xi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Mutually orthogonal unit polarizations for the three beams.

    Valid (flag True) while 1 - 4 xi^4 - 2 xi sqrt(2 + 4 xi^2) stays
    positive.  The first components of e1 and e2 carry a minus sign so
    that each vector is also transverse to its own wave vector; the
    component magnitudes follow the discriminant formulas.
    """
    if xi == 0.0:
        raise ValueError("xi must be nonzero (alpha formulas divide by 2 xi)")
    root = math.sqrt(2.0 + 4.0 * xi ** 2)
    disc = 1.0 - 4.0 * xi ** 4 - 2.0 * xi * root
    valid = disc > 0.0
    sq = math.sqrt(max(disc, 0.0))
    alpha1 = (1.0 - sq) / (2.0 * xi)
    alpha2 = (1.0 + sq) / (2.0 * xi)
    alpha3 = (-1.0 - 2.0 * xi ** 2 + sq) / root
    zeta = math.sqrt(xi ** 2 + 0.5)
    e1 = np.array([-xi, alpha1, 1.0])
    e2 = np.array([alpha2, -xi, 1.0])
    e3 = np.array([alpha3, -alpha3 - 2.0 * zeta, 1.0])
    return (e1 / np.linalg.norm(e1), e2 / np.linalg.norm(e2),
            e3 / np.linalg.norm(e3), valid)


def shaping_schedule(step: str, amplitude: float, duration: float,
                     n_samples: int = 201) -> np.ndarray:
    """Adiabatic ramp for one tunneling step: rows of (t, f, g, h, phi).

    Raised-cosine ramps over the first and last quarter of the
    duration, holding the step's configuration in between; the series
    starts and ends at the standard configuration.
    """
    if step not in SHAPING_STEPS:
        raise ValueError(f"step must be one of {SHAPING_STEPS}, got {step!r}")
    if amplitude <= 0 or duration <= 0:
        raise ValueError("amplitude and duration must be positive")
    if n_samples < 5:
        raise ValueError(f"n_samples must be >= 5, got {n_samples}")
    which, phi_hold = _HOLD[step]
    t = np.linspace(0.0, duration, n_samples)
    ramp = duration / 4.0
    env = np.ones_like(t)
    rising = t < ramp
    falling = t > duration - ramp
    env[rising] = 0.5 * (1.0 - np.cos(np.pi * t[rising] / ramp))
    env[falling] = 0.5 * (1.0 - np.cos(np.pi * (duration - t[falling]) / ramp))
    out = np.zeros((n_samples, 5))
    out[:, 0] = t
    col = {"f": 1, "g": 2}[which]
    out[:, col] = amplitude * env
    out[:, 4] = phi_hold * env
    return out
