"""Gaussian states, characteristic/Wigner functions and detection probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import HBAR
from .pulses import GeometrySummary, WeightedDisplacementSum, relative_phase
from .symplectic import J, symplectic_product

__all__ = [
    "GaussianState",
    "DetectionResult",
    "characteristic_function",
    "wigner_value",
    "visibility",
    "total_phase",
    "phase_decomposition",
    "detection_probability",
    "detection_probability_general",
    "thermal_state",
    "grid_probability_1d",
    "grid_characteristic_1d",
    "grid_wigner_from_characteristic_1d",
    "fit_fringe",
    "GRID_POINTS",
    "GRID_EXTENT",
]

GRID_POINTS = 512
GRID_EXTENT = 8.0


@dataclass(frozen=True)
class GaussianState:
    """Gaussian phase-space distribution (mean and covariance).

    Only positive definiteness is required; the uncertainty relation is not
    enforced so that classical thermal ensembles are admissible.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(6)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (6, 6):
            raise ValueError("covariance must be 6x6")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("state must be finite")
        scale = np.sqrt(np.outer(np.abs(np.diag(cov)), np.abs(np.diag(cov))))
        if np.any(np.abs(cov - cov.T) > 1e-12 * np.maximum(scale, np.finfo(float).tiny)):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(_scaled(cov)[0])
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def _scaled(cov):
    var = np.diag(cov)
    if not np.all(var > 0):
        raise np.linalg.LinAlgError("non-positive variance")
    d = np.sqrt(var)
    return cov / np.outer(d, d), d


def thermal_state(mean_x=(0, 0, 0), mean_p=(0, 0, 0), sigma_x=1e-4, sigma_v=None,
                  m: float = 1.0, temperature: float | None = None) -> GaussianState:
    """Uncorrelated Gaussian with isotropic widths.

    Either ``sigma_v`` [m/s] or ``temperature`` [K] fixes the momentum width
    ``sigma_p = m sigma_v`` with ``sigma_v = sqrt(k_B T / m)``.
    """
    kB = 1.380649e-23
    if temperature is not None:
        sigma_v = math.sqrt(kB * float(temperature) / m)
    if sigma_v is None:
        raise ValueError("give sigma_v or temperature")
    sx = np.broadcast_to(np.asarray(sigma_x, dtype=float), (3,))
    sv = np.broadcast_to(np.asarray(sigma_v, dtype=float), (3,))
    cov = np.diag(np.concatenate([sx ** 2, (m * sv) ** 2]))
    mean = np.concatenate([np.asarray(mean_x, float), np.asarray(mean_p, float)])
    return GaussianState(mean, cov)


def _quad(state, chi):
    Jc = J @ np.asarray(chi, dtype=float)
    return float(Jc @ state.cov @ Jc) / (2.0 * HBAR ** 2), Jc


def characteristic_function(state: GaussianState, chi) -> complex:
    """``exp(-(J chi)^T Sigma (J chi) / 2 hbar^2 + (i/hbar) <xi>^T J chi)``."""
    q, Jc = _quad(state, chi)
    ph = float(state.mean @ Jc) / HBAR
    return math.exp(-q) * complex(math.cos(ph), math.sin(ph))


def wigner_value(state: GaussianState, xi) -> float:
    """Normalised 6-D Gaussian density at ``xi``.

    Raises
    ------
    ValueError
        For a singular covariance.
    """
    d = np.asarray(xi, dtype=float) - state.mean
    C, s = _scaled(state.cov)
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular covariance") from exc
    y = np.linalg.solve(L, d / s)
    logdet = 2.0 * np.sum(np.log(np.diag(L))) + 2.0 * np.sum(np.log(s))
    return math.exp(-0.5 * float(y @ y) - 0.5 * logdet - 3.0 * math.log(2.0 * math.pi))


def visibility(state: GaussianState, chi_I) -> float:
    """``exp(-(J chi_I)^T Sigma (J chi_I) / 2 hbar^2)``."""
    return math.exp(-_quad(state, chi_I)[0])


def phase_decomposition(summary: GeometrySummary, state: GaussianState):
    """The three contributions to the total phase.

    Returns
    -------
    dict
        ``Phi_I``, ``bch`` (``chi_0^T J chi_I / 2 hbar``) and ``mean``
        (``<xi_0>^T J chi_I / hbar``).
    """
    mean_term = symplectic_product(state.mean, summary.chi_I) / HBAR
    return {"Phi_I": summary.Phi_I, "bch": summary.bch_phase, "mean": mean_term}


def total_phase(summary: GeometrySummary, state: GaussianState) -> float:
    """``Phi_I + (1/hbar) [chi_0/2 + <xi_0>]^T J chi_I``."""
    d = phase_decomposition(summary, state)
    return math.fsum([d["Phi_I"], d["bch"], d["mean"]])


@dataclass(frozen=True)
class DetectionResult:
    """Ground-state exit-port probability ``P = 1/2 [1 + sign V cos(dPhi)]``."""

    probability: float
    visibility: float
    total_phase: float
    sign: int


def detection_probability(summary: GeometrySummary, state: GaussianState) -> DetectionResult:
    """Closed-form Gaussian probability for a standard multi-loop geometry."""
    V = visibility(state, summary.chi_I)
    ph = total_phase(summary, state)
    s = summary.sign
    P = 0.5 * (1.0 + s * V * math.cos(ph))
    return DetectionResult(P, V, ph, s)


def detection_probability_general(entry: WeightedDisplacementSum, state: GaussianState) -> float:
    """``Tr[O rho O^dagger]`` for an operator given as a sum of displacements.

    ``P = sum_{a,b} A_a A_b^* exp(-i chi_a^T J chi_b / 2 hbar) eta(chi_a - chi_b)``.
    """
    terms = list(entry.terms)
    total = 0.0
    for a in terms:
        for b in terms:
            rel = relative_phase(a, b)
            amp = a.coef * np.conj(b.coef) * complex(math.cos(rel), math.sin(rel))
            total += (amp * characteristic_function(state, a.chi - b.chi)).real
    return float(total)


# ---------------------------------------------------------------------------
# 1-D grid oracles
# ---------------------------------------------------------------------------

def _marginal(state, axis):
    idx = [axis, axis + 3]
    return state.mean[idx], state.cov[np.ix_(idx, idx)]


def _grid(state, axis, n, extent):
    mu, S = _marginal(state, axis)
    sx, sp = np.sqrt(np.diag(S))
    xs = np.linspace(mu[0] - extent * sx, mu[0] + extent * sx, n)
    ps = np.linspace(mu[1] - extent * sp, mu[1] + extent * sp, n)
    Si = np.linalg.inv(S)
    dx = xs[:, None] - mu[0]
    dp = ps[None, :] - mu[1]
    quad = Si[0, 0] * dx ** 2 + 2 * Si[0, 1] * dx * dp + Si[1, 1] * dp ** 2
    W = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(np.linalg.det(S)))
    return xs, ps, W


def _check_1d(chi, axis):
    chi = np.asarray(chi, dtype=float)
    others = [i for i in range(6) if i not in (axis, axis + 3)]
    if np.any(chi[others] != 0.0):
        raise ValueError("displacement has components off the selected axis")
    return chi[axis], chi[axis + 3]


def grid_probability_1d(summary: GeometrySummary, state: GaussianState, axis: int = 2,
                        n: int = GRID_POINTS, extent: float = GRID_EXTENT) -> float:
    """Brute-force probability ``1/2 [1 + sign int W cos(phase(xi))]`` on a grid.

    ``phase(xi) = Phi_I + chi_0^T J chi_I / 2 hbar + xi^T J chi_I / hbar``,
    integrated with the trapezoid rule over the ``(x_axis, p_axis)`` marginal.
    """
    cx, cp = _check_1d(summary.chi_I, axis)
    xs, ps, W = _grid(state, axis, n, extent)
    a = summary.Phi_I + summary.bch_phase
    # xi^T J chi = x chi_p - p chi_x
    I = kernels.trapz2_cos(W, xs, ps, a, cp / HBAR, -cx / HBAR)
    return 0.5 * (1.0 + summary.sign * I)


def grid_characteristic_1d(state: GaussianState, chi, axis: int = 2,
                           n: int = GRID_POINTS, extent: float = GRID_EXTENT) -> complex:
    """``int W(xi) exp(-(i/hbar) chi^T J xi) dxi`` on the ``axis`` marginal."""
    cx, cp = _check_1d(chi, axis)
    xs, ps, W = _grid(state, axis, n, extent)
    # -(1/hbar) chi^T J xi = (1/hbar)(x chi_p - p chi_x)
    bx, bp = cp / HBAR, -cx / HBAR
    re = kernels.trapz2_cos(W, xs, ps, 0.0, bx, bp)
    im = kernels.trapz2_cos(W, xs, ps, -0.5 * math.pi, bx, bp)
    return complex(re, im)


def grid_wigner_from_characteristic_1d(state: GaussianState, x: float, p: float, axis: int = 2,
                                       n: int = GRID_POINTS, extent: float = GRID_EXTENT) -> float:
    """Inverse symplectic Fourier transform of the 1-D characteristic function.

    ``W(x, p) = (2 pi hbar)^-2 int eta(chi) exp((i/hbar)(chi_x p - chi_p x)) dchi``
    evaluated with the trapezoid rule on a grid spanning ``extent`` widths of
    ``eta``.
    """
    mu, S = _marginal(state, axis)
    # eta(chi) has covariance hbar^2 J S J^T in chi = (chi_x, chi_p)
    sx_chi = HBAR / math.sqrt(S[1, 1]) * math.sqrt(1.0 / (1.0 - S[0, 1] ** 2 / (S[0, 0] * S[1, 1])))
    sp_chi = HBAR / math.sqrt(S[0, 0]) * math.sqrt(1.0 / (1.0 - S[0, 1] ** 2 / (S[0, 0] * S[1, 1])))
    cxs = np.linspace(-extent * sx_chi, extent * sx_chi, n)
    cps = np.linspace(-extent * sp_chi, extent * sp_chi, n)
    CX, CP = np.meshgrid(cxs, cps, indexing="ij")
    # 2-D quadratic form (J chi)^T S (J chi) with J chi = (chi_p, -chi_x)
    q = (S[0, 0] * CP ** 2 - 2 * S[0, 1] * CP * CX + S[1, 1] * CX ** 2) / (2 * HBAR ** 2)
    phase = (mu[0] * CP - mu[1] * CX) / HBAR + (CX * p - CP * x) / HBAR
    vals = np.exp(-q) * np.cos(phase)
    wx = np.full(n, cxs[1] - cxs[0]); wx[[0, -1]] *= 0.5
    wp = np.full(n, cps[1] - cps[0]); wp[[0, -1]] *= 0.5
    return float(wx @ vals @ wp) / (2.0 * math.pi * HBAR) ** 2


def fit_fringe(scan_phases, probabilities, coefficient: int = 1, sign: int = 1):
    """Least-squares fit of ``P = 1/2 [1 + sign V cos(dPhi + c phi)]``.

    Parameters
    ----------
    scan_phases : array_like
        Scanned laser phase of the last pulse [rad].
    probabilities : array_like
    coefficient : int
        Vertex coefficient ``c`` of the scanned pulse (``+-1``).
    sign : int
        Port sign ``(-1)^n``.

    Returns
    -------
    phase : float
        ``dPhi`` at zero scanned phase, in ``(-pi, pi]``.
    visibility : float
    offset : float
    """
    phi = np.asarray(scan_phases, dtype=float)
    P = np.asarray(probabilities, dtype=float)
    A = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    (a0, b, c), *_ = np.linalg.lstsq(A, P, rcond=None)
    # b = sign V cos(dPhi) / 2, c = -sign V coefficient sin(dPhi) / 2
    ph = math.atan2(-c * coefficient * sign, b * sign)
    V = 2.0 * math.hypot(b, c)
    return ph, V, float(a0)
