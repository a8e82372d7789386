"""Laser pulses, displacement-operator algebra and interferometer geometries.

Each pulse ``n`` kicks the atom by ``chibar_n = (0, hbar k_n)`` at ``t_n``.
Back-propagated to the reference time ``t0`` the kick becomes the
displacement vector ``chi_n = T(t0, t_n) chibar_n`` and the laser phase is
dressed into the generalised phase ``Phi_n``.  A displacement operator is
``D(chi) = exp(-(i/hbar) chi^T J xi)``; products follow

    D(chi1) D(chi0) = D(chi1 + chi0) exp(i chi0^T J chi1 / 2 hbar).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .constants import HBAR
from .symplectic import symplectic_product

__all__ = [
    "PulseSpec",
    "PulseEffect",
    "GeometrySummary",
    "Term",
    "relative_phase",
    "WeightedDisplacementSum",
    "kick_vector",
    "pulse_effect",
    "pulse_effects",
    "compose_displacements",
    "sandwich",
    "vertex_coefficients",
    "geometry_summary",
    "beam_splitter",
    "compose_beam_splitters",
    "mach_zehnder",
    "butterfly",
    "multi_loop",
]


@dataclass(frozen=True)
class PulseSpec:
    """One quasi-instantaneous laser interaction.

    Attributes
    ----------
    t : float
        Pulse time [s].
    k : ndarray, shape (3,)
        Effective wave vector at ``t = 0`` [1/m] (laser rotation is applied
        by the frame); used for the ground-to-excited transition.
    phase : float
        Laser phase [rad].
    area : float
        Pulse area ``Theta`` [rad], in ``(0, 2 pi)``.
    k_down : ndarray or None
        Wave vector of the excited-to-ground transition for asymmetric beam
        splitters; ``None`` means the same as ``k``.
    """

    t: float
    k: np.ndarray
    phase: float = 0.0
    area: float = math.pi / 2
    k_down: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float).reshape(3)
        object.__setattr__(self, "k", k)
        if self.k_down is not None:
            object.__setattr__(self, "k_down", np.asarray(self.k_down, dtype=float).reshape(3))
        if not 0.0 < float(self.area) < 2.0 * math.pi:
            raise ValueError("pulse area must lie in (0, 2 pi)")
        if not (np.all(np.isfinite(k)) and math.isfinite(self.t) and math.isfinite(self.phase)):
            raise ValueError("pulse parameters must be finite")

    @property
    def symmetric(self) -> bool:
        return self.k_down is None or bool(np.array_equal(self.k_down, self.k))


@dataclass(frozen=True)
class PulseEffect:
    """Displacement vector and generalised phase of one pulse.

    ``chi``/``Phi`` belong to the upward transition, ``chi_down``/``Phi_down``
    to the downward one (identical for symmetric kicks).
    """

    chi: np.ndarray
    Phi: float
    t: float
    area: float = math.pi / 2
    chi_down: Optional[np.ndarray] = None
    Phi_down: Optional[float] = None

    @property
    def symmetric(self) -> bool:
        return self.chi_down is None


def kick_vector(k) -> np.ndarray:
    """Recoil kick ``(0, hbar k)``."""
    out = np.zeros(6)
    out[3:] = HBAR * np.asarray(k, dtype=float)
    return out


def _single(kvec, phase, t_n, propagator, t0):
    chibar = kick_vector(kvec)
    chi = propagator.matrix(t0, t_n) @ chibar
    Phi = float(phase) + propagator.phase_integral(chibar, t_n, t0)
    return chi, Phi


def pulse_effect(pulse: PulseSpec, propagator, t0: float) -> PulseEffect:
    """Displacement ``chi_n = T(t0, t_n) chibar_n`` and phase ``Phi_n``.

    ``Phi_n = phi_n + (1/hbar) int_{t0}^{t_n} [T(t', t_n) chibar_n]^T G(t') dt'``.

    Parameters
    ----------
    pulse : PulseSpec
    propagator : lpai.propagation.Propagator
        Supplies ``T``, ``G`` and the frame (laser rotation).
    t0 : float
        Reference time, ``t0 <= pulse.t``.
    """
    if pulse.t < t0:
        raise ValueError("pulse time precedes the reference time t0")
    coeffs = propagator.coeffs
    k_up = coeffs.wave_vector(pulse.k, pulse.t)
    chi, Phi = _single(k_up, pulse.phase, pulse.t, propagator, t0)
    if pulse.symmetric:
        return PulseEffect(chi, Phi, float(pulse.t), float(pulse.area))
    k_dn = coeffs.wave_vector(pulse.k_down, pulse.t)
    chi_d, Phi_d = _single(k_dn, pulse.phase, pulse.t, propagator, t0)
    return PulseEffect(chi, Phi, float(pulse.t), float(pulse.area), chi_d, Phi_d)


def pulse_effects(pulses: Sequence[PulseSpec], propagator, t0: Optional[float] = None) -> List[PulseEffect]:
    """Effects of a whole sequence; ``t0`` defaults to the first pulse time."""
    if not pulses:
        raise ValueError("empty pulse sequence")
    times = [p.t for p in pulses]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("pulse times must be strictly increasing")
    if t0 is None:
        t0 = times[0]
    return [pulse_effect(p, propagator, t0) for p in pulses]


# ---------------------------------------------------------------------------
# displacement algebra
# ---------------------------------------------------------------------------

def compose_displacements(chi1, chi0):
    """``D(chi1) D(chi0) = D(chi1 + chi0) exp(i phase)``.

    Returns
    -------
    chi : ndarray, shape (6,)
        ``chi1 + chi0``.
    phase : float
        ``chi0^T J chi1 / (2 hbar)`` [rad].
    """
    chi1 = np.asarray(chi1, dtype=float)
    chi0 = np.asarray(chi0, dtype=float)
    return chi1 + chi0, symplectic_product(chi0, chi1) / (2.0 * HBAR)


def sandwich(chi_mid, chi_outer) -> np.ndarray:
    """``D(-chi_o) D(chi_m) D(-chi_o) = D(chi_m - 2 chi_o)`` (no net phase)."""
    chi_mid = np.asarray(chi_mid, dtype=float)
    chi_outer = np.asarray(chi_outer, dtype=float)
    inner, ph1 = compose_displacements(chi_mid, -chi_outer)
    total, ph2 = compose_displacements(-chi_outer, inner)
    # ph1 + ph2 vanishes identically by antisymmetry of J
    return total


def vertex_coefficients(n_pulses: int) -> List[int]:
    """Vertex-rule multiplicities ``[1, -2, 2, ..., (-1)^n]`` for ``n + 1`` pulses.

    Valid for a ``pi/2 - pi - ... - pi - pi/2`` sequence of ``n_pulses`` pulses.
    """
    n_pulses = int(n_pulses)
    if n_pulses < 2:
        raise ValueError("at least two pulses are required")
    n = n_pulses - 1
    coeffs = [1]
    for i in range(1, n):
        coeffs.append(2 * (-1) ** i)
    coeffs.append((-1) ** n)
    return coeffs


@dataclass(frozen=True)
class GeometrySummary:
    """Aggregated quantities of one interferometer.

    Attributes
    ----------
    coefficients : list of int
    Phi_I : float
        Generalised interferometer phase ``sum c_i Phi_i`` [rad].
    chi_I : ndarray, shape (6,)
        Interferometer displacement ``sum c_i chi_i``.
    chi_0 : ndarray, shape (6,)
        First-pulse displacement.
    bch_phase : float
        ``chi_0^T J chi_I / (2 hbar)`` [rad].
    pulse_count : int
    """

    coefficients: List[int]
    Phi_I: float
    chi_I: np.ndarray
    chi_0: np.ndarray
    bch_phase: float
    pulse_count: int

    @property
    def final_index(self) -> int:
        return self.pulse_count - 1

    @property
    def sign(self) -> int:
        """``(-1)^n`` with ``n`` the index of the final pulse."""
        return -1 if self.final_index % 2 else 1


def geometry_summary(effects: Sequence[PulseEffect]) -> GeometrySummary:
    """Vertex-rule aggregates for a standard multi-loop sequence.

    Raises
    ------
    ValueError
        For fewer than three pulses or asymmetric kicks.
    """
    effects = list(effects)
    if len(effects) < 3:
        raise ValueError("a geometry needs at least three pulses")
    if not all(e.symmetric for e in effects):
        raise ValueError("the vertex rule requires symmetric momentum kicks")
    c = vertex_coefficients(len(effects))
    Phi_I = float(math.fsum(ci * e.Phi for ci, e in zip(c, effects)))
    chi_I = np.zeros(6)
    for ci, e in zip(c, effects):
        chi_I = chi_I + ci * e.chi
    chi_0 = np.array(effects[0].chi, dtype=float)
    bch = symplectic_product(chi_0, chi_I) / (2.0 * HBAR)
    return GeometrySummary(c, Phi_I, chi_I, chi_0, bch, len(effects))


# ---------------------------------------------------------------------------
# beam-splitter matrices as sums of displacement operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """``coef * exp(i phase) * D(chi)``.

    The real phase is stored as the tuple of its individual contributions
    (pulse phases and composition phases) so that differences between large
    phases can be formed with a single correctly rounded sum.
    """

    coef: complex
    parts: tuple
    chi: np.ndarray

    @property
    def phase(self) -> float:
        return math.fsum(self.parts)

    @property
    def amplitude(self) -> complex:
        ph = self.phase
        return self.coef * complex(math.cos(ph), math.sin(ph))


def relative_phase(a: Term, b: Term) -> float:
    """Phase of ``a`` relative to ``b`` including the composition phase of
    ``D(chi_a) D(-chi_b)``: ``phase_a - phase_b - chi_a^T J chi_b / 2 hbar``."""
    bch = -symplectic_product(a.chi, b.chi) / (2.0 * HBAR)
    return math.fsum(a.parts + tuple(-x for x in b.parts) + (bch,))


def _same_displacement(a, b, rtol=1e-12):
    for sl in (slice(0, 3), slice(3, 6)):
        da = a[sl]
        db = b[sl]
        scale = max(np.abs(da).max(), np.abs(db).max())
        if np.abs(da - db).max() > rtol * scale:
            return False
    return True


@dataclass
class WeightedDisplacementSum:
    """Linear combination of displacement operators."""

    terms: List[Term] = field(default_factory=list)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def add(self, term: Term, merge: bool = True) -> None:
        if term.coef == 0:
            return
        if merge:
            for i, t in enumerate(self.terms):
                if _same_displacement(t.chi, term.chi):
                    rel = math.fsum(term.parts + tuple(-x for x in t.parts))
                    coef = t.coef + term.coef * complex(math.cos(rel), math.sin(rel))
                    self.terms[i] = Term(coef, t.parts, t.chi)
                    return
        self.terms.append(term)

    def times(self, other: "WeightedDisplacementSum", merge: bool = True) -> "WeightedDisplacementSum":
        """Operator product ``self * other`` (``self`` acts later)."""
        out = WeightedDisplacementSum()
        for a in self.terms:
            for b in other.terms:
                chi, ph = compose_displacements(a.chi, b.chi)
                out.add(Term(a.coef * b.coef, a.parts + b.parts + (ph,), chi), merge)
        return out

    def plus(self, other: "WeightedDisplacementSum", merge: bool = True) -> "WeightedDisplacementSum":
        out = WeightedDisplacementSum(list(self.terms))
        for t in other.terms:
            out.add(t, merge)
        return out

    @classmethod
    def single(cls, coef, phase=0.0, chi=None) -> "WeightedDisplacementSum":
        chi = np.zeros(6) if chi is None else np.asarray(chi, dtype=float)
        if coef == 0:
            return cls()
        return cls([Term(complex(coef), (float(phase),), chi)])


_BRANCH_EPS = 4.0 * np.finfo(float).eps


def beam_splitter(effect: PulseEffect, area: Optional[float] = None):
    """Generalised beam-splitter matrix of one pulse.

    ``[[cos(Theta/2), -i sin(Theta/2) e^{-i Phi} D(-chi)],
      [-i sin(Theta/2) e^{+i Phi} D(chi), cos(Theta/2)]]`` acting on
    ``(ground, excited)``.
    """
    theta = effect.area if area is None else float(area)
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    # cos(pi/2) and sin(pi) evaluate to ~6e-17 rather than zero; drop such
    # round-off branches so that ideal mirrors produce no spurious paths
    if abs(c) < _BRANCH_EPS:
        c = 0.0
    if abs(s) < _BRANCH_EPS:
        s = 0.0
    chi_d = effect.chi if effect.chi_down is None else effect.chi_down
    Phi_d = effect.Phi if effect.Phi_down is None else effect.Phi_down
    W = WeightedDisplacementSum.single
    return [[W(c), W(-1j * s, -Phi_d, -np.asarray(chi_d))],
            [W(-1j * s, effect.Phi, effect.chi), W(c)]]


def compose_beam_splitters(pulses, merge: bool = True):
    """Product ``S_N ... S_1 S_0`` of generalised beam-splitter matrices.

    Parameters
    ----------
    pulses : sequence of PulseEffect or of (Theta, PulseEffect)
        In time order.
    merge : bool
        Merge terms with equal displacement (relative tolerance ``1e-12``).

    Returns
    -------
    list of list of WeightedDisplacementSum
        2x2 operator matrix in the ``(ground, excited)`` basis.
    """
    W = WeightedDisplacementSum.single
    U = [[W(1.0), WeightedDisplacementSum()], [WeightedDisplacementSum(), W(1.0)]]
    for item in pulses:
        if isinstance(item, PulseEffect):
            S = beam_splitter(item)
        else:
            theta, eff = item
            S = beam_splitter(eff, theta)
        new = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                acc = WeightedDisplacementSum()
                for k in range(2):
                    acc = acc.plus(S[i][k].times(U[k][j], merge), merge)
                new[i][j] = acc
        U = new
    return U


# ---------------------------------------------------------------------------
# standard geometries
# ---------------------------------------------------------------------------

def _seq(times, k, phases, areas):
    k = np.asarray(k, dtype=float)
    if phases is None:
        phases = [0.0] * len(times)
    return [PulseSpec(float(t), k, float(ph), float(a)) for t, ph, a in zip(times, phases, areas)]


def mach_zehnder(T1: float, k, T2: Optional[float] = None, t0: float = 0.0, phases=None):
    """``pi/2 - pi - pi/2`` at ``t0, t0 + T1, t0 + T1 + T2``."""
    T2 = T1 if T2 is None else T2
    times = [t0, t0 + T1, t0 + T1 + T2]
    return _seq(times, k, phases, [math.pi / 2, math.pi, math.pi / 2])


def butterfly(T1: float, k, T2: Optional[float] = None, T3: Optional[float] = None,
              t0: float = 0.0, phases=None):
    """``pi/2 - pi - pi - pi/2`` with intervals ``T1, T2, T3`` (default ``T, 2T, T``)."""
    T2 = 2.0 * T1 if T2 is None else T2
    T3 = T1 if T3 is None else T3
    times = [t0, t0 + T1, t0 + T1 + T2, t0 + T1 + T2 + T3]
    return _seq(times, k, phases, [math.pi / 2, math.pi, math.pi, math.pi / 2])


def multi_loop(times: Sequence[float], k, phases=None):
    """``pi/2 - pi - ... - pi - pi/2`` at the given times."""
    times = [float(t) for t in times]
    if len(times) < 3:
        raise ValueError("a multi-loop sequence needs at least three pulses")
    areas = [math.pi / 2] + [math.pi] * (len(times) - 2) + [math.pi / 2]
    return _seq(times, k, phases, areas)
