"""Scenario files: a YAML document describing one interferometer run.

Schema (SI units throughout; vectors are 3-lists, matrices nested lists)::

    name: fountain                      # optional label
    species: Rb87                       # optional: mass and k_eff shorthand
    mass: 1.443e-25                     # kg, overrides species
    gravity:
      mode: uniform | central
      g: [0, 0, -9.81]                  # uniform
      gamma: [[...], [...], [...]]      # uniform, optional (default 0)
      gm: 3.986004418e14                # central
    frame:                              # optional (default: inertial)
      trajectory: constant | polynomial | circular
      rho0: [...]; velocity: [...]; acceleration: [...]
      orbit_rate: [...]; frame_rotation: [...]; laser_rotation: [...]
    pulses:
      geometry: mach_zehnder | butterfly | multi_loop
      T: 0.1          # or T1, T2 (, T3); multi_loop: times: [...]
      t0: 0.0
      k: [0, 0, -1.61e7]                # or k_direction + species k_eff
      phases: [0, 0, 0]
    # or an explicit list:
    # pulses: [{t: 0, k: [...], phase: 0, area: 1.5708, k_down: [...]}, ...]
    state:
      x0: [0, 0, 0]
      p0: [0, 0, 0]                     # or v0 (m/s)
      covariance: 6x6                   # or thermal: {sigma_x, sigma_v | temperature}
    method: exact | perturbative:<k> | oracle:<h>
    scan:
      variable: laser_phase_last | T
      start: 0
      stop: 6.283185307179586
      steps: 64
      endpoint: false
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np
import yaml

from .constants import SPECIES
from .frames import FrameSpec, GravityModel
from .propagation import PropagationMethod
from .pulses import PulseSpec, butterfly, mach_zehnder, multi_loop
from .states import GaussianState, thermal_state

__all__ = ["ConfigError", "Scenario", "ScanSpec", "GeometrySpec", "load_scenario", "parse_scenario"]


class ConfigError(ValueError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class ScanSpec:
    variable: str
    values: np.ndarray


@dataclass(frozen=True)
class GeometrySpec:
    """Geometry shorthand kept so that ``T`` can be scanned."""

    kind: str
    intervals: tuple
    t0: float
    k: np.ndarray
    phases: Optional[tuple]
    times: Optional[tuple] = None

    def build(self, T: Optional[float] = None) -> List[PulseSpec]:
        ph = None if self.phases is None else list(self.phases)
        iv = list(self.intervals)
        if T is not None:
            if self.kind == "multi_loop":
                raise ValueError("T cannot be scanned for a multi_loop geometry")
            base = iv[0]
            iv = [T * x / base for x in iv]
        if self.kind == "mach_zehnder":
            return mach_zehnder(iv[0], self.k, T2=iv[1], t0=self.t0, phases=ph)
        if self.kind == "butterfly":
            return butterfly(iv[0], self.k, T2=iv[1], T3=iv[2], t0=self.t0, phases=ph)
        return multi_loop(self.times, self.k, phases=ph)


@dataclass(frozen=True)
class Scenario:
    name: str
    mass: float
    gravity: GravityModel
    frame: FrameSpec
    pulses: List[PulseSpec]
    state: GaussianState
    method: PropagationMethod
    geometry: Optional[GeometrySpec] = None
    scan: Optional[ScanSpec] = None
    raw: dict = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------------------
# field helpers
# ---------------------------------------------------------------------------

def _get(d: dict, key: str, path: str, default=None, required=False):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
        return default
    return d[key]


def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _number(v, path, positive=False, nonneg=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(v).__name__}")
    x = float(v)
    if not math.isfinite(x):
        raise ConfigError(path, "must be finite")
    if positive and not x > 0:
        raise ConfigError(path, "must be positive")
    if nonneg and x < 0:
        raise ConfigError(path, "must be non-negative")
    return x


def _array(v, shape, path) -> np.ndarray:
    try:
        a = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a numeric array of shape {shape}") from None
    if isinstance(v, (str, bytes)) or a.shape != shape:
        raise ConfigError(path, f"expected shape {shape}, got {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise ConfigError(path, "entries must be finite")
    return a


def _check_keys(d, allowed, path):
    for key in d:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown field")


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

def _species(doc):
    sp = doc.get("species")
    if sp is None:
        return None
    if sp not in SPECIES:
        raise ConfigError("species", f"unknown species {sp!r}; known: {sorted(SPECIES)}")
    return SPECIES[sp]


def _mass(doc, sp):
    if "mass" in doc:
        return _number(doc["mass"], "mass", positive=True)
    if sp is None:
        raise ConfigError("mass", "required field missing (or give species)")
    return sp["mass"]


def _gravity(doc):
    g = _get(doc, "gravity", "", required=True)
    if not isinstance(g, dict):
        raise ConfigError("gravity", "expected a mapping")
    _check_keys(g, {"mode", "g", "gamma", "gm"}, "gravity")
    mode = g.get("mode", "uniform")
    if mode not in ("uniform", "central"):
        raise ConfigError("gravity.mode", "must be 'uniform' or 'central'")
    if mode == "uniform":
        vec = _array(_get(g, "g", "gravity", required=True), (3,), "gravity.g")
        gam = _array(g.get("gamma", np.zeros((3, 3)).tolist()), (3, 3), "gravity.gamma")
        if not np.allclose(gam, gam.T, rtol=0, atol=1e-14 * max(1.0, np.abs(gam).max())):
            raise ConfigError("gravity.gamma", "must be symmetric")
        return GravityModel("uniform", g=vec, gamma=gam)
    gm = _number(_get(g, "gm", "gravity", required=True), "gravity.gm", positive=True)
    return GravityModel("central", gm=gm)


def _frame(doc, gravity):
    f = doc.get("frame")
    if f is None:
        if gravity.mode == "central":
            raise ConfigError("frame.rho0", "central gravity needs a frame position")
        return FrameSpec("constant")
    if not isinstance(f, dict):
        raise ConfigError("frame", "expected a mapping")
    keys = ("rho0", "velocity", "acceleration", "orbit_rate", "frame_rotation", "laser_rotation")
    _check_keys(f, set(keys) | {"trajectory"}, "frame")
    traj = f.get("trajectory", "constant")
    if traj not in ("constant", "polynomial", "circular"):
        raise ConfigError("frame.trajectory", "must be constant, polynomial or circular")
    kw = {k: _array(f[k], (3,), f"frame.{k}") for k in keys if k in f}
    frame = FrameSpec(traj, **kw)
    if gravity.mode == "central" and np.linalg.norm(frame.rho0) == 0:
        raise ConfigError("frame.rho0", "must be non-zero for central gravity")
    return frame


def _wave_vector(p, path, sp):
    if "k" in p:
        return _array(p["k"], (3,), _join(path, "k"))
    if "k_direction" in p:
        d = _array(p["k_direction"], (3,), _join(path, "k_direction"))
        n = np.linalg.norm(d)
        if n == 0:
            raise ConfigError(_join(path, "k_direction"), "must be non-zero")
        if sp is None:
            raise ConfigError(_join(path, "k"), "k_direction needs a species for k_eff")
        return sp["k_eff"] * d / n
    raise ConfigError(_join(path, "k"), "required field missing")


def _pulses(doc, sp):
    p = _get(doc, "pulses", "", required=True)
    if isinstance(p, list):
        return _explicit_pulses(p, sp), None
    if not isinstance(p, dict):
        raise ConfigError("pulses", "expected a geometry mapping or a list of pulses")
    _check_keys(p, {"geometry", "T", "T1", "T2", "T3", "t0", "times", "k", "k_direction", "phases"}, "pulses")
    kind = _get(p, "geometry", "pulses", required=True)
    if kind not in ("mach_zehnder", "butterfly", "multi_loop"):
        raise ConfigError("pulses.geometry", "must be mach_zehnder, butterfly or multi_loop")
    k = _wave_vector(p, "pulses", sp)
    t0 = _number(p.get("t0", 0.0), "pulses.t0")
    n_pulses = {"mach_zehnder": 3, "butterfly": 4}.get(kind)
    times = None
    if kind == "multi_loop":
        raw = _get(p, "times", "pulses", required=True)
        if not isinstance(raw, list) or len(raw) < 3:
            raise ConfigError("pulses.times", "need a list of at least three times")
        times = tuple(_number(t, f"pulses.times[{i}]") for i, t in enumerate(raw))
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("pulses.times", "must be strictly increasing")
        n_pulses = len(times)
        intervals = tuple(b - a for a, b in zip(times, times[1:]))
    else:
        if "T" in p:
            T = _number(p["T"], "pulses.T", positive=True)
            T1 = T
        else:
            T1 = _number(_get(p, "T1", "pulses", required=True), "pulses.T1", positive=True)
        if kind == "mach_zehnder":
            T2 = _number(p.get("T2", T1), "pulses.T2", positive=True)
            intervals = (T1, T2)
        else:
            T2 = _number(p.get("T2", 2 * T1), "pulses.T2", positive=True)
            T3 = _number(p.get("T3", T1), "pulses.T3", positive=True)
            intervals = (T1, T2, T3)
    phases = None
    if "phases" in p:
        raw = p["phases"]
        if not isinstance(raw, list) or len(raw) != n_pulses:
            raise ConfigError("pulses.phases", f"expected a list of {n_pulses} phases")
        phases = tuple(_number(x, f"pulses.phases[{i}]") for i, x in enumerate(raw))
    spec = GeometrySpec(kind, intervals, t0, k, phases, times)
    return spec.build(), spec


def _explicit_pulses(items, sp):
    if len(items) < 3:
        raise ConfigError("pulses", "need at least three pulses")
    out = []
    for i, item in enumerate(items):
        path = f"pulses[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(path, "expected a mapping")
        _check_keys(item, {"t", "k", "k_direction", "phase", "area", "k_down"}, path)
        t = _number(_get(item, "t", path, required=True), f"{path}.t")
        k = _wave_vector(item, path, sp)
        phase = _number(item.get("phase", 0.0), f"{path}.phase")
        default_area = math.pi / 2 if i in (0, len(items) - 1) else math.pi
        area = _number(item.get("area", default_area), f"{path}.area")
        if not 0 < area < 2 * math.pi:
            raise ConfigError(f"{path}.area", "must lie in (0, 2 pi)")
        k_down = _array(item["k_down"], (3,), f"{path}.k_down") if "k_down" in item else None
        if out and t <= out[-1].t:
            raise ConfigError(f"{path}.t", "pulse times must be strictly increasing")
        out.append(PulseSpec(t, k, phase, area, k_down))
    return out


def _state(doc, m):
    s = _get(doc, "state", "", required=True)
    if not isinstance(s, dict):
        raise ConfigError("state", "expected a mapping")
    _check_keys(s, {"x0", "p0", "v0", "covariance", "thermal"}, "state")
    x0 = _array(s.get("x0", [0, 0, 0]), (3,), "state.x0")
    if "p0" in s and "v0" in s:
        raise ConfigError("state.p0", "give either p0 or v0")
    if "v0" in s:
        p0 = m * _array(s["v0"], (3,), "state.v0")
    else:
        p0 = _array(s.get("p0", [0, 0, 0]), (3,), "state.p0")
    if ("covariance" in s) == ("thermal" in s):
        raise ConfigError("state.covariance", "give exactly one of covariance or thermal")
    if "covariance" in s:
        cov = _array(s["covariance"], (6, 6), "state.covariance")
        try:
            return GaussianState(np.concatenate([x0, p0]), cov)
        except ValueError as exc:
            raise ConfigError("state.covariance", str(exc)) from None
    th = s["thermal"]
    if not isinstance(th, dict):
        raise ConfigError("state.thermal", "expected a mapping")
    _check_keys(th, {"sigma_x", "sigma_v", "temperature"}, "state.thermal")
    sx = _number(_get(th, "sigma_x", "state.thermal", required=True), "state.thermal.sigma_x", positive=True)
    if ("sigma_v" in th) == ("temperature" in th):
        raise ConfigError("state.thermal.sigma_v", "give exactly one of sigma_v or temperature")
    if "sigma_v" in th:
        sv = _number(th["sigma_v"], "state.thermal.sigma_v", positive=True)
        return thermal_state(x0, p0, sx, sigma_v=sv, m=m)
    temp = _number(th["temperature"], "state.thermal.temperature", positive=True)
    return thermal_state(x0, p0, sx, m=m, temperature=temp)


def _method(doc):
    text = doc.get("method", "exact")
    if not isinstance(text, str):
        raise ConfigError("method", "expected a string")
    try:
        return PropagationMethod.parse(text)
    except ValueError as exc:
        raise ConfigError("method", str(exc)) from None


def _scan(doc, geometry):
    s = doc.get("scan")
    if s is None:
        return None
    if not isinstance(s, dict):
        raise ConfigError("scan", "expected a mapping")
    _check_keys(s, {"variable", "start", "stop", "steps", "endpoint", "values"}, "scan")
    var = _get(s, "variable", "scan", required=True)
    if var not in ("laser_phase_last", "T"):
        raise ConfigError("scan.variable", "must be laser_phase_last or T")
    if var == "T" and (geometry is None or geometry.kind == "multi_loop"):
        raise ConfigError("scan.variable", "T scans need a mach_zehnder or butterfly shorthand")
    if "values" in s:
        raw = s["values"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("scan.values", "expected a non-empty list")
        values = np.array([_number(v, f"scan.values[{i}]") for i, v in enumerate(raw)])
        values = np.sort(values)
    else:
        if var == "laser_phase_last":
            start = _number(s.get("start", 0.0), "scan.start")
            stop = _number(s.get("stop", 2 * math.pi), "scan.stop")
        else:
            start = _number(_get(s, "start", "scan", required=True), "scan.start")
            stop = _number(_get(s, "stop", "scan", required=True), "scan.stop")
        steps = s.get("steps", 64)
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError("scan.steps", "must be a positive integer")
        endpoint = s.get("endpoint", var != "laser_phase_last")
        if not isinstance(endpoint, bool):
            raise ConfigError("scan.endpoint", "must be true or false")
        if stop <= start:
            raise ConfigError("scan.stop", "must exceed scan.start")
        values = np.linspace(start, stop, steps, endpoint=endpoint)
    if var == "T" and np.any(values <= 0):
        raise ConfigError("scan.start", "T values must be positive")
    return ScanSpec(var, values)


_TOP = {"name", "species", "mass", "gravity", "frame", "pulses", "state", "method", "scan"}


def parse_scenario(doc: Any, name: str = "scenario") -> Scenario:
    """Validate a parsed document and build a :class:`Scenario`.

    Raises
    ------
    ConfigError
        With the dotted path of the first offending field.
    """
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "scenario must be a mapping")
    _check_keys(doc, _TOP, "")
    sp = _species(doc)
    m = _mass(doc, sp)
    gravity = _gravity(doc)
    frame = _frame(doc, gravity)
    pulses, geometry = _pulses(doc, sp)
    state = _state(doc, m)
    method = _method(doc)
    scan = _scan(doc, geometry)
    label = doc.get("name", name)
    if not isinstance(label, str):
        raise ConfigError("name", "expected a string")
    return Scenario(label, m, gravity, frame, pulses, state, method, geometry, scan, doc)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e14`` / ``6.771e6`` as floats.

    PyYAML follows YAML 1.1, where an exponent needs a sign and a mantissa
    needs a dot; scientific notation without them would arrive as strings.
    """


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                    |[-+]?\.(?:inf|Inf|INF)
                    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


def load_scenario(path) -> Scenario:
    """Read and validate a YAML scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.load(fh, Loader=_Loader)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    stem = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_scenario(doc, stem)
