"""The phi_eps regularization family of a piecewise field.

Z_eps(q) = (1 - phi(y/eps)) Y(q) + phi(y/eps) X(q) with a monotone
transition function phi: identically 0 left of -1, identically 1 right
of 1.  Emergent singularities live in the band |y| < eps and are located
by sign-grid bracketing plus damped Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad

from .errors import BadParameter, NoReturn
from .polys import PiecewiseField
from .tolerances import Tolerances, default_tols


@dataclass(frozen=True)
class TransitionFunction:
    """Monotone C^k ramp from 0 at t<=-1 to 1 at t>=1."""

    family: str          # "smoothstep" or "bump"
    parameter: int       # smoothstep order n (ignored for bump)
    smoothness: str      # "C1", "Cn" or "Cinf"
    _norm: float = field(default=1.0, repr=False)

    def __call__(self, t: float) -> float:
        if t <= -1.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        if self.family == "smoothstep":
            n = self.parameter
            val, _ = quad(lambda s: (1 - s * s) ** n, 0.0, t) if n > 3 else \
                (self._smoothstep_int(t), None)
            return 0.5 + val / self._norm
        val, _ = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), 0.0, t)
        return 0.5 + val / self._norm

    def _smoothstep_int(self, t: float) -> float:
        # closed forms of int_0^t (1-s^2)^n ds for small n
        n = self.parameter
        if n == 1:
            return t - t**3 / 3
        if n == 2:
            return t - 2 * t**3 / 3 + t**5 / 5
        return t - t**3 + 3 * t**5 / 5 - t**7 / 7  # n == 3

    def derivative(self, t: float) -> float:
        if t <= -1.0 or t >= 1.0:
            return 0.0
        if self.family == "smoothstep":
            return (1 - t * t) ** self.parameter / self._norm
        return math.exp(-1.0 / (1.0 - t * t)) / self._norm


def make_transition(family: str, parameter: int = 1) -> TransitionFunction:
    """SmoothstepN(n): phi' proportional to (1-t^2)^n (C^n at the seams,
    (2+3t-t^3)/4 for n=1); AnalyticBump: normalized integral of
    exp(-1/(1-t^2)), C-infinity."""
    if family in ("smoothstep", "smoothstep1", "SmoothstepN"):
        n = int(parameter)
        if n < 1:
            raise BadParameter("smoothstep order must be >= 1")
        if n <= 3:
            tf = TransitionFunction("smoothstep", n, f"C{n}")
            norm = 2 * tf._smoothstep_int(1.0)
        else:
            tf = TransitionFunction("smoothstep", n, f"C{n}")
            norm = 2 * quad(lambda s: (1 - s * s) ** n, 0.0, 1.0)[0]
        object.__setattr__(tf, "_norm", norm)
        return tf
    if family in ("bump", "AnalyticBump"):
        tf = TransitionFunction("bump", 0, "Cinf")
        norm = 2 * quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), 0.0, 1.0)[0]
        object.__setattr__(tf, "_norm", norm)
        return tf
    raise BadParameter(f"unknown transition family {family!r}")


@dataclass(frozen=True)
class RegularizedField:
    Z: PiecewiseField
    phi: TransitionFunction
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        t = y / self.epsilon
        if t >= 1.0:
            return self.Z.X(x, y)
        if t <= -1.0:
            return self.Z.Y(x, y)
        w = self.phi(t)
        vx = self.Z.X(x, y)
        vy = self.Z.Y(x, y)
        return ((1 - w) * vy[0] + w * vx[0], (1 - w) * vy[1] + w * vx[1])

    def jacobian_fd(self, x: float, y: float, h: float) -> np.ndarray:
        j = np.empty((2, 2))
        for col, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
            fp = self(x + dx, y + dy)
            fm = self(x - dx, y - dy)
            j[0, col] = (fp[0] - fm[0]) / (2 * h)
            j[1, col] = (fp[1] - fm[1]) / (2 * h)
        return j


def eval_regularized(R: RegularizedField, q: tuple[float, float]) -> tuple[float, float]:
    return R(q[0], q[1])


class SingularityType(Enum):
    SADDLE = "Saddle"
    NODE = "Node"
    FOCUS = "Focus"
    BORDERLINE = "Borderline"


@dataclass(frozen=True)
class EmergentSingularity:
    position: tuple[float, float]
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    type: SingularityType


def _classify_eigs(eigs: np.ndarray, tol: float) -> SingularityType:
    l1, l2 = eigs
    if abs(l1.imag) > tol or abs(l2.imag) > tol:
        if abs(l1.real) > tol:
            return SingularityType.FOCUS
        return SingularityType.BORDERLINE
    r1, r2 = l1.real, l2.real
    if abs(r1) <= tol or abs(r2) <= tol:
        return SingularityType.BORDERLINE
    if r1 * r2 < 0:
        return SingularityType.SADDLE
    return SingularityType.NODE


def _newton(R: RegularizedField, x0: float, y0: float,
            tols: Tolerances) -> tuple[float, float] | None:
    h = 1e-6 * max(1.0, R.epsilon)
    x, y = x0, y0
    f = np.array(R(x, y))
    res = float(np.linalg.norm(f))
    for _ in range(50):
        if res <= tols.newton:
            return (x, y)
        j = R.jacobian_fd(x, y, h)
        try:
            step = np.linalg.solve(j, f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(20):
            xn, yn = x - lam * step[0], y - lam * step[1]
            fn = np.array(R(xn, yn))
            rn = float(np.linalg.norm(fn))
            if rn < res:
                x, y, f, res = xn, yn, fn, rn
                break
            lam *= 0.5
        else:
            return None
    return (x, y) if res <= tols.newton else None


def emergent_singularities(R: RegularizedField,
                           x_window: tuple[float, float],
                           tols: Tolerances | None = None
                           ) -> list[EmergentSingularity]:
    """All zeros of Z_eps in the band x in window, |y| <= eps.

    Grid step eps/20 resolves the band where emergent singularities are
    isolated for small eps; cells showing sign variation in both
    components seed a damped Newton run; converged zeros are merged when
    closer than 10 * tol_root.
    """
    tols = tols or default_tols()
    eps = R.epsilon
    step = eps / 20.0
    xs = np.arange(x_window[0], x_window[1] + step, step)
    ys = np.arange(-eps, eps + step / 2, step)
    XX, YY = np.meshgrid(xs, ys, indexing="ij")
    U = np.empty_like(XX)
    V = np.empty_like(XX)
    for i in range(XX.shape[0]):
        for j in range(XX.shape[1]):
            U[i, j], V[i, j] = R(XX[i, j], YY[i, j])

    def varies(W, i, j):
        c = W[i:i + 2, j:j + 2]
        return c.min() <= 0.0 <= c.max()

    found: list[tuple[float, float]] = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            if varies(U, i, j) and varies(V, i, j):
                sol = _newton(R, XX[i, j] + step / 2, YY[i, j] + step / 2, tols)
                if sol is None:
                    continue
                x, y = sol
                if not (x_window[0] - step <= x <= x_window[1] + step
                        and abs(y) <= eps + step):
                    continue
                if any(math.hypot(x - a, y - b) <= 10 * tols.root
                       for a, b in found):
                    continue
                found.append((x, y))

    out = []
    h = 1e-6 * max(1.0, eps)
    for x, y in sorted(found):
        j = R.jacobian_fd(x, y, h)
        eigs = np.linalg.eigvals(j)
        out.append(EmergentSingularity(
            (x, y), j, (complex(eigs[0]), complex(eigs[1])),
            _classify_eigs(eigs, tols.sign)))
    return out


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    singularities: list[EmergentSingularity]


def epsilon_sweep(Z: PiecewiseField, phi: TransitionFunction,
                  x_window: tuple[float, float], eps_list: list[float],
                  tols: Tolerances | None = None) -> list[SweepRow]:
    """One emergent-singularity census per epsilon, descending."""
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("eps_list must be positive")
    if list(eps_list) != sorted(eps_list, reverse=True):
        raise ValueError("eps_list must be descending")
    rows = []
    for eps in eps_list:
        R = RegularizedField(Z, phi, eps)
        rows.append(SweepRow(eps, emergent_singularities(R, x_window, tols)))
    return rows


@dataclass(frozen=True)
class RegularizedCycle:
    epsilon: float
    section_value: float
    return_derivative: float
    hyperbolic: bool


def regularized_cycle_search(Z: PiecewiseField, phi: TransitionFunction,
                             epsilon: float, section_x: float,
                             s_range: tuple[float, float],
                             horizon: float = 50.0,
                             tols: Tolerances | None = None
                             ) -> list[RegularizedCycle]:
    """Limit cycles of the regularized field crossing the vertical section
    x=section_x, y in s_range: fixed points of the smooth first-return map
    found by bisection on eta(s)-s, with a central-difference derivative.
    """
    from scipy.integrate import solve_ivp

    from .flow import Section

    tols = tols or default_tols()
    R = RegularizedField(Z, phi, epsilon)
    sec = Section((section_x, 0.0), (0.0, 1.0), s_range)

    def eta(s: float) -> float:
        p = sec.point(s)

        def rhs(t, st):
            return list(R(st[0], st[1]))

        def sec_event(t, st):
            return st[0] - section_x
        sec_event.terminal = True
        sec_event.direction = -1 if R(p[0], p[1])[0] < 0 else 1

        # leave the section before arming the event: integrate a short leg
        sol0 = solve_ivp(rhs, (0.0, 1e-3), list(p), rtol=1e-11, atol=1e-13)
        q = [float(sol0.y[0][-1]), float(sol0.y[1][-1])]

        def ret_event(t, st):
            return st[0] - section_x
        ret_event.terminal = True
        ret_event.direction = sec_event.direction

        sol = solve_ivp(rhs, (0.0, horizon), q, rtol=1e-11, atol=1e-13,
                        events=[ret_event])
        if len(sol.t_events[0]) == 0:
            raise NoReturn(f"no return from s={s}")
        return float(sol.y_events[0][0][1])

    lo, hi = s_range
    n_grid = 24
    ss = np.linspace(lo, hi, n_grid)
    gs = []
    for s in ss:
        try:
            gs.append(eta(s) - s)
        except NoReturn:
            gs.append(np.nan)
    cycles = []
    for k in range(n_grid - 1):
        a, b = gs[k], gs[k + 1]
        if np.isnan(a) or np.isnan(b) or a * b > 0:
            continue
        from scipy.optimize import brentq
        s_star = brentq(lambda s: eta(s) - s, ss[k], ss[k + 1],
                        xtol=tols.root)
        h = tols.h_fd * max(1.0, abs(hi - lo))
        d = (eta(s_star + h) - eta(s_star - h)) / (2 * h)
        if any(abs(s_star - c.section_value) < 1e-8 for c in cycles):
            continue
        cycles.append(RegularizedCycle(epsilon, float(s_star), float(d),
                                       abs(d - 1.0) > tols.sign))
    return cycles
