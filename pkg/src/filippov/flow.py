"""Hybrid trajectory integration with Filippov transition rules.

Smooth arcs are traced with an adaptive Runge-Kutta integrator whose y=0
events are localized by the solver's root finder; sliding arcs integrate
the one-dimensional Filippov field along D.  Transitions follow the
poly-trajectory rules: X/Y swaps only at sewing points, entry/exit of
sliding arcs only at folds or regular sliding points, termination at
Filippov-field singularities and on escaping arcs (forward evolution is
not unique there and trajectories are never silently branched).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from . import dline
from .dline import PointTag
from .errors import (
    ClassificationAmbiguous,
    NoReturn,
    NotTransversal,
    StepFailure,
)
from .polys import PiecewiseField, PolyVectorField
from .tolerances import Tolerances, default_tols

Window = tuple[float, float, float, float]  # x0, x1, y0, y1


class EventKind(Enum):
    CROSSING_AT_SEWING = "CrossingAtSewing"
    ENTER_SLIDING = "EnterSliding"
    EXIT_AT_FOLD = "ExitAtFold"
    REACH_FZ_SINGULARITY = "ReachFzSingularity"
    NON_UNIQUE_FORWARD = "NonUniqueForward"
    FOLD_GRAZE = "FoldGraze"
    WINDOW_EXIT = "WindowExit"
    TIME_BUDGET = "TimeBudget"
    CLOSED = "Closed"
    SECTION_CROSSING = "SectionCrossing"


class Closure(Enum):
    NO = "No"
    TYPE1 = "Type1"
    TYPE3 = "Type3"


@dataclass(frozen=True)
class TrajectoryArc:
    tag: str  # "X", "Y" or "FZ"
    t_span: tuple[float, float]
    ts: np.ndarray
    states: np.ndarray  # shape (n, 2)


@dataclass(frozen=True)
class TrajectoryEvent:
    time: float
    kind: EventKind
    state: tuple[float, float]


@dataclass
class PolyTrajectory:
    arcs: list[TrajectoryArc] = field(default_factory=list)
    events: list[TrajectoryEvent] = field(default_factory=list)
    closed: Closure = Closure.NO

    def end_state(self) -> tuple[float, float]:
        s = self.arcs[-1].states[-1]
        return (float(s[0]), float(s[1]))

    def validate(self, tols: Tolerances | None = None) -> None:
        """Machine-check of the poly-trajectory legality invariants."""
        tols = tols or default_tols()
        tags = [a.tag for a in self.arcs]
        for a, b in zip(tags, tags[1:]):
            if {a, b} == {"X", "Y"}:
                continue
            if "FZ" in (a, b):
                continue
            if a == b:
                continue
            raise AssertionError(f"illegal transition {a} -> {b}")
        if self.closed is Closure.TYPE1:
            assert all(a.tag in ("X", "Y") for a in self.arcs)
        if self.closed is Closure.TYPE3:
            assert any(a.tag == "FZ" for a in self.arcs)


@dataclass(frozen=True)
class Section:
    """Parameterized transversal segment base + s * direction."""

    base: tuple[float, float]
    direction: tuple[float, float]
    s_range: tuple[float, float]

    def point(self, s: float) -> tuple[float, float]:
        return (self.base[0] + s * self.direction[0],
                self.base[1] + s * self.direction[1])

    def param_of(self, p: tuple[float, float]) -> float:
        dx, dy = self.direction
        return ((p[0] - self.base[0]) * dx + (p[1] - self.base[1]) * dy) / (
            dx * dx + dy * dy)

    def signed_dist(self, p: tuple[float, float]) -> float:
        dx, dy = self.direction
        return dx * (p[1] - self.base[1]) - dy * (p[0] - self.base[0])


@dataclass(frozen=True)
class SmoothTrace:
    ts: np.ndarray
    states: np.ndarray
    status: str  # "d_hit", "window", "horizon", "section"
    hit_state: tuple[float, float] | None


def _window_events(window: Window):
    x0, x1, y0, y1 = window

    def make(idx, bound, direction):
        def g(t, s):
            return s[idx] - bound
        g.terminal = True
        g.direction = direction
        return g

    return [make(0, x1, 1), make(0, x0, -1), make(1, y1, 1), make(1, y0, -1)]


def integrate_smooth(X: PolyVectorField, p0: tuple[float, float],
                     horizon: float, window: Window,
                     d_direction: int = 0,
                     section: Section | None = None,
                     section_direction: int = 0,
                     tols: Tolerances | None = None,
                     extra_quadrature=None) -> SmoothTrace:
    """Adaptive RK45 trace of X from p0, stopping at the first y=0
    crossing (in the given direction), window exit or horizon.

    d_direction: -1 catches downward crossings (flows in N), +1 upward,
    0 both.  An optional section event stops the trace at a transversal
    crossing of the segment (matching section_direction when nonzero).
    An optional extra_quadrature(x, y) integrand is accumulated as a third
    state component (used for divergence integrals).
    """
    tols = tols or default_tols()
    aug = extra_quadrature is not None

    def rhs(t, s):
        v = X(s[0], s[1])
        if aug:
            return [v[0], v[1], extra_quadrature(s[0], s[1])]
        return [v[0], v[1]]

    def y_event(t, s):
        return s[1]
    y_event.terminal = True
    y_event.direction = d_direction

    events = [y_event] + _window_events(window)
    if section is not None:
        def sec_event(t, s):
            return section.signed_dist((s[0], s[1]))
        sec_event.terminal = True
        sec_event.direction = section_direction
        events.append(sec_event)

    y0 = list(p0) + ([0.0] if aug else [])
    sol = solve_ivp(rhs, (0.0, horizon), y0, method="RK45",
                    rtol=1e-10, atol=1e-12, events=events, dense_output=True,
                    max_step=max(abs(horizon) / 10.0, 1e-3))
    if sol.status == -1:
        raise StepFailure(sol.message)

    # restart past a section crossing that is not inside the parameter range
    if section is not None and len(sol.t_events[5]) > 0:
        te = float(sol.t_events[5][0])
        se = sol.y_events[5][0]
        s_par = section.param_of((se[0], se[1]))
        if not (section.s_range[0] <= s_par <= section.s_range[1]) or te <= 1e-12:
            # ignore this crossing: resume from just past it
            t_shift = te + 1e-9 * max(1.0, abs(horizon))
            if t_shift < horizon:
                state = [float(v) for v in sol.sol(t_shift)]
                tail = integrate_smooth(
                    X, (state[0], state[1]), horizon - t_shift, window,
                    d_direction, section, section_direction, tols,
                    extra_quadrature)
                ts = np.concatenate([sol.t[sol.t <= t_shift], tail.ts + t_shift])
                states = np.vstack([sol.y.T[sol.t <= t_shift],
                                    tail.states])
                return SmoothTrace(ts, states, tail.status, tail.hit_state)

    status = "horizon"
    hit = None
    t_end = sol.t[-1]
    if len(sol.t_events[0]) > 0:
        status = "d_hit"
        t_end = float(sol.t_events[0][0])
        se = sol.y_events[0][0]
        hit = (float(se[0]), 0.0)
    elif any(len(sol.t_events[k]) > 0 for k in range(1, 5)):
        status = "window"
    elif section is not None and len(sol.t_events[5]) > 0:
        status = "section"
        se = sol.y_events[5][0]
        hit = (float(se[0]), float(se[1]))

    mask = sol.t <= t_end + 1e-15
    ts = sol.t[mask]
    states = sol.y.T[mask]
    if status in ("d_hit", "section"):
        end_state = sol.y_events[0][0] if status == "d_hit" else sol.y_events[5][0]
        ts = np.append(ts, t_end)
        states = np.vstack([states, end_state])
    return SmoothTrace(ts, states, status, hit)


def _fz_rhs(Z: PiecewiseField):
    p1, q1 = Z.X.P, Z.X.Q
    p2, q2 = Z.Y.P, Z.Y.Q

    def rhs(x):
        xf = q1(x, 0.0)
        yf = q2(x, 0.0)
        return (yf * p1(x, 0.0) - xf * p2(x, 0.0)) / (yf - xf)

    return rhs


def _slide(Z: PiecewiseField, x0: float, horizon: float,
           window: Window, tols: Tolerances,
           section: Section | None = None) -> tuple:
    """Integrate the 1-D Filippov field along D from x0.

    Returns (ts, xs, outcome, x_end) with outcome one of
    'q1_root', 'q2_root', 'fz_singularity', 'window', 'horizon', 'section'.
    """
    fz = _fz_rhs(Z)
    q1 = Z.X.Q
    q2 = Z.Y.Q
    det = dline.det_xy(Z)

    def rhs(t, s):
        return [fz(s[0])]

    def ev_q1(t, s):
        return q1(s[0], 0.0)

    def ev_q2(t, s):
        return q2(s[0], 0.0)

    def ev_det(t, s):
        return det(s[0], 0.0)

    def ev_xlo(t, s):
        return s[0] - window[0]

    def ev_xhi(t, s):
        return s[0] - window[1]

    events = [ev_q1, ev_q2, ev_det, ev_xlo, ev_xhi]
    for e in events:
        e.terminal = True
        e.direction = 0
    if section is not None and abs(section.direction[1]) < 1e-15:
        def ev_sec(t, s):
            return s[0] - section.base[0]
        ev_sec.terminal = True
        events.append(ev_sec)

    sol = solve_ivp(rhs, (0.0, horizon), [x0], method="RK45",
                    rtol=1e-10, atol=1e-12, events=events)
    if sol.status == -1:
        raise StepFailure(sol.message)
    names = ["q1_root", "q2_root", "fz_singularity", "window", "window",
             "section"]
    outcome = "horizon"
    t_end, x_end = sol.t[-1], float(sol.y[0][-1])
    for k, name in enumerate(names[: len(events)]):
        if len(sol.t_events[k]) > 0 and sol.t_events[k][0] <= t_end:
            t_end = float(sol.t_events[k][0])
            x_end = float(sol.y_events[k][0][0])
            outcome = name
    mask = sol.t <= t_end + 1e-15
    return sol.t[mask], sol.y[0][mask], outcome, x_end


def advance_hybrid(Z: PiecewiseField, p0: tuple[float, float], side: str,
                   horizon: float, window: Window,
                   tols: Tolerances | None = None,
                   max_arcs: int = 64,
                   section: Section | None = None,
                   section_direction: int = 0) -> PolyTrajectory:
    """Alternate smooth and sliding arcs under the Filippov rules.

    side: 'N', 'S' or 'D' (consistent with p0).  When a section is given,
    transversal crossings of it terminate the trajectory with a
    SectionCrossing event (used by return maps).
    """
    tols = tols or default_tols()
    traj = PolyTrajectory()
    t = 0.0
    p = (float(p0[0]), float(p0[1]))

    def record(kind: EventKind, state=None):
        traj.events.append(TrajectoryEvent(t, kind, state or p))

    if side == "D":
        cls = dline.classify_point(Z, p[0], tols)
        if cls.tag is PointTag.SEWING:
            side = "N" if cls.xf > 0 else "S"
        elif cls.tag is PointTag.SLIDING:
            side = "SLIDE"
        elif cls.tag is PointTag.ESCAPING:
            record(EventKind.NON_UNIQUE_FORWARD)
            return traj
        else:
            raise ClassificationAmbiguous(
                f"start point x={p[0]} is {cls.tag.value}")

    start = p
    started_on_d = abs(p[1]) <= tols.event
    crossings: list[tuple[float, str]] = []
    for _ in range(max_arcs):
        if t >= horizon:
            record(EventKind.TIME_BUDGET)
            break
        if side in ("N", "S"):
            fld = Z.X if side == "N" else Z.Y
            ddir = -1 if side == "N" else 1
            tr = integrate_smooth(fld, p, horizon - t, window, ddir,
                                  section, section_direction, tols)
            traj.arcs.append(TrajectoryArc(
                "X" if side == "N" else "Y",
                (t, t + tr.ts[-1]), tr.ts + t, tr.states[:, :2]))
            t += float(tr.ts[-1])
            if tr.status == "window":
                p = (float(tr.states[-1, 0]), float(tr.states[-1, 1]))
                record(EventKind.WINDOW_EXIT)
                break
            if tr.status == "horizon":
                p = (float(tr.states[-1, 0]), float(tr.states[-1, 1]))
                record(EventKind.TIME_BUDGET)
                break
            if tr.status == "section":
                p = tr.hit_state
                record(EventKind.SECTION_CROSSING)
                break
            # D hit
            p = tr.hit_state
            cls = dline.classify_point(Z, p[0], tols)
            if cls.tag is PointTag.SEWING:
                new_side = "S" if side == "N" else "N"
                # a repeated crossing means the trajectory is periodic;
                # only needed for seeds off D, where the start-point
                # proximity check below can never fire
                if not started_on_d and any(
                        abs(p[0] - xc) <= tols.close and sc == new_side
                        for xc, sc in crossings):
                    tags = {a.tag for a in traj.arcs}
                    if tags <= {"X", "Y"}:
                        traj.closed = Closure.TYPE1
                    elif "FZ" in tags and any(
                            e.kind is EventKind.EXIT_AT_FOLD
                            for e in traj.events):
                        traj.closed = Closure.TYPE3
                    record(EventKind.CLOSED)
                    break
                crossings.append((p[0], new_side))
                record(EventKind.CROSSING_AT_SEWING)
                side = new_side
            elif cls.tag is PointTag.SLIDING:
                record(EventKind.ENTER_SLIDING)
                side = "SLIDE"
            elif cls.tag is PointTag.ESCAPING:
                record(EventKind.NON_UNIQUE_FORWARD)
                break
            elif cls.tag in (PointTag.TANGENCY_X, PointTag.TANGENCY_Y):
                own = (cls.tag is PointTag.TANGENCY_X) == (side == "N")
                lie2 = dline.second_lie_derivative(
                    Z.X if side == "N" else Z.Y)(p[0], 0.0)
                curves_back = lie2 > 0 if side == "N" else lie2 < 0
                if own and abs(lie2) > tols.sign and curves_back:
                    record(EventKind.FOLD_GRAZE)
                    # graze: continue with the same field nudged off D
                    p = (p[0], math.copysign(tols.event, 1 if side == "N" else -1))
                else:
                    raise ClassificationAmbiguous(
                        f"hit tangency at x={p[0]} while flowing {side}")
            else:
                raise ClassificationAmbiguous(
                    f"hit TangencyBoth at x={p[0]}")
        else:  # SLIDE
            if abs(dline.det_xy(Z)(p[0], 0.0)) <= tols.sign:
                traj.arcs.append(TrajectoryArc(
                    "FZ", (t, t), np.array([t]), np.array([[p[0], 0.0]])))
                record(EventKind.REACH_FZ_SINGULARITY)
                break
            ts, xs, outcome, x_end = _slide(Z, p[0], horizon - t, window,
                                            tols, section)
            states = np.column_stack([xs, np.zeros_like(xs)])
            traj.arcs.append(TrajectoryArc("FZ", (t, t + ts[-1]),
                                           ts + t, states))
            t += float(ts[-1])
            p = (x_end, 0.0)
            if outcome == "fz_singularity":
                record(EventKind.REACH_FZ_SINGULARITY)
                break
            if outcome == "window":
                record(EventKind.WINDOW_EXIT)
                break
            if outcome == "horizon":
                record(EventKind.TIME_BUDGET)
                break
            if outcome == "section":
                record(EventKind.SECTION_CROSSING)
                break
            # fold exit: into the region of the field whose tangency vanishes
            if outcome in ("q1_root", "q2_root"):
                fld = Z.X if outcome == "q1_root" else Z.Y
                other = Z.Y.Q if outcome == "q1_root" else Z.X.Q
                lie2 = dline.second_lie_derivative(fld)(p[0], 0.0)
                if abs(lie2) <= tols.sign or abs(other(p[0], 0.0)) <= tols.sign:
                    raise ClassificationAmbiguous(
                        f"sliding arc ends at non-fold tangency x={p[0]}")
                record(EventKind.EXIT_AT_FOLD)
                side = "N" if outcome == "q1_root" else "S"
                p = (p[0], math.copysign(tols.event, 1 if side == "N" else -1))
        # closure check at transition points on D
        if abs(p[1]) <= tols.close and len(traj.arcs) >= 2 \
                and math.hypot(p[0] - start[0], p[1] - start[1]) <= tols.close:
            tags = {a.tag for a in traj.arcs}
            has_fold = any(e.kind is EventKind.EXIT_AT_FOLD for e in traj.events)
            if tags <= {"X", "Y"}:
                traj.closed = Closure.TYPE1
            elif "FZ" in tags and has_fold:
                traj.closed = Closure.TYPE3
            record(EventKind.CLOSED)
            break
    else:
        record(EventKind.TIME_BUDGET)
    return traj


def transition_derivative(X: PolyVectorField, p0: tuple[float, float],
                          p1: tuple[float, float], sec0: Section,
                          sec1: Section, t_span: float,
                          tols: Tolerances | None = None) -> float:
    """Derivative of the transition map between two transversal sections
    along the flow of X: boundary determinant ratio times the exponential
    of the divergence integral along the orbit."""
    tols = tols or default_tols()
    div = X.divergence()
    big = 1e6
    window = (-big, big, -big, big)
    tr = integrate_smooth(
        X, p0, t_span * 1.5, window, d_direction=0, section=sec1,
        section_direction=0, tols=tols,
        extra_quadrature=lambda x, y: div(x, y))
    # d_direction=0 means a y=0 crossing would stop us; rerun without the
    # y event by shifting the problem: use the section status only
    if tr.status != "section":
        # trajectory may lie on y=0 or cross it; integrate ignoring D
        tr = _integrate_to_section_no_d(X, p0, t_span * 1.5, sec1, div)
    if tr.status != "section":
        raise NoReturn("orbit did not reach the target section")
    end = tr.states[-1]
    v0 = X(p0[0], p0[1])
    v1 = X(float(end[0]), float(end[1]))
    d0 = v0[0] * sec0.direction[1] - v0[1] * sec0.direction[0]
    d1 = v1[0] * sec1.direction[1] - v1[1] * sec1.direction[0]
    if abs(d0) <= tols.sign or abs(d1) <= tols.sign:
        raise NotTransversal("section parallel to the field")
    integral = float(tr.states[-1, 2])
    return (d0 / d1) * math.exp(integral)


def _integrate_to_section_no_d(X: PolyVectorField, p0, horizon,
                               section: Section, div) -> SmoothTrace:
    def rhs(t, s):
        v = X(s[0], s[1])
        return [v[0], v[1], div(s[0], s[1])]

    def sec_event(t, s):
        return section.signed_dist((s[0], s[1]))
    sec_event.terminal = True
    sec_event.direction = 0

    # short event-free leg first: the start may lie on the section's line
    t_pre = min(1e-3, horizon * 1e-3)
    pre = solve_ivp(rhs, (0.0, t_pre), [p0[0], p0[1], 0.0], method="RK45",
                    rtol=1e-11, atol=1e-13)
    q = [float(v) for v in pre.y[:, -1]]
    sol = solve_ivp(rhs, (t_pre, horizon), q, method="RK45",
                    rtol=1e-11, atol=1e-13, events=[sec_event])
    status = "section" if len(sol.t_events[0]) > 0 else "horizon"
    states = sol.y.T
    if status == "section":
        states = np.vstack([states, sol.y_events[0][0]])
    return SmoothTrace(sol.t, states, status, None)


def return_map(Z: PiecewiseField, section: Section, s0: float,
               horizon: float, window: Window | None = None,
               tols: Tolerances | None = None,
               with_derivative: bool = True) -> tuple[float, float | None]:
    """First-return parameter s1 of the hybrid flow from section(s0) and
    the finite-difference derivative eta'(s0) (central, Richardson once)."""
    tols = tols or default_tols()
    if window is None:
        big = 50.0
        window = (-big, big, -big, big)

    def eta(s: float) -> float:
        p = section.point(s)
        on_d = abs(p[1]) <= tols.event
        side = "D" if on_d else ("N" if p[1] > 0 else "S")
        if on_d:
            # returns to the section are D hits with matching param
            traj = _return_on_d(Z, p, horizon, window, section, tols)
        else:
            traj = advance_hybrid(Z, p, side, horizon, window, tols,
                                  section=section, section_direction=0)
        last = traj.events[-1] if traj.events else None
        if last is None or last.kind not in (EventKind.SECTION_CROSSING,
                                             EventKind.CLOSED):
            raise NoReturn(f"no return from s={s}")
        return section.param_of(traj.end_state())

    s1 = eta(s0)
    if not with_derivative:
        return s1, None
    span = abs(section.s_range[1] - section.s_range[0])
    h = tols.h_fd * max(span, 1.0)
    d_h = (eta(s0 + h) - eta(s0 - h)) / (2 * h)
    d_h2 = (eta(s0 + h / 2) - eta(s0 - h / 2)) / h
    eta_prime = (4 * d_h2 - d_h) / 3.0  # one Richardson step
    return s1, eta_prime


def _return_on_d(Z: PiecewiseField, p, horizon, window,
                 section: Section, tols) -> PolyTrajectory:
    """Return map helper for sections lying on D; the return is the next
    D-crossing in the same direction with parameter inside the range."""
    cls = dline.classify_point(Z, p[0], tols)
    if cls.tag is not PointTag.SEWING:
        raise NoReturn("D-section seed not on a sewing arc")
    start_side = "N" if cls.xf > 0 else "S"
    traj = advance_hybrid(Z, p, "D", horizon, window, tols)
    # walk crossings: a valid return resumes the starting side
    t_seen = 0.0
    for ev in traj.events:
        if ev.kind is EventKind.CLOSED:
            traj.events.append(TrajectoryEvent(ev.time,
                                               EventKind.SECTION_CROSSING,
                                               ev.state))
            return traj
        if ev.kind is EventKind.CROSSING_AT_SEWING and ev.time > t_seen:
            x = ev.state[0]
            xf = Z.X.Q(x, 0.0)
            side_after = "N" if xf > 0 else "S"
            s_par = section.param_of((x, 0.0))
            if side_after == start_side and \
                    section.s_range[0] <= s_par <= section.s_range[1] \
                    and ev.time > 1e-9:
                cut = PolyTrajectory(
                    arcs=[a for a in traj.arcs if a.t_span[0] < ev.time],
                    events=[e for e in traj.events if e.time <= ev.time],
                    closed=traj.closed)
                # trim the last arc to the crossing
                cut.events.append(TrajectoryEvent(ev.time,
                                                  EventKind.SECTION_CROSSING,
                                                  (x, 0.0)))
                last = cut.arcs[-1]
                cut.arcs[-1] = TrajectoryArc(
                    last.tag, (last.t_span[0], ev.time), last.ts, last.states)
                # force the exact crossing state
                cut.arcs[-1].states[-1] = [x, 0.0]
                return cut
    raise NoReturn("no matching D-crossing")


def compactified_return_map(Z: PiecewiseField, rho0: float,
                            h_fd: float = 1e-4,
                            tols: Tolerances | None = None
                            ) -> tuple[float, float]:
    """Return map of the compactified field on the section theta=0 and its
    central finite-difference derivative at rho0.

    Valid when the equator carries no singular points (theta moves
    monotonically); integrates d(rho)/d(theta) across both halves.
    """
    from .compactify import compactified_field

    tf = compactified_field(Z)

    def rho_after_loop(r0: float) -> float:
        def rhs_upper(theta, s):
            v = tf.eval_upper(theta, s[0])
            return [v[1] / v[0]]

        def rhs_lower(theta, s):
            v = tf.eval_lower(theta, s[0])
            return [v[1] / v[0]]

        sign = 1 if tf.eval_upper(math.pi / 2, 0.0)[0] > 0 else -1
        if sign > 0:
            leg1 = solve_ivp(rhs_upper, (0.0, math.pi), [r0],
                             rtol=1e-12, atol=1e-14)
            leg2 = solve_ivp(rhs_lower, (math.pi, 2 * math.pi),
                             [float(leg1.y[0][-1])], rtol=1e-12, atol=1e-14)
        else:
            leg1 = solve_ivp(rhs_lower, (2 * math.pi, math.pi), [r0],
                             rtol=1e-12, atol=1e-14)
            leg2 = solve_ivp(rhs_upper, (math.pi, 0.0),
                             [float(leg1.y[0][-1])], rtol=1e-12, atol=1e-14)
        return float(leg2.y[0][-1])

    rho1 = rho_after_loop(rho0)
    d = (rho_after_loop(rho0 + h_fd) - rho_after_loop(rho0 - h_fd)) / (2 * h_fd)
    return rho1, d


@dataclass(frozen=True)
class ClosedOrbit:
    trajectory: PolyTrajectory
    closure: Closure
    elementary: str  # "yes", "no", "undetermined"
    certificate: dict


def find_closed_polytrajectories(Z: PiecewiseField, window: Window,
                                 seeds: list[float] | None = None,
                                 horizon: float = 100.0,
                                 tols: Tolerances | None = None
                                 ) -> list[ClosedOrbit]:
    """Heuristic census of closed poly-trajectories.

    Type-1 candidates come from fixed points of the D-section return map
    started at seed abscissas on sewing arcs (secant iteration); type-3
    candidates from hybrid runs seeded at fold points.  Misses are
    possible; the search is a semi-decision.
    """
    tols = tols or default_tols()
    if seeds is None:
        seeds = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0]
    found: list[ClosedOrbit] = []
    seen_x: list[float] = []

    span = (window[0], window[1])
    for s0 in seeds:
        if not (window[0] < s0 < window[1]):
            continue
        cls = dline.classify_point(Z, s0, tols)
        if cls.tag is not PointTag.SEWING:
            continue
        section = Section((0.0, 0.0), (1.0, 0.0), span)

        def g(s):
            s1, _ = return_map(Z, section, s, horizon, window, tols,
                               with_derivative=False)
            return s1 - s

        try:
            s_star = _secant_fixed_point(g, s0, tols)
        except NoReturn:
            continue
        if s_star is None or not (window[0] < s_star < window[1]):
            continue
        if abs(s_star) < 1e-3:  # degenerate loop shrunk into the origin
            continue
        if any(abs(s_star - x) <= 1e-5 for x in seen_x):
            continue
        cls_star = dline.classify_point(Z, s_star, tols)
        if cls_star.tag is not PointTag.SEWING:
            continue
        try:
            _, eta_prime = return_map(Z, section, s_star, horizon, window, tols)
            traj = advance_hybrid(Z, (s_star, 0.0), "D", horizon, window, tols)
        except (NoReturn, ClassificationAmbiguous):
            continue
        if traj.closed is not Closure.TYPE1:
            continue
        seen_x.append(s_star)
        # record every sewing abscissa of the orbit so the same cycle is
        # not reported again from a seed on its other D-crossing
        for ev in traj.events:
            if ev.kind is EventKind.CROSSING_AT_SEWING:
                seen_x.append(float(ev.state[0]))
        elem = "yes" if abs(eta_prime - 1.0) > tols.sign else "no"
        found.append(ClosedOrbit(traj, Closure.TYPE1, elem,
                                 {"eta_prime": eta_prime, "x": s_star}))

    # type-3 candidates from fold points
    for fold in dline.fold_points(Z, span, tols):
        if fold.kind not in (dline.SingKind.FOLD_X, dline.SingKind.FOLD_Y):
            continue
        side = "N" if fold.kind is dline.SingKind.FOLD_X else "S"
        p = (fold.x, math.copysign(tols.event, 1 if side == "N" else -1))
        try:
            traj = advance_hybrid(Z, p, side, horizon, window, tols)
        except (ClassificationAmbiguous, StepFailure):
            continue
        if traj.closed is Closure.TYPE3:
            classes = set()
            for arc in traj.arcs:
                if arc.tag == "FZ":
                    mid = arc.states[len(arc.states) // 2]
                    classes.add(dline.classify_point(Z, float(mid[0]), tols).tag)
            elem = "yes" if len(classes) == 1 else "no"
            found.append(ClosedOrbit(traj, Closure.TYPE3, elem,
                                     {"fold_x": fold.x}))
    return found


def _secant_fixed_point(g, s0: float, tols: Tolerances,
                        max_iter: int = 30) -> float | None:
    g0 = g(s0)
    if abs(g0) <= tols.close:
        return s0
    s1 = s0 * 1.05 + 1e-3
    g1 = g(s1)
    for _ in range(max_iter):
        if abs(g1) <= tols.root * 1e3:
            return s1
        denom = g1 - g0
        if denom == 0.0:
            return None
        s2 = s1 - g1 * (s1 - s0) / denom
        s0, g0, s1 = s1, g1, s2
        g1 = g(s1)
    return s1 if abs(g1) <= tols.close else None


@dataclass(frozen=True)
class SaddleSpec:
    kind: str  # "X", "Y" or "FZ"
    point: tuple[float, float]


@dataclass(frozen=True)
class SeparatrixBranch:
    saddle_index: int
    stability: str  # "stable" or "unstable"
    label: str
    points: np.ndarray


@dataclass(frozen=True)
class ConnectionReport:
    branches: list[SeparatrixBranch]
    distances: np.ndarray
    flagged: list[tuple[int, int]]


def probe_saddle_connections(Z: PiecewiseField, saddles: list[SaddleSpec],
                             horizon: float = 30.0,
                             window: Window = (-5, 5, -5, 5),
                             tols: Tolerances | None = None
                             ) -> ConnectionReport:
    """Trace separatrix branches of certified saddles and record minimum
    pairwise distances; close approaches are flagged PossibleConnection.

    Same-saddle branch pairs exclude points within a small radius of the
    saddle so the seeding offset does not self-flag."""
    tols = tols or default_tols()
    branches: list[SeparatrixBranch] = []
    for idx, sad in enumerate(saddles):
        if sad.kind in ("X", "Y"):
            fld = Z.X if sad.kind == "X" else Z.Y
            jpx, jpy, jqx, jqy = fld.jacobian()
            x0, y0 = sad.point
            J = np.array([[jpx(x0, y0), jpy(x0, y0)],
                          [jqx(x0, y0), jqy(x0, y0)]])
            eigvals, eigvecs = np.linalg.eig(J)
            for col, lam in enumerate(eigvals):
                v = np.real(eigvecs[:, col])
                v = v / np.linalg.norm(v)
                stab = "unstable" if np.real(lam) > 0 else "stable"
                fwd = np.real(lam) > 0
                for sgn in (1.0, -1.0):
                    seed = (x0 + sgn * tols.delta_sep * v[0],
                            y0 + sgn * tols.delta_sep * v[1])
                    pts = _trace_branch(Z, seed, sad.kind, fwd, horizon,
                                        window, tols)
                    branches.append(SeparatrixBranch(
                        idx, stab, f"{sad.kind}{idx}:{stab}:{sgn:+.0f}", pts))
        else:  # FZ saddle: branches along D in both time directions
            x0 = sad.point[0]
            fz = _fz_rhs(Z)
            for sgn in (1.0, -1.0):
                for direction, stab in ((1.0, "unstable"), (-1.0, "stable")):
                    xs = _trace_d_branch(Z, x0 + sgn * tols.delta_sep,
                                         direction, horizon, window, tols)
                    pts = np.column_stack([xs, np.zeros_like(xs)])
                    branches.append(SeparatrixBranch(
                        idx, stab, f"FZ{idx}:{stab}:{sgn:+.0f}", pts))

    n = len(branches)
    dmat = np.full((n, n), np.inf)
    flagged = []
    r_excl = 5e-2
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = branches[i], branches[j]
            pi, pj = bi.points, bj.points
            if bi.saddle_index == bj.saddle_index:
                c = np.asarray(saddles[bi.saddle_index].point)
                pi = pi[np.linalg.norm(pi - c, axis=1) > r_excl]
                pj = pj[np.linalg.norm(pj - c, axis=1) > r_excl]
            if len(pi) == 0 or len(pj) == 0:
                continue
            d = _min_dist(pi, pj)
            dmat[i, j] = dmat[j, i] = d
            if d < tols.connect and {bi.stability, bj.stability} == \
                    {"stable", "unstable"}:
                flagged.append((i, j))
    return ConnectionReport(branches, dmat, flagged)


def _trace_branch(Z, seed, kind, forward, horizon, window, tols) -> np.ndarray:
    fld = Z.X if kind == "X" else Z.Y
    if not forward:
        fld = PolyVectorField(fld.P.scale(-1.0), fld.Q.scale(-1.0), fld.m)
    ddir = -1 if kind == "X" else 1
    if (kind == "X" and seed[1] <= 0) or (kind == "Y" and seed[1] >= 0):
        return np.asarray([seed])
    tr = integrate_smooth(fld, seed, horizon, window, ddir, tols=tols)
    return tr.states[:, :2]


def _trace_d_branch(Z, x0, direction, horizon, window, tols) -> np.ndarray:
    fz = _fz_rhs(Z)

    def rhs(t, s):
        return [direction * fz(s[0])]

    def ev_lo(t, s):
        return s[0] - window[0]

    def ev_hi(t, s):
        return s[0] - window[1]

    q1 = Z.X.Q
    q2 = Z.Y.Q

    def ev_q1(t, s):
        return q1(s[0], 0.0)

    def ev_q2(t, s):
        return q2(s[0], 0.0)

    events = [ev_lo, ev_hi, ev_q1, ev_q2]
    for e in events:
        e.terminal = True
    sol = solve_ivp(rhs, (0.0, horizon), [x0], rtol=1e-10, atol=1e-12,
                    events=events)
    return sol.y[0]


def _min_dist(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.spatial import cKDTree

    tree = cKDTree(b)
    d, _ = tree.query(a, k=1)
    return float(np.min(d))
