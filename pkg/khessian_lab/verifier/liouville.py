#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""Decay of the Hessian Holder seminorm under parabolic blow-down.

For every R the rescaled field v must satisfy Q inside O_{-1/3}, where
Q = {|x| < 1/sqrt(8 A2), t > -1/(48 m2)}. The seminorm of D2v over
Q' = {|x| < 1/sqrt(10 A2), t > -1/(50 m2)} then controls the seminorm
of D2u over the pulled back set, which must decay as R grows.
"""

import dataclasses
import logging
import typing

import numpy as np

from khessian_lab import error
from khessian_lab.solver import domain
from khessian_lab.verifier import holder
from khessian_lab.verifier import rescaling

IDENTITY_TOLERANCE = 1e-12
TREND_SLACK = 0.05
FORM_TOLERANCE = 1e-10

LOG = logging.getLogger(__name__)


@dataclasses.dataclass
class RescalingReport:
    R: float
    omega_radii: typing.Tuple[float, float]
    t_floor: float
    stride: float = 1
    omega_truncated: bool = False
    semi_d2u: float = 0.0
    semi_d2v: float = 0.0
    semi_ut: float = 0.0
    semi_vt: float = 0.0
    checks: dict = dataclasses.field(default_factory=dict)
    valid: bool = True
    reason: str = ''

    def as_dict(self):
        return dataclasses.asdict(self)


def window_mask(grid, radius2, t_low):
    """Box nodes with |x|^2 < radius2 and t > t_low."""
    r2 = np.sum(grid.coordinates() ** 2, axis=-1)
    late = grid.times > t_low
    return (r2 < radius2)[None, ...] & late.reshape((-1,) + (1,) * grid.n)


def cylinder_mask(solution, radius2, t_low):
    """Closure nodes with |x|^2 < radius2 and t > t_low."""
    grid = solution.grid
    return window_mask(grid, radius2, t_low) & (grid.masks != domain.EXTERIOR)


def require_window(solution, radius2, t_low, name):
    """Every node of the window carries a solved value.

    :raises: `error.BoxTooSmallError` if the window leaves the box, starts
        before the first level or holds an unsolved node
    """
    grid = solution.grid
    window = window_mask(grid, radius2, t_low)
    solved = (grid.masks != domain.EXTERIOR) & np.isfinite(solution.values)
    if (grid.times[0] > t_low or grid.half * grid.h < np.sqrt(radius2)
            or np.any(window & ~solved)):
        raise error.BoxTooSmallError(
            'Window %(name)s = {|x|^2 < %(r2).6g, t > %(t).6g} leaves the '
            'solved part of %(grid)r' % {'name': name, 'r2': radius2,
                                        't': t_low, 'grid': grid})


def rescaling_step(u, R, alpha, A1, A2, m1, m2, coarse_ratio=None,
                   chunk=holder.HOLDER_CHUNK):
    """Geometry checks and seminorms for one R.

    Omega_R may be cut by the box; it is then measured over the nodes the
    box holds and flagged as truncated.

    :raises: `error.BoxTooSmallError` when Q or Q' leave the solved box
    """
    v = rescaling.rescale(u, R, coarse_ratio)
    stride = R if coarse_ratio is None else coarse_ratio
    pulled = rescaling.subsample(u, stride) if stride != 1 else u
    q_window = (1 / (8 * A2), -1 / (48 * m2))
    q_prime_window = (1 / (10 * A2), -1 / (50 * m2))
    require_window(v, *q_window, name='Q')
    require_window(v, *q_prime_window, name="Q'")

    omega = rescaling.level_domain(v, 0.0, check_box=False)
    report = RescalingReport(
        R=R, stride=stride, t_floor=omega.t_floor,
        omega_radii=(omega.inner_radius, omega.outer_radius),
        omega_truncated=rescaling.reaches_box(omega.mask, v.grid))
    grid = v.grid
    cell = grid.h
    last = grid.levels - 1
    radius = np.linalg.norm(grid.coordinates(), axis=-1)
    ball = (grid.closure(last) & np.isfinite(v.values[last])
            & (radius < 1 / np.sqrt(2 * A2) - cell))
    report.checks = {
        'quadratic_bracket': rescaling.quadratic_bracket(v, A1, A2),
        'omega_radii': bool(
            np.all(omega.mask[last][ball])
            and omega.outer_radius <= 1 / np.sqrt(A1) + cell),
        't_floor': bool(omega.t_floor >= -1 / m1 - grid.tau),
        'nesting': rescaling.nesting_holds(omega.mask, grid),
    }

    q = cylinder_mask(v, *q_window)
    third = rescaling.sublevel_mask(v, -1.0 / 3)
    if not np.any(q) or np.any(q & ~third):
        report.valid = False
        report.reason = 'Q is not contained in O_{-1/3} at R=%s' % R
        return report

    q_prime = cylinder_mask(v, *q_prime_window)
    semi_v = holder.holder_seminorm(v, alpha, q_prime, chunk=chunk)
    semi_u = holder.holder_seminorm(pulled, alpha, q_prime, chunk=chunk)
    report.semi_d2v = semi_v.semi_d2u
    report.semi_d2u = semi_u.semi_d2u
    report.semi_vt = semi_v.semi_ut
    report.semi_ut = semi_u.semi_ut
    scale = R ** -alpha
    report.checks['scaling_d2u'] = bool(
        abs(semi_u.semi_d2u - scale * semi_v.semi_d2u)
        <= IDENTITY_TOLERANCE * max(1.0, semi_u.semi_d2u))
    report.checks['scaling_ut'] = bool(
        abs(semi_u.semi_ut - scale * semi_v.semi_ut)
        <= IDENTITY_TOLERANCE * max(1.0, semi_u.semi_ut))
    return report


def decay_trend(values, slack=TREND_SLACK):
    """Each value at most (1 + slack) times its predecessor."""
    return all(later <= (1 + slack) * earlier + FORM_TOLERANCE
               for earlier, later in zip(values, values[1:]))


def liouville_decay_experiment(base, radii, alpha, A1, A2, m1, m2,
                               strides=None, logger=None,
                               chunk=holder.HOLDER_CHUNK):
    """Run `rescaling_step` on one solved base for every R in `radii`.

    :param base: solution on a box that holds the pulled back windows of
        the largest R
    :param strides: coarse ratio per R; ``R / min(radii)`` by default, so
        every v has the spacing ``h / min(radii)``
    :returns: ``(reports, summary)``; the summary is invalid if any step is
    """
    logger = logger or LOG
    smallest = min(radii)
    reports = []
    for R in radii:
        stride = strides[R] if strides else R / smallest
        report = rescaling_step(base, R, alpha, A1, A2, m1, m2, stride,
                                chunk=chunk)
        logger.info('R=%(R)s stride=%(stride)s [D2u]=%(semi)s '
                    'valid=%(valid)s truncated=%(cut)s',
                    {'R': R, 'stride': stride, 'semi': report.semi_d2u,
                     'valid': report.valid, 'cut': report.omega_truncated})
        if report.omega_truncated:
            logger.warning('Omega_R at R=%s is cut by the box and measured '
                           'over the solved nodes only', R)
        reports.append(report)

    valid = all(report.valid for report in reports)
    decay = [[report.R, report.semi_d2u] for report in reports]
    summary = {
        'valid': valid,
        'reasons': [report.reason for report in reports if not report.valid],
        'semi_decay': decay,
        'trend': decay_trend([semi for _, semi in decay]),
        'checks': all(all(report.checks.values()) for report in reports),
        'omega_truncated': [report.R for report in reports
                            if report.omega_truncated],
    }
    return reports, summary


def liouville_form_check(solution, tolerance=FORM_TOLERANCE):
    """Whether u = -m t + p(x) with p quadratic on the interior nodes.

    Both u_t and D2u must be constant up to `tolerance`.
    """
    grid = solution.grid
    uts = []
    hessians = []
    for level in range(1, grid.levels):
        nodes = grid.interior(level)
        if np.any(nodes):
            uts.append(solution.ut(level)[nodes])
            hessians.append(solution.d2u(level)[nodes])
    if not uts:
        return {'m': None, 'passed': False}
    ut = np.concatenate(uts)
    hess = np.concatenate(hessians)
    m = -float(np.mean(ut))
    ut_spread = float(np.ptp(ut))
    hess_spread = float(np.max(np.ptp(hess, axis=0)))
    return {'m': m, 'ut_spread': ut_spread, 'hessian_spread': hess_spread,
            'passed': bool(ut_spread <= tolerance * max(1.0, abs(m))
                           and hess_spread <= tolerance * max(
                               1.0, float(np.max(np.abs(hess)))))}
