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

"""Interior gradient estimate on paraboloid domains.

The auxiliary function is G = rho phi(u) u_xi with
rho = 1 - (|x|^2 - t) / r^2, phi(s) = (M - s)^(-1/2) and M = 4 sup |u|.
For constant psi the estimate reduces to |Du(0,0)| <= C sup |u| / r, so
the measured ratio |Du(0,0)| r / sup |u| must stay bounded.
"""

import dataclasses
import math
import typing

import numpy as np

from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain
from khessian_lab.solver import problem
from khessian_lab.solver import stepper
from khessian_lab.verifier import directions as dirs

REFINEMENT_STABILITY = 0.10
_CAP_SLACK = 1e-12


@dataclasses.dataclass
class AuxiliaryG:
    values: np.ndarray
    maximum: float
    argmax: typing.Optional[tuple]
    bound: float


@dataclasses.dataclass
class GradientReport:
    label: str
    h: float
    r: float
    grad_at_origin: float
    sup_u: float
    ratio: float
    aux_max: float
    aux_argmax: typing.Optional[tuple]

    def as_dict(self):
        return dataclasses.asdict(self)


def rho(coords, t, r):
    """Cut-off weight, 1 at the vertex and 0 on the lateral boundary."""
    return 1.0 - (np.sum(np.asarray(coords) ** 2, axis=-1) - t) / r ** 2


def aux_G(solution, r, directions, sup_u=None):
    """Evaluate G at every node and direction.

    Boundary and exterior nodes carry 0.

    :param sup_u: bound on |u| used for M; defaults to the field sup
    :raises: `error.ConsistencyError` if u is not finite on the closure,
        exceeds `sup_u` or phi leaves its caps
    """
    grid = solution.grid
    closure = grid.masks != domain.EXTERIOR
    if not np.all(np.isfinite(solution.values[closure])):
        raise error.ConsistencyError('Field is not finite on the closure')
    field_sup = solution.sup_abs()
    if sup_u is None:
        sup_u = field_sup
    elif field_sup > sup_u:
        raise error.ConsistencyError(
            'sup |u| = %(got)s exceeds the bound %(bound)s'
            % {'got': field_sup, 'bound': sup_u})
    bound = 4.0 * sup_u

    values = np.zeros(grid.inside.shape + (len(directions),))
    if bound == 0:
        return AuxiliaryG(values, 0.0, None, bound)

    coords = grid.coordinates()
    for level in range(grid.levels):
        interior = grid.interior(level)
        if not np.any(interior):
            continue
        u = solution.values[level][interior]
        phi = (bound - u) ** -0.5
        low, high = (1.25 * bound) ** -0.5, (0.75 * bound) ** -0.5
        if np.any(phi < low * (1 - _CAP_SLACK)) or np.any(
                phi > high * (1 + _CAP_SLACK)):
            raise error.ConsistencyError(
                'phi left [%(low)s, %(high)s] at level %(level)s'
                % {'low': low, 'high': high, 'level': level})
        weight = rho(coords[interior], grid.times[level], r)
        u_xi = dirs.directional(solution.du(level)[interior], directions)
        values[level][interior] = (weight * phi)[:, None] * u_xi

    flat = int(np.argmax(values))
    index = np.unravel_index(flat, values.shape)
    maximum = float(values[index])
    return AuxiliaryG(values, maximum, tuple(int(i) for i in index), bound)


def gradient_report(solution, r, directions, label='instance'):
    """|Du(0,0)| against sup |u| for a solution on Paraboloid(r)."""
    grid = solution.grid
    level = grid.levels - 1
    grad = float(np.linalg.norm(solution.du(level)[grid.origin_index]))
    sup_u = solution.sup_abs()
    aux = aux_G(solution, r, directions)
    return GradientReport(
        label=label, h=grid.h, r=r, grad_at_origin=grad, sup_u=sup_u,
        ratio=grad * r / sup_u if sup_u > 0 else 0.0,
        aux_max=aux.maximum, aux_argmax=aux.argmax)


def tilted_family(n, k, tilts, scales, psi=None):
    """Boundary data s (|x|^2/2 - t) + a x1 for every (a, s).

    Without `psi` each instance gets the constant C(n, k) s^(k+1) that
    makes its data an exact solution.
    """
    quadratic = expression.parse_expression(
        '(%s)/2 - t' % '+'.join('x%d^2' % (i + 1) for i in range(n)))
    family = []
    for scale in scales:
        for tilt in tilts:
            g = expression.add(
                expression.mul(expression.constant(scale), quadratic),
                expression.mul(expression.constant(tilt),
                               expression.Variable('x1')))
            rhs = psi if psi is not None else expression.constant(
                math.comb(n, k) * scale ** (k + 1))
            family.append(problem.ProblemSpec(
                k=k, psi=rhs, g=g, m1_floor=scale,
                label='tilt=%s,scale=%s' % (tilt, scale)))
    return family


def gradient_bound_check(family, r, h, tau, refinements, directions,
                         config=None, logger=None):
    """Solve every instance on Paraboloid(r) under refinement.

    Grid ``i`` uses ``h / 2^i`` and ``tau / 4^i``.

    :returns: ``(reports, summary)``; the summary holds the max ratio per
        grid and whether it moved by at most 10% between the last two
    """
    reports = []
    max_ratios = []
    n = directions.shape[1]
    paraboloid = domain.Paraboloid(n, r)
    for level in range(refinements + 1):
        grid = domain.build_grid(paraboloid, h / 2 ** level,
                                 tau / 4 ** level)
        worst = 0.0
        for spec in family:
            solver = stepper.ParabolicSolver(spec, grid, config=config,
                                             logger=logger)
            report = gradient_report(solver.solve(), r, directions,
                                     label=spec.label)
            reports.append(report)
            worst = max(worst, report.ratio)
        max_ratios.append(worst)

    change = 0.0
    if len(max_ratios) > 1 and max_ratios[-2] > 0:
        change = abs(max_ratios[-1] - max_ratios[-2]) / max_ratios[-2]
    summary = {'max_ratio': max(max_ratios), 'max_ratio_per_grid': max_ratios,
               'refinement_change': change,
               'passed': bool(change <= REFINEMENT_STABILITY)}
    return reports, summary
