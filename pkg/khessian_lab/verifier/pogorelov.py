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

"""Pogorelov type second derivative estimate.

Phi = (w - u)^4 phi(|Du|^2 / 2) u_xixi with phi(s) = (1 - s / M)^(-1/8)
and M = 2 sup |Du|^2; the measured conclusion is sup (w - u)^4 |D2u|.
"""

import dataclasses

import numpy as np

from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain
from khessian_lab.solver import field as fields
from khessian_lab.solver import problem
from khessian_lab.solver import stepper
from khessian_lab.verifier import directions as dirs

PSI_FLOOR = 1e-3
REFINEMENT_STABILITY = 0.10
_CAP_SLACK = 1e-12


@dataclasses.dataclass
class PogorelovReport:
    h: float
    sup_phi: float
    sup_pog: float
    M_cap: float

    def as_dict(self):
        return dataclasses.asdict(self)


def pogorelov_weight(w, u, grad, u_xixi, cap):
    """Phi at one point from w, u, Du and u_xixi."""
    grad = np.asarray(grad, dtype=float)
    energy = np.sum(grad ** 2, axis=-1) / 2.0
    phi = 1.0 if cap == 0 else (1.0 - energy / cap) ** -0.125
    return (np.asarray(w) - u) ** 4 * phi * u_xixi


def spectral_norm(matrices):
    return np.max(np.abs(np.linalg.eigvalsh(matrices)), axis=-1)


def _as_values(w, grid):
    if isinstance(w, fields.SolutionField):
        return w.values
    if isinstance(w, expression.Expression):
        return fields.SolutionField.from_function(grid, w).values
    return np.broadcast_to(np.asarray(w, dtype=float), grid.inside.shape)


def aux_Phi_and_pogorelov(solution, w, directions):
    """Sup of Phi and of (w - u)^4 |D2u| over interior nodes.

    :param w: `SolutionField`, expression or array with ``w >= u`` inside
        and ``w == u`` on boundary nodes, both within h^2
    :raises: `error.InputError` when `w` violates either condition
    """
    grid = solution.grid
    w_values = _as_values(w, grid)
    slack = grid.h ** 2
    gap = w_values - solution.values

    boundary = grid.masks == domain.BOUNDARY
    if np.any(np.abs(gap[boundary]) > slack):
        raise error.InputError(
            'w differs from u on the parabolic boundary by %s'
            % float(np.max(np.abs(gap[boundary]))))
    interior = grid.masks == domain.INTERIOR
    if np.any(gap[interior] < -slack):
        where = np.argwhere(interior & (gap < -slack))[0]
        raise error.InputError('w < u at node %s' % where.tolist())

    grads = {}
    sup_grad2 = 0.0
    for level in range(grid.levels):
        nodes = grid.interior(level)
        if np.any(nodes):
            grads[level] = solution.du(level)[nodes]
            sup_grad2 = max(sup_grad2,
                            float(np.max(np.sum(grads[level] ** 2, axis=-1))))
    cap = 2.0 * sup_grad2

    sup_phi = 0.0
    sup_pog = 0.0
    for level, grad in grads.items():
        nodes = grid.interior(level)
        energy = np.sum(grad ** 2, axis=-1) / 2.0
        if cap > 0:
            phi = (1.0 - energy / cap) ** -0.125
            if np.any(phi < 1 - _CAP_SLACK) or np.any(
                    phi > 0.75 ** -0.125 * (1 + _CAP_SLACK)):
                raise error.ConsistencyError(
                    'phi left its caps at level %s' % level)
        hess = solution.d2u(level)[nodes]
        u_xixi = dirs.second_directional(hess, directions)
        weight = np.clip(gap[level][nodes], 0.0, None) ** 4
        values = pogorelov_weight(w_values[level][nodes][:, None],
                                  solution.values[level][nodes][:, None],
                                  grad[:, None, :], u_xixi, cap)
        sup_phi = max(sup_phi, float(np.max(values)))
        sup_pog = max(sup_pog, float(np.max(weight * spectral_norm(hess))))
    return PogorelovReport(h=grid.h, sup_phi=sup_phi, sup_pog=sup_pog,
                           M_cap=cap)


def constant_boundary_problem(k, psi, u0, m1_floor, label='pogorelov'):
    """Dirichlet problem with g == u0, the setting where w == u0."""
    return problem.ProblemSpec(k=k, psi=psi, g=expression.constant(u0),
                               m1_floor=m1_floor, label=label)


def check_psi_floor(spec, grid, solution=None):
    """:raises: `error.InputError` if psi dips below 1e-3 inside.

    Without `solution` z is bound to the data g, the only value known
    before the solve; with it z runs over the solved values.
    """
    coords = grid.coordinates()
    for level in range(1, grid.levels):
        nodes = grid.interior(level)
        if not np.any(nodes):
            continue
        if solution is None:
            z = spec.g_at(coords[nodes], grid.times[level])
        else:
            z = solution.values[level][nodes]
        value = spec.psi_at(coords[nodes], grid.times[level], z)
        if np.min(value) < PSI_FLOOR:
            raise error.InputError(
                'psi must be at least %(floor)s, got %(got)s at level '
                '%(level)s' % {'floor': PSI_FLOOR,
                               'got': float(np.min(value)),
                               'level': level})


def pogorelov_refinement(spec, r, h, tau, refinements, directions, u0,
                         config=None, logger=None):
    """Solve on Paraboloid(r) under refinement and compare sup_pog.

    Every inside node is an unknown and the exterior nodes next to the
    paraboloid carry u0.

    :returns: ``(reports, summary)``
    """
    n = directions.shape[1]
    paraboloid = domain.Paraboloid(n, r)
    reports = []
    for level in range(refinements + 1):
        grid = domain.build_grid(paraboloid, h / 2 ** level,
                                 tau / 4 ** level,
                                 interior_rule=domain.INSIDE_NODES)
        check_psi_floor(spec, grid)
        solver = stepper.ParabolicSolver(spec, grid, config=config,
                                         logger=logger)
        solution = solver.solve()
        check_psi_floor(spec, grid, solution)
        reports.append(aux_Phi_and_pogorelov(
            solution, expression.constant(u0), directions))

    change = 0.0
    if len(reports) > 1 and reports[-2].sup_pog > 0:
        change = (abs(reports[-1].sup_pog - reports[-2].sup_pog)
                  / reports[-2].sup_pog)
    summary = {'sup_pog_per_grid': [rep.sup_pog for rep in reports],
               'refinement_change': change,
               'passed': bool(change <= REFINEMENT_STABILITY)}
    return reports, summary
