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

"""Parabolic rescaling v(x, t) = (u(Rx, R^2 t) - R^2) / R^2.

Rescaled fields live on grids whose nodes are exactly source nodes, so no
interpolation ever happens. Sublevel sets of v are the sets Omega_R (v < 0)
and O_s (v < s).
"""

import dataclasses

import numpy as np

from khessian_lab import error
from khessian_lab.solver import domain
from khessian_lab.solver import field as fields

_ALIGN_TOL = 1e-9


def _integer_ratio(value, what):
    rounded = int(round(value))
    if rounded < 1 or abs(value - rounded) > _ALIGN_TOL * max(1.0, value):
        raise error.AlignmentError('%(what)s %(value)s is not a positive '
                                   'integer' % {'what': what,
                                                'value': value})
    return rounded


def subsample(solution, stride):
    """Every `stride`-th node in space and `stride`^2-th level in time.

    Levels are anchored at t = 0 and spatial nodes at the origin, so the
    result has spacing ``stride * h`` and step ``stride^2 * tau``.

    :raises: `error.AlignmentError` if fewer than two levels or no
        off-origin node survive
    """
    stride = _integer_ratio(stride, 'Stride')
    grid = solution.grid
    half = grid.half // stride
    levels = np.arange(grid.levels - 1, -1, -stride ** 2)[::-1]
    if half < 1 or levels.size < 2:
        raise error.AlignmentError(
            'Stride %(stride)s leaves no usable sublattice of %(grid)r'
            % {'stride': stride, 'grid': grid})
    axis = grid.half + stride * np.arange(-half, half + 1)
    coarse = domain.Grid(grid.n, stride * grid.h, stride ** 2 * grid.tau,
                         half, grid.times[levels],
                         _take(grid.inside, levels, axis),
                         interior_rule=grid.interior_rule)
    return fields.SolutionField(coarse,
                                _take(solution.values, levels, axis))


def _take(array, levels, axis):
    out = array[levels]
    for d in range(array.ndim - 1):
        out = np.take(out, axis, axis=d + 1)
    return out


def rescale(solution, R, coarse_ratio=None):
    """Rescaled field v on the grid with spacing c h / R and step
    c^2 tau / R^2, c being the coarse ratio (R by default).

    :raises: `error.DomainError` if R <= 0, `error.AlignmentError` if the
        coarse ratio is not a positive integer
    """
    if not R > 0:
        raise error.DomainError('R must be positive, got %s' % R)
    stride = R if coarse_ratio is None else coarse_ratio
    coarse = subsample(solution, stride) if stride != 1 else solution
    source = coarse.grid
    grid = domain.Grid(source.n, source.h / R, source.tau / R ** 2,
                       source.half, source.times / R ** 2, source.inside,
                       interior_rule=source.interior_rule)
    return fields.SolutionField(grid, (coarse.values - R ** 2) / R ** 2)


@dataclasses.dataclass
class LevelDomain:
    mask: np.ndarray
    inner_radius: float
    outer_radius: float
    t_floor: float

    def as_dict(self):
        return {'inner_radius': self.inner_radius,
                'outer_radius': self.outer_radius,
                't_floor': self.t_floor}


def sublevel_mask(solution, threshold):
    """Closure nodes with value below `threshold`."""
    grid = solution.grid
    values = np.where(grid.masks != domain.EXTERIOR, solution.values, np.nan)
    with np.errstate(invalid='ignore'):
        return np.nan_to_num(values, nan=np.inf) < threshold


def _radii(mask, grid, level):
    coords = grid.coordinates()
    closure = grid.closure(level)
    members = mask[level] & closure
    if not np.any(members):
        return 0.0, 0.0
    radius = np.linalg.norm(coords, axis=-1)
    outer = float(np.max(radius[members]))
    outside = closure & ~members
    if not np.any(outside):
        return outer, outer
    first_out = float(np.min(radius[outside]))
    inside = radius[members]
    inside = inside[inside < first_out]
    return (float(np.max(inside)) if inside.size else 0.0), outer


def reaches_box(mask, grid):
    """Whether a node set touches a boundary node or the first level."""
    return bool(np.any(mask & (grid.masks == domain.BOUNDARY))
                or np.any(mask[0]))


def level_domain(solution, threshold=0.0, R=None, check_box=True):
    """Sublevel set {v < threshold} with its t = 0 radii and lowest time.

    With `R` the field is rescaled first, so ``threshold=0`` yields
    Omega_R. The inner radius is the largest member radius below which
    every closure node belongs to the set. Without `check_box` a set cut
    by the box is measured over the nodes the box holds.

    :raises: `error.BoxTooSmallError` if the set reaches a boundary node
        or the first level
    """
    if R is not None:
        solution = rescale(solution, R)
    grid = solution.grid
    mask = sublevel_mask(solution, threshold)
    if check_box and reaches_box(mask, grid):
        raise error.BoxTooSmallError(
            'Sublevel set {v < %(s)s} reaches the computational box '
            'boundary of %(grid)r' % {'s': threshold, 'grid': grid})
    inner, outer = _radii(mask, grid, grid.levels - 1)
    levels = np.flatnonzero(np.any(mask.reshape(grid.levels, -1), axis=1))
    t_floor = float(grid.times[levels[0]]) if levels.size else 0.0
    return LevelDomain(mask=mask, inner_radius=inner, outer_radius=outer,
                       t_floor=t_floor)


def nesting_holds(mask, grid=None):
    """Sublevel slices grow with t on nodes in both closures."""
    mask = np.asarray(mask, dtype=bool)
    for level in range(mask.shape[0] - 1):
        lower = mask[level]
        if grid is not None:
            lower = lower & grid.closure(level + 1)
        if np.any(lower & ~mask[level + 1]):
            return False
    return True


def quadratic_bracket(solution, A1, A2):
    """A1 |x|^2 - 1 <= v(x, 0) <= A2 |x|^2 - 1/2 on closure nodes."""
    grid = solution.grid
    level = grid.levels - 1
    nodes = grid.closure(level) & np.isfinite(solution.values[level])
    r2 = np.sum(grid.coordinates() ** 2, axis=-1)[nodes]
    v = solution.values[level][nodes]
    return bool(np.all(A1 * r2 - 1 <= v + 1e-12)
                and np.all(v <= A2 * r2 - 0.5 + 1e-12))
