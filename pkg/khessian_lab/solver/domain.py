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

"""Space-time domains and their node discretization."""

import abc
import itertools
import math

import numpy as np

from khessian_lab import error

EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2

# interior node rules
FULL_STENCIL = 'stencil'
INSIDE_NODES = 'inside'

_ALIGN_TOL = 1e-9


class SpaceTimeDomain(metaclass=abc.ABCMeta):
    """Base class for bounded domains in R^n x (-inf, 0]"""

    def __init__(self, n):
        if n not in (2, 3):
            raise error.DomainError('Dimension must be 2 or 3, got %s' % n)
        self.n = n

    @property
    @abc.abstractmethod
    def t_start(self):
        """Earliest time of the domain."""

    @property
    @abc.abstractmethod
    def extent(self):
        """Spatial half width of a box containing every slice."""

    @abc.abstractmethod
    def contains(self, coords, t):
        """Mask of points ``coords`` (shape ``(..., n)``) inside D(t)."""


class Cylinder(SpaceTimeDomain):
    """B_radius x (t_start, 0]"""

    def __init__(self, n, radius, t_start):
        super().__init__(n)
        if radius <= 0 or t_start >= 0:
            raise error.DomainError(
                'Cylinder needs radius > 0 and t_start < 0, got %s, %s'
                % (radius, t_start))
        self.radius = float(radius)
        self._t_start = float(t_start)

    @property
    def t_start(self):
        return self._t_start

    @property
    def extent(self):
        return self.radius

    def contains(self, coords, t):
        return np.sum(np.asarray(coords) ** 2, axis=-1) < self.radius ** 2

    def __repr__(self):
        return 'Cylinder(n=%s, radius=%s, t_start=%s)' % (
            self.n, self.radius, self.t_start)


class Paraboloid(SpaceTimeDomain):
    """{(x, t): |x|^2 - r^2 < t <= 0}"""

    def __init__(self, n, radius):
        super().__init__(n)
        if radius <= 0:
            raise error.DomainError('Paraboloid needs r > 0, got %s'
                                    % radius)
        self.radius = float(radius)

    @property
    def t_start(self):
        return -self.radius ** 2

    @property
    def extent(self):
        return self.radius

    def contains(self, coords, t):
        return (np.sum(np.asarray(coords) ** 2, axis=-1)
                - self.radius ** 2 < t)

    def weight(self, coords, t):
        """rho = 1 - (|x|^2 - t) / r^2, zero on the lateral boundary."""
        return 1.0 - (np.sum(np.asarray(coords) ** 2, axis=-1) - t) / (
            self.radius ** 2)

    def __repr__(self):
        return 'Paraboloid(n=%s, radius=%s)' % (self.n, self.radius)


def stencil_offsets(n):
    """All offsets in {-1, 0, 1}^n."""
    return list(itertools.product((-1, 0, 1), repeat=n))


def _shifted(mask, offset):
    """mask[i + offset] with out of box positions reading False."""
    out = np.zeros_like(mask)
    src = []
    dst = []
    for o, size in zip(offset, mask.shape):
        src.append(slice(max(o, 0), size + min(o, 0)))
        dst.append(slice(max(-o, 0), size + min(-o, 0)))
    out[tuple(dst)] = mask[tuple(src)]
    return out


def classify(inside, rule=FULL_STENCIL):
    """Per slice node classes from an inside mask.

    With `FULL_STENCIL` a node is interior when it and its whole 3^n
    stencil are inside. With `INSIDE_NODES` every inside node off the box
    edge is interior, and the exterior nodes next to the domain carry the
    data. Non-interior stencil neighbours of interior nodes are boundary
    nodes. The first slice carries initial data only. A node interior on
    one slice but not on the one below is a boundary node of the lower
    slice, so that every backward difference reads known data.

    :raises: `error.DomainError` for an unknown rule
    """
    if rule not in (FULL_STENCIL, INSIDE_NODES):
        raise error.DomainError('Unknown interior rule %r' % (rule,))
    inside = np.asarray(inside, dtype=bool)
    n = inside.ndim - 1
    levels = inside.shape[0]
    offsets = stencil_offsets(n)
    interior = np.zeros(inside.shape, dtype=bool)
    in_box = np.ones(inside.shape[1:], dtype=bool)
    for offset in offsets:
        in_box &= _shifted(np.ones_like(in_box), offset)
    for m in range(1, levels):
        if rule == INSIDE_NODES:
            interior[m] = inside[m] & in_box
            continue
        interior[m] = True
        for offset in offsets:
            interior[m] &= _shifted(inside[m], offset)
    masks = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    for m in range(levels):
        near = inside[m].copy() if m == 0 else np.zeros(inside.shape[1:],
                                                        dtype=bool)
        for offset in offsets:
            near |= _shifted(interior[m], offset)
        if m + 1 < levels:
            near |= interior[m + 1]
        masks[m][near] = BOUNDARY
        masks[m][interior[m]] = INTERIOR
    return masks


class Grid(object):
    """Node set of a space-time box with per slice node classes.

    Spatial nodes sit at ``axis[i] = i * h`` for ``|i| <= half``; time
    levels ascend to ``times[-1] == 0``.
    """

    def __init__(self, n, h, tau, half, times, inside, domain=None,
                 interior_rule=FULL_STENCIL):
        self.n = n
        self.h = float(h)
        self.tau = float(tau)
        self.half = int(half)
        self.axis = np.arange(-self.half, self.half + 1) * self.h
        self.times = np.asarray(times, dtype=float)
        self.inside = np.asarray(inside, dtype=bool)
        self.interior_rule = interior_rule
        self.masks = classify(self.inside, interior_rule)
        self.domain = domain

    @property
    def shape(self):
        return self.inside.shape[1:]

    @property
    def levels(self):
        return self.times.size

    @property
    def origin_index(self):
        return (self.half,) * self.n

    def coordinates(self):
        """Node coordinates, shape ``(*shape, n)``."""
        mesh = np.meshgrid(*([self.axis] * self.n), indexing='ij')
        return np.stack(mesh, axis=-1)

    def interior(self, level):
        return self.masks[level] == INTERIOR

    def boundary(self, level):
        return self.masks[level] == BOUNDARY

    def closure(self, level):
        return self.masks[level] != EXTERIOR

    def interior_count(self, level=None):
        if level is None:
            return int(np.sum(self.masks == INTERIOR))
        return int(np.sum(self.interior(level)))

    def __repr__(self):
        return ('Grid(n=%(n)s, h=%(h)s, tau=%(tau)s, shape=%(shape)s, '
                'levels=%(levels)s)' % {'n': self.n, 'h': self.h,
                                        'tau': self.tau, 'shape': self.shape,
                                        'levels': self.levels})


def _steps(span, step, what):
    count = span / step
    rounded = int(round(count))
    if rounded < 1 or abs(count - rounded) > _ALIGN_TOL * max(1, count):
        raise error.DomainError(
            '%(what)s span %(span)s is not a multiple of %(step)s'
            % {'what': what, 'span': span, 'step': step})
    return rounded


def build_grid(domain, h, tau, interior_rule=FULL_STENCIL):
    """Discretize `domain` with spacing `h` and time step `tau`.

    :param interior_rule: `FULL_STENCIL` or `INSIDE_NODES`, see `classify`

    :raises: `error.DomainError` for non-positive or non-aligned steps,
        `error.DegenerateGridError` if no node is interior
    """
    if h <= 0 or tau <= 0:
        raise error.DomainError('h and tau must be positive, got %s, %s'
                                % (h, tau))
    levels = _steps(-domain.t_start, tau, 'Time') + 1
    times = domain.t_start + np.arange(levels) * tau
    times[-1] = 0.0
    half = int(math.ceil(domain.extent / h - _ALIGN_TOL)) + 1
    axis = np.arange(-half, half + 1) * h
    mesh = np.stack(np.meshgrid(*([axis] * domain.n), indexing='ij'),
                    axis=-1)
    inside = np.stack([domain.contains(mesh, t) for t in times])
    grid = Grid(domain.n, h, tau, half, times, inside, domain=domain,
                interior_rule=interior_rule)
    if grid.interior_count() < 1:
        raise error.DegenerateGridError(
            'No interior nodes on %s with h=%s' % (domain, h))
    return grid
