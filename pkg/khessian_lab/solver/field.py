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

"""Grid functions and their finite difference derivatives.

Values are NaN on exterior nodes; any derivative whose stencil reads an
exterior node is NaN as well.
"""

import numpy as np

from khessian_lab.calculus import sigma
from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain


def shifted(values, offset, fill=np.nan):
    """values[i + offset] over the leading ``len(offset)`` axes."""
    out = np.full_like(values, fill, dtype=float)
    src = []
    dst = []
    for o, size in zip(offset, values.shape):
        src.append(slice(max(o, 0), size + min(o, 0)))
        dst.append(slice(max(-o, 0), size + min(-o, 0)))
    out[tuple(dst)] = values[tuple(src)]
    return out


def _unit(n, a, sign=1):
    offset = [0] * n
    offset[a] = sign
    return tuple(offset)


def _pair(n, a, sa, b, sb):
    offset = [0] * n
    offset[a] = sa
    offset[b] = sb
    return tuple(offset)


def hessian(values, h):
    """Discrete Hessian of one slice, shape ``(*shape, n, n)``.

    Pure second differences use 3 points, mixed ones the 4 diagonal
    neighbours.
    """
    n = values.ndim
    out = np.empty(values.shape + (n, n))
    for a in range(n):
        out[..., a, a] = (shifted(values, _unit(n, a, 1))
                          - 2 * values
                          + shifted(values, _unit(n, a, -1))) / h ** 2
        for b in range(a + 1, n):
            mixed = (shifted(values, _pair(n, a, 1, b, 1))
                     - shifted(values, _pair(n, a, 1, b, -1))
                     - shifted(values, _pair(n, a, -1, b, 1))
                     + shifted(values, _pair(n, a, -1, b, -1))) / (4 * h ** 2)
            out[..., a, b] = mixed
            out[..., b, a] = mixed
    return out


def gradient(values, h):
    """Centered first differences, shape ``(*shape, n)``."""
    n = values.ndim
    out = np.empty(values.shape + (n,))
    for a in range(n):
        out[..., a] = (shifted(values, _unit(n, a, 1))
                       - shifted(values, _unit(n, a, -1))) / (2 * h)
    return out


class SolutionField(object):
    """Node values ``u[level, i_1, ..., i_n]`` on a `domain.Grid`."""

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != grid.inside.shape:
            raise error.DomainError(
                'Field shape %s does not match grid %s'
                % (values.shape, grid.inside.shape))
        values[grid.masks == domain.EXTERIOR] = np.nan
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(coords, t)`` or an `expression.Expression`."""
        coords = grid.coordinates()
        slices = []
        for t in grid.times:
            if isinstance(func, expression.Expression):
                slices.append(expression.evaluate_on(func, coords, t))
            else:
                slices.append(np.broadcast_to(
                    np.asarray(func(coords, t), dtype=float),
                    grid.shape))
        return cls(grid, np.stack(slices))

    def level_of(self, t):
        matches = np.flatnonzero(np.isclose(self.grid.times, t,
                                            rtol=0, atol=1e-12))
        if not matches.size:
            raise error.DomainError('No time level at t=%s' % t)
        return int(matches[0])

    def du(self, level):
        return gradient(self.values[level], self.grid.h)

    def d2u(self, level):
        return hessian(self.values[level], self.grid.h)

    def ut(self, level):
        """Backward difference (u^m - u^(m-1)) / tau; NaN on level 0."""
        if level == 0:
            return np.full(self.grid.shape, np.nan)
        return (self.values[level] - self.values[level - 1]) / self.grid.tau

    def cone_margin(self, level, k):
        """min_{j<=k} S_j(D2u) per node, NaN where D2u is undefined."""
        d2u = self.d2u(level)
        valid = np.all(np.isfinite(d2u), axis=(-2, -1))
        safe = np.where(valid[..., None, None], d2u, 0.0)
        margin = np.min(np.stack([sigma.s_k(safe, j)
                                  for j in range(1, k + 1)]), axis=0)
        return np.where(valid, margin, np.nan)

    def sup_abs(self, mask=None):
        """sup |u| over closure nodes (or `mask`)."""
        if mask is None:
            mask = self.grid.masks != domain.EXTERIOR
        return float(np.nanmax(np.abs(self.values[mask]))) if np.any(
            mask) else 0.0

    def __repr__(self):
        return 'SolutionField(%r)' % self.grid
