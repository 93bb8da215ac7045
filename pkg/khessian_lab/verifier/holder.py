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

"""Parabolic Holder seminorms over node sets.

[f]_alpha = sup |f(x, t) - f(y, s)| / (|x - y|^2 + |t - s|)^(alpha / 2)
taken over every pair of distinct nodes.
"""

import dataclasses

import numpy as np

from khessian_lab import error
from khessian_lab.solver import domain

HOLDER_CHUNK = 512


@dataclasses.dataclass
class HolderSeminorms:
    alpha: float
    semi_u: float
    semi_d2u: float
    semi_ut: float
    full_norm: float

    def as_dict(self):
        return dataclasses.asdict(self)


def holder_quotient_sup(coords, times, values, alpha, chunk=HOLDER_CHUNK):
    """Exact sup of the parabolic difference quotient over all pairs.

    Rows are processed in blocks of `chunk` against every later node.
    """
    if not 0 < alpha < 1:
        raise error.DomainError('alpha must lie in (0, 1), got %s' % alpha)
    coords = np.asarray(coords, dtype=float)
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    count = values.size
    best = 0.0
    for start in range(0, count - 1, chunk):
        stop = min(start + chunk, count - 1)
        rows = np.arange(start, stop)
        dx = coords[rows, None, :] - coords[None, :, :]
        dist = np.sum(dx ** 2, axis=-1) + np.abs(
            times[rows, None] - times[None, :])
        later = np.arange(count)[None, :] > rows[:, None]
        usable = later & (dist > 0)
        if not np.any(usable):
            continue
        quotient = np.abs(values[rows, None] - values[None, :])[usable] / (
            dist[usable] ** (alpha / 2.0))
        best = max(best, float(np.max(quotient)))
    return best


def _gather(grid, mask, per_level):
    """Coordinates, times and values where `mask` holds and data is finite.

    :param per_level: callable returning a slice shaped array for a level
    """
    coords = grid.coordinates()
    xs, ts, vs = [], [], []
    for level in range(grid.levels):
        nodes = mask[level]
        if not np.any(nodes):
            continue
        values = per_level(level)[nodes]
        finite = np.isfinite(values)
        xs.append(coords[nodes][finite])
        ts.append(np.full(int(np.sum(finite)), grid.times[level]))
        vs.append(values[finite])
    if not vs:
        return np.zeros((0, grid.n)), np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ts), np.concatenate(vs)


def _sup_abs(values):
    return float(np.max(np.abs(values))) if values.size else 0.0


def holder_seminorm(solution, alpha, mask=None, chunk=HOLDER_CHUNK):
    """Seminorms of u, D2u (max over entries) and u_t over `mask`.

    :param mask: node mask of shape ``(levels, *shape)``; interior nodes
        by default
    :raises: `error.DomainError` for an empty mask or alpha outside (0, 1)
    """
    grid = solution.grid
    if not 0 < alpha < 1:
        raise error.DomainError('alpha must lie in (0, 1), got %s' % alpha)
    if mask is None:
        mask = grid.masks == domain.INTERIOR
    mask = np.asarray(mask, dtype=bool)
    if not np.any(mask):
        raise error.DomainError('Holder seminorm over an empty node set')

    d2u = [solution.d2u(level) for level in range(grid.levels)]
    du = [solution.du(level) for level in range(grid.levels)]

    semi_u = holder_quotient_sup(
        *_gather(grid, mask, lambda m: solution.values[m]), alpha, chunk)
    semi_ut = holder_quotient_sup(
        *_gather(grid, mask, solution.ut), alpha, chunk)
    semi_d2u = 0.0
    sup_d2u = 0.0
    for i in range(grid.n):
        for j in range(i, grid.n):
            data = _gather(grid, mask, lambda m: d2u[m][..., i, j])
            semi_d2u = max(semi_d2u,
                           holder_quotient_sup(*data, alpha, chunk))
            sup_d2u = max(sup_d2u, _sup_abs(data[2]))

    sup_du = 0.0
    for a in range(grid.n):
        sup_du = max(sup_du, _sup_abs(
            _gather(grid, mask, lambda m: du[m][..., a])[2]))
    sup_u = _sup_abs(_gather(grid, mask, lambda m: solution.values[m])[2])
    sup_ut = _sup_abs(_gather(grid, mask, solution.ut)[2])
    full = sup_u + sup_du + sup_d2u + sup_ut + semi_d2u + semi_ut
    return HolderSeminorms(alpha=alpha, semi_u=semi_u, semi_d2u=semi_d2u,
                           semi_ut=semi_ut, full_norm=full)
