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

import dataclasses
import typing

import numpy as np

from khessian_lab.calculus import sigma
from khessian_lab import error
from khessian_lab.harness import expression

MANUFACTURED_SAMPLES = 256


@dataclasses.dataclass(frozen=True)
class ProblemSpec:
    """Dirichlet problem for -u_t S_k(D2u) = psi(x, t, u).

    `psi` is an expression in ``x<i>``, ``t`` and ``z`` (the unknown), `g`
    an expression in ``x<i>`` and ``t`` supplying data on the parabolic
    boundary. `exact` is set for manufactured problems.
    """

    k: int
    psi: expression.Expression
    g: expression.Expression
    m1_floor: float
    label: str = 'problem'
    exact: typing.Optional[expression.Expression] = None

    def __post_init__(self):
        if self.k < 1:
            raise error.DomainError('k must be positive, got %s' % self.k)
        if not self.m1_floor > 0:
            raise error.DomainError('m1_floor must be positive, got %s'
                                    % self.m1_floor)

    @property
    def psi_z(self):
        return self.psi.derivative('z')

    def check_dimension(self, n):
        if not 1 <= self.k <= n:
            raise error.DomainError('k=%(k)s outside 1..%(n)s'
                                    % {'k': self.k, 'n': n})

    def psi_at(self, coords, t, z):
        return expression.evaluate_on(self.psi, coords, t, z)

    def psi_z_at(self, coords, t, z):
        return expression.evaluate_on(self.psi_z, coords, t, z)

    def g_at(self, coords, t):
        return expression.evaluate_on(self.g, coords, t)


def sample_points(rng, domain, count):
    """Uniform points of `domain` as ``(coords, times)``."""
    coords = []
    times = []
    while len(coords) < count:
        x = rng.uniform(-domain.extent, domain.extent,
                        size=(count, domain.n))
        t = rng.uniform(domain.t_start, 0.0, size=count)
        keep = domain.contains(x, t)
        coords.extend(x[keep])
        times.extend(t[keep])
    return np.array(coords[:count]), np.array(times[:count])


def hessian_expressions(u, n):
    names = ['x%d' % (i + 1) for i in range(n)]
    first = [u.derivative(name) for name in names]
    return [[first[i].derivative(names[j]) for j in range(n)]
            for i in range(n)]


def manufactured_problem(u_exact, domain, k, m1_floor=None, rng=None,
                         samples=MANUFACTURED_SAMPLES, label='manufactured'):
    """Problem whose exact solution is `u_exact`.

    psi := -u_t S_k(D2u) is built by differentiating the expression tree.
    The sampled points must show u k-convex and strictly decreasing in t.

    :param m1_floor: monotonicity floor; by default the smallest sampled
        -u_t
    :raises: `error.InputError` naming the first violating point
    """
    n = domain.n
    if not 1 <= k <= n:
        raise error.DomainError('k=%(k)s outside 1..%(n)s' % {'k': k,
                                                              'n': n})
    ut = u_exact.derivative('t')
    psi = expression.mul(expression.neg(ut),
                         expression.hessian_sigma(u_exact, n, k))

    rng = rng if rng is not None else np.random.default_rng(0)
    coords, times = sample_points(rng, domain, samples)
    env = expression.environment(coords, times)
    decay = -np.broadcast_to(np.asarray(ut.evaluate(env), dtype=float),
                             times.shape)
    hess = np.empty((samples, n, n))
    for i, row in enumerate(hessian_expressions(u_exact, n)):
        for j, entry in enumerate(row):
            hess[:, i, j] = np.broadcast_to(
                np.asarray(entry.evaluate(env), dtype=float), times.shape)

    for p in range(samples):
        point = {'x': coords[p].tolist(), 't': float(times[p])}
        if not sigma.in_closure_gamma_k(np.linalg.eigvalsh(hess[p]), k):
            raise error.InputError(
                'u is not %(k)s-convex at %(point)s' % {'k': k,
                                                       'point': point})
        if decay[p] <= 0:
            raise error.InputError(
                'u is not decreasing in t at %s' % point)

    if m1_floor is None:
        m1_floor = float(np.min(decay))
    return ProblemSpec(k=k, psi=psi, g=u_exact, m1_floor=m1_floor,
                       label=label, exact=u_exact)
