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

"""Backward Euler time marching with a safeguarded Newton iteration.

Each time level solves::

    -((u^m - u^(m-1)) / tau) S_k(D2_h u^m) - psi(x, t_m, u^m) = 0

for the interior values of u^m, with g supplying every boundary node.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg
import tenacity

from khessian_lab import base
from khessian_lab.calculus import sigma
from khessian_lab import error
from khessian_lab.solver import domain
from khessian_lab.solver import field as fields


class StepRejected(Exception):
    """Trial Newton step failed the admissibility safeguard."""


class ParabolicSolver(base.ComponentBase):
    """Discrete Dirichlet solver for one `problem.ProblemSpec` on a grid."""

    def __init__(self, spec, grid, config=None, logger=None):
        super().__init__(config, logger)
        spec.check_dimension(grid.n)
        self.spec = spec
        self.grid = grid
        self.iterations = []
        self._coords = grid.coordinates()
        self._nodes = {}
        self._bubbles = {}
        self._tolerance = 0.0

    @property
    def cone_tolerance(self):
        return self.option('CONE_TOLERANCE', sigma.CONE_TOLERANCE)

    @property
    def max_iterations(self):
        return self.option('NEWTON_MAX_ITERATIONS', 50)

    @property
    def max_halvings(self):
        return self.option('NEWTON_MAX_HALVINGS', 40)

    @property
    def rtol(self):
        return self.option('NEWTON_RTOL', 1e-10)

    def interior_nodes(self, level):
        """Index arrays of the interior nodes, in C order."""
        if level not in self._nodes:
            self._nodes[level] = np.nonzero(self.grid.interior(level))
        return self._nodes[level]

    def boundary_values(self, level):
        """Slice holding g on every non exterior node, NaN elsewhere."""
        values = self.spec.g_at(self._coords, self.grid.times[level])
        values[self.grid.masks[level] == domain.EXTERIOR] = np.nan
        return values

    def _terms(self, u_slice, prev_slice, level):
        nodes = self.interior_nodes(level)
        d2u = fields.hessian(u_slice, self.grid.h)[nodes]
        ut = (u_slice[nodes] - prev_slice[nodes]) / self.grid.tau
        return nodes, d2u, ut

    def _psi(self, nodes, u_slice, level, derivative=False):
        evaluate = self.spec.psi_z_at if derivative else self.spec.psi_at
        return evaluate(self._coords[nodes], self.grid.times[level],
                        u_slice[nodes])

    def slice_residual(self, u_slice, prev_slice, level):
        """Residual vector over the interior nodes of `level`."""
        nodes, d2u, ut = self._terms(u_slice, prev_slice, level)
        return (-ut * np.asarray(sigma.s_k(d2u, self.spec.k))
                - self._psi(nodes, u_slice, level))

    def residual_field(self, solution, level):
        """Residual as a slice shaped array, NaN off the interior."""
        out = np.full(self.grid.shape, np.nan)
        if level < 1:
            return out
        out[self.interior_nodes(level)] = self.slice_residual(
            solution.values[level], solution.values[level - 1], level)
        return out

    def residual(self, solution, node, level):
        """Residual at one interior node.

        :raises: `error.DomainError` if `node` is not interior at `level`
        """
        node = tuple(node)
        if level < 1 or not self.grid.interior(level)[node]:
            raise error.DomainError('Node %(node)s is not interior at level '
                                    '%(level)s' % {'node': node,
                                                   'level': level})
        return float(self.residual_field(solution, level)[node])

    def cone_margin(self, d2u):
        return np.min(np.stack([np.asarray(sigma.s_k(d2u, j))
                                for j in range(1, self.spec.k + 1)]), axis=0)

    def linearize(self, u_slice, prev_slice, level, check_cone=True):
        """Jacobian of `slice_residual` w.r.t. the interior values.

        :returns: `scipy.sparse.csc_matrix` of shape ``(N, N)``
        :raises: `error.ConeError` if the iterate is outside the closed cone
        """
        nodes, d2u, ut = self._terms(u_slice, prev_slice, level)
        margin = self.cone_margin(d2u)
        if check_cone and np.any(margin < -self.cone_tolerance):
            raise error.ConeError(
                'Iterate left the closure of Gamma_%(k)s at level %(level)s '
                '(margin %(margin)s)' % {'k': self.spec.k, 'level': level,
                                         'margin': float(np.min(margin))})
        grad = np.asarray(sigma.s_k_grad(d2u, self.spec.k))
        value = np.asarray(sigma.s_k(d2u, self.spec.k))
        psi_z = self._psi(nodes, u_slice, level, derivative=True)
        h2 = self.grid.h ** 2

        count = ut.size
        index = np.full(self.grid.shape, -1)
        index[nodes] = np.arange(count)
        points = np.stack(nodes, axis=-1)

        rows, cols, vals = [], [], []
        for offset in domain.stencil_offsets(self.grid.n):
            axes = [a for a, o in enumerate(offset) if o]
            if not axes:
                weight = -2.0 * np.trace(grad, axis1=-2, axis2=-1) / h2
            elif len(axes) == 1:
                weight = grad[:, axes[0], axes[0]] / h2
            elif len(axes) == 2:
                a, b = axes
                weight = (2.0 * grad[:, a, b] * offset[a] * offset[b]
                          / (4.0 * h2))
            else:
                continue
            entry = -ut * weight
            if not axes:
                entry = entry - value / self.grid.tau - psi_z
            target = index[tuple((points + np.array(offset)).T)]
            known = target >= 0
            rows.append(np.arange(count)[known])
            cols.append(target[known])
            vals.append(entry[known])

        return sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows),
                                    np.concatenate(cols))),
            shape=(count, count)).tocsc()

    def admissible(self, candidate, prev_slice, level):
        _, d2u, ut = self._terms(candidate, prev_slice, level)
        return bool(np.all(self.cone_margin(d2u) >= -self.cone_tolerance)
                    and np.all(-ut >= self.spec.m1_floor / 2.0))

    def continuation(self, prev_slice, level):
        """``prev + g(t_m) - g(t_(m-1))``, the default starting iterate."""
        coords = self._coords
        return prev_slice + (
            self.spec.g_at(coords, self.grid.times[level])
            - self.spec.g_at(coords, self.grid.times[level - 1]))

    def lowering_profile(self, level):
        """Bubble b with trace(D2_h b) = 1 on the interior and b = 0 off it.

        b is negative on every interior node.
        """
        if level in self._bubbles:
            return self._bubbles[level]
        nodes = self.interior_nodes(level)
        count = nodes[0].size
        index = np.full(self.grid.shape, -1)
        index[nodes] = np.arange(count)
        points = np.stack(nodes, axis=-1)
        h2 = self.grid.h ** 2

        rows = [np.arange(count)]
        cols = [np.arange(count)]
        vals = [np.full(count, -2.0 * self.grid.n / h2)]
        for axis in range(self.grid.n):
            for step in (-1, 1):
                offset = np.zeros(self.grid.n, dtype=int)
                offset[axis] = step
                target = index[tuple((points + offset).T)]
                known = target >= 0
                rows.append(np.arange(count)[known])
                cols.append(target[known])
                vals.append(np.full(int(np.sum(known)), 1.0 / h2))
        laplacian = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows),
                                    np.concatenate(cols))),
            shape=(count, count)).tocsc()
        bubble = np.zeros(self.grid.shape)
        bubble[nodes] = np.atleast_1d(
            splinalg.spsolve(laplacian, np.ones(count)))
        self._bubbles[level] = bubble
        return bubble

    def lower(self, start, prev_slice, level):
        """Push `start` into the admissible set along the lowering profile.

        The first weight beta covers twice the trace deficit and the decay
        deficit; it doubles until the iterate is admissible.

        :raises: `StepRejected` when no weight within the halving budget
            works
        """
        nodes = self.interior_nodes(level)
        bubble = self.lowering_profile(level)[nodes]
        _, d2u, ut = self._terms(start, prev_slice, level)
        trace = np.trace(d2u, axis1=-2, axis2=-1)
        deficit = max(float(np.max(-trace)), float(np.max(
            (self.spec.m1_floor / 2.0 + ut) * self.grid.tau / -bubble)), 0.0)
        beta = (2.0 * deficit if deficit > 0
                else self.grid.tau / float(np.max(-bubble)))

        retryer = tenacity.Retrying(
            stop=tenacity.stop_after_attempt(self.max_halvings + 1),
            retry=tenacity.retry_if_exception_type(StepRejected),
            reraise=True)
        lowered = None
        for attempt in retryer:
            with attempt:
                weight = beta * 2.0 ** (attempt.retry_state.attempt_number - 1)
                candidate = start.copy()
                candidate[nodes] += weight * bubble
                if not self.admissible(candidate, prev_slice, level):
                    raise StepRejected()
                lowered = candidate
        self._logger.debug('Level %(level)s start lowered with beta '
                           '%(beta)s', {'level': level, 'beta': weight})
        return lowered

    def _damped_step(self, u_slice, prev_slice, level, delta, norm):
        nodes = self.interior_nodes(level)
        retryer = tenacity.Retrying(
            stop=tenacity.stop_after_attempt(self.max_halvings + 1),
            retry=tenacity.retry_if_exception_type(StepRejected),
            reraise=True)
        accepted = None
        for attempt in retryer:
            with attempt:
                scale = 0.5 ** (attempt.retry_state.attempt_number - 1)
                candidate = u_slice.copy()
                candidate[nodes] += scale * delta
                trial = np.max(np.abs(self.slice_residual(
                    candidate, prev_slice, level)))
                if not (trial < norm or trial <= self._tolerance):
                    raise StepRejected()
                if not self.admissible(candidate, prev_slice, level):
                    raise StepRejected()
                accepted = candidate
        return accepted

    def solve_slice(self, prev_slice, level, init_guess=None):
        """Advance one level.

        Every Newton iterate, the first included, stays admissible: a start
        outside the set is lowered before the iteration begins.

        :param prev_slice: values at ``level - 1``
        :param init_guess: interior start values; defaults to
            `continuation`
        :raises: `error.NonConvergenceError` after too many iterations,
            `error.ConeCollapseError` when no admissible start or step
            exists, or the limit is degenerate or on the wrong branch
        """
        u_slice = self.boundary_values(level)
        nodes = self.interior_nodes(level)
        if not nodes[0].size:
            self.iterations.append(0)
            return u_slice
        start = (self.continuation(prev_slice, level) if init_guess is None
                 else np.asarray(init_guess, dtype=float))
        u_slice[nodes] = start[nodes]
        if not self.admissible(u_slice, prev_slice, level):
            try:
                u_slice = self.lower(u_slice, prev_slice, level)
            except StepRejected:
                raise error.ConeCollapseError(
                    'No admissible starting iterate at level %s' % level)

        history = []
        for iteration in range(self.max_iterations + 1):
            residual = self.slice_residual(u_slice, prev_slice, level)
            norm = float(np.max(np.abs(residual)))
            psi = self._psi(nodes, u_slice, level)
            self._tolerance = self.rtol * (1.0 + float(np.max(np.abs(psi))))
            history.append(norm)
            self._logger.debug(
                'Level %(level)s iteration %(it)s residual %(res)s',
                {'level': level, 'it': iteration, 'res': norm})
            if norm <= self._tolerance:
                break
            if iteration == self.max_iterations:
                raise error.NonConvergenceError(
                    'Newton did not converge at level %(level)s after '
                    '%(it)s iterations (residual %(res)s)'
                    % {'level': level, 'it': iteration, 'res': norm},
                    history=history)
            jacobian = self.linearize(u_slice, prev_slice, level)
            delta = np.atleast_1d(splinalg.spsolve(jacobian, -residual))
            if not np.all(np.isfinite(delta)):
                raise error.NonConvergenceError(
                    'Singular Newton system at level %s' % level,
                    history=history)
            try:
                u_slice = self._damped_step(u_slice, prev_slice, level,
                                            delta, norm)
            except StepRejected:
                raise error.ConeCollapseError(
                    'No admissible step after %(n)s halvings at level '
                    '%(level)s' % {'n': self.max_halvings, 'level': level})

        _, d2u, _ = self._terms(u_slice, prev_slice, level)
        s_k = np.asarray(sigma.s_k(d2u, self.spec.k))
        if np.any(s_k < -self.cone_tolerance):
            raise error.ConeCollapseError(
                'Converged to the wrong branch at level %(level)s: '
                'S_%(k)s < 0' % {'level': level, 'k': self.spec.k})
        # S_k at the level of the solve tolerance means psi vanished
        floor = max(self.cone_tolerance, np.sqrt(self._tolerance))
        if np.any(s_k <= floor):
            raise error.ConeCollapseError(
                'Degenerate limit at level %(level)s: S_%(k)s vanishes'
                % {'level': level, 'k': self.spec.k})
        self.iterations.append(len(history) - 1)
        return u_slice

    def initial_slice(self):
        return self.boundary_values(0)

    def solve(self, initial_slice=None):
        """March every level from the first to t = 0.

        :returns: `field.SolutionField`
        """
        grid = self.grid
        values = np.full(grid.inside.shape, np.nan)
        values[0] = (self.initial_slice() if initial_slice is None
                     else initial_slice)
        self.iterations = []
        for level in range(1, grid.levels):
            values[level] = self.solve_slice(values[level - 1], level)
        self._logger.info(
            'Solved %(label)s on %(grid)r with %(total)s Newton iterations',
            {'label': self.spec.label, 'grid': grid,
             'total': sum(self.iterations)})
        return fields.SolutionField(grid, values)

    def check_solution(self, solution):
        """Worst residual, cone margin and -u_t over all interior nodes."""
        worst = 0.0
        converged = True
        margin = np.inf
        decay = np.inf
        for level in range(1, self.grid.levels):
            nodes = self.interior_nodes(level)
            if not nodes[0].size:
                continue
            level_worst = float(np.nanmax(np.abs(
                self.residual_field(solution, level))))
            psi = self._psi(nodes, solution.values[level], level)
            converged &= level_worst <= self.rtol * (
                1.0 + float(np.max(np.abs(psi))))
            worst = max(worst, level_worst)
            _, d2u, ut = self._terms(solution.values[level],
                                     solution.values[level - 1], level)
            margin = min(margin, float(np.min(self.cone_margin(d2u))))
            decay = min(decay, float(np.min(-ut)))
        return {'max_residual': worst, 'min_cone_margin': margin,
                'min_decay': decay, 'converged': bool(converged),
                'admissible': bool(margin >= -self.cone_tolerance
                                   and decay >= self.spec.m1_floor / 2.0)}
