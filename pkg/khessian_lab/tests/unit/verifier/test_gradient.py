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

import numpy as np

from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain
from khessian_lab.solver import field
from khessian_lab.solver import stepper
from khessian_lab.verifier import directions
from khessian_lab.verifier import gradient
from khessian_lab.verifier import pogorelov
from khessian_lab.tests.unit import base


class DirectionsTestCase(base.TestCase):

    def test_direction_set(self):
        found = directions.direction_set(3, self.rng, count=10)
        self.assertEqual((13, 3), found.shape)
        self.assertClose(np.eye(3), found[:3])
        self.assertClose(1.0, np.linalg.norm(found, axis=1), atol=1e-14)

    def test_seeded(self):
        first = directions.direction_set(2, np.random.default_rng(1))
        second = directions.direction_set(2, np.random.default_rng(1))
        self.assertTrue(np.array_equal(first, second))

    def test_contractions(self):
        dirs = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]) / [
            [1.0], [1.0], [np.sqrt(2)]]
        grad = np.array([[3.0, 4.0]])
        self.assertClose([[3.0, 4.0, 7.0 / np.sqrt(2)]],
                         directions.directional(grad, dirs), atol=1e-14)
        hess = np.array([[[2.0, 1.0], [1.0, 4.0]]])
        self.assertClose([[2.0, 4.0, 4.0]],
                         directions.second_directional(hess, dirs),
                         atol=1e-14)


class AuxiliaryTestCase(base.TestCase):

    def setUp(self):
        super().setUp()
        self.grid = domain.build_grid(domain.Paraboloid(2, 1.0), 0.25,
                                      0.0625)
        self.dirs = directions.direction_set(2, self.rng, count=8)
        self.u = expression.parse_expression('(x1^2+x2^2)/2 - t + x1/2')

    def test_rho(self):
        self.assertEqual(1.0, gradient.rho(np.zeros(2), 0.0, 1.0))
        self.assertAlmostEqual(
            0.0, gradient.rho(np.array([0.6, 0.8]), 0.0, 1.0), places=12)
        self.assertEqual(0.0, gradient.rho(np.zeros(2), -1.0, 1.0))

    def test_value_at_vertex(self):
        solution = field.SolutionField.from_function(self.grid, self.u)
        aux = gradient.aux_G(solution, 1.0, self.dirs)
        last = self.grid.levels - 1
        expected = 0.5 / np.sqrt(aux.bound)
        self.assertClose(expected,
                         aux.values[(last,) + self.grid.origin_index + (0,)])
        self.assertEqual(4 * solution.sup_abs(), aux.bound)
        self.assertGreaterEqual(aux.maximum, expected)

    def test_zero_off_interior(self):
        solution = field.SolutionField.from_function(self.grid, self.u)
        aux = gradient.aux_G(solution, 1.0, self.dirs)
        off = self.grid.masks != domain.INTERIOR
        self.assertEqual(0.0, float(np.max(np.abs(aux.values[off]))))

    def test_zero_field(self):
        solution = field.SolutionField.from_function(
            self.grid, expression.constant(0))
        aux = gradient.aux_G(solution, 1.0, self.dirs)
        self.assertEqual(0.0, aux.maximum)
        self.assertIsNone(aux.argmax)

    def test_bound_exceeded(self):
        solution = field.SolutionField.from_function(self.grid, self.u)
        self.assertRaises(error.ConsistencyError, gradient.aux_G, solution,
                          1.0, self.dirs, sup_u=1e-3)

    def test_not_finite(self):
        solution = field.SolutionField.from_function(self.grid, self.u)
        solution.values[(-1,) + self.grid.origin_index] = np.nan
        self.assertRaises(error.ConsistencyError, gradient.aux_G, solution,
                          1.0, self.dirs)

    def test_report(self):
        solution = field.SolutionField.from_function(self.grid, self.u)
        report = gradient.gradient_report(solution, 1.0, self.dirs,
                                          label='tilt')
        self.assertClose(0.5, report.grad_at_origin)
        self.assertClose(0.5 / solution.sup_abs(), report.ratio)
        self.assertEqual('tilt', report.as_dict()['label'])


class GradientBoundTestCase(base.TestCase):

    def test_tilted_family(self):
        family = gradient.tilted_family(2, 2, [0.0, 1.0], [1.0, 2.0])
        self.assertEqual(4, len(family))
        self.assertEqual(['tilt=0.0,scale=1.0', 'tilt=1.0,scale=1.0',
                          'tilt=0.0,scale=2.0', 'tilt=1.0,scale=2.0'],
                         [spec.label for spec in family])
        coords = np.array([[0.3, -0.2]])
        self.assertClose([8.0], family[3].psi_at(coords, 0.0, 0.0))
        self.assertClose([0.3 + 2 * (0.13 / 2 + 0.5)],
                         family[3].g_at(coords, -0.5))

    def test_exact_family_is_reproduced(self):
        family = gradient.tilted_family(2, 1, [0.0, 1.0], [1.0])
        dirs = directions.direction_set(2, self.rng, count=4)
        reports, summary = gradient.gradient_bound_check(
            family, 1.0, 0.25, 0.0625, 1, dirs)
        self.assertEqual(4, len(reports))
        self.assertEqual([0.25, 0.25, 0.125, 0.125],
                         [report.h for report in reports])
        for report in reports:
            tilt = 1.0 if report.label.startswith('tilt=1.0') else 0.0
            self.assertClose(tilt, report.grad_at_origin, atol=1e-9)
        self.assertEqual(2, len(summary['max_ratio_per_grid']))
        self.assertGreater(summary['max_ratio'], 0.0)

    def test_maximum_of_aux_is_interior(self):
        spec = pogorelov.constant_boundary_problem(
            1, expression.constant(1.0), 0.0, 0.25)
        grid = domain.build_grid(domain.Paraboloid(2, 1.0), 0.25, 0.0625)
        dirs = directions.direction_set(2, self.rng, count=8)
        solution = stepper.ParabolicSolver(spec, grid).solve()
        aux = gradient.aux_G(solution, 1.0, dirs)
        self.assertGreater(aux.maximum, 0.0)

        level, node = aux.argmax[0], aux.argmax[1:-1]
        interior = bool(grid.interior(level)[node])
        self.assertTrue(interior)

        coords = grid.coordinates()
        scaled = 0.0
        for step in range(1, grid.levels):
            nodes = grid.interior(step)
            u_xi = directions.directional(solution.du(step)[nodes], dirs)
            weight = gradient.rho(coords[nodes], grid.times[step], 1.0)
            scaled = max(scaled, float(np.max(weight[:, None] * u_xi)))
        self.assertTrue(scaled <= 10.0 * aux.bound or interior)
