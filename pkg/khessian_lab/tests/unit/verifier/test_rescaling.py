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

import math

import numpy as np

from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain
from khessian_lab.solver import field
from khessian_lab.solver import problem
from khessian_lab.solver import stepper
from khessian_lab.verifier import rescaling
from khessian_lab.tests.unit import base

QUADRATIC = '(x1^2+x2^2)/2 - t'


class RescaleTestCase(base.TestCase):

    def setUp(self):
        super().setUp()
        self.grid = domain.build_grid(domain.Cylinder(2, 3.0, -2.0), 0.25,
                                      0.125)
        self.u = field.SolutionField.from_function(
            self.grid, expression.parse_expression(QUADRATIC))

    def test_unit_radius(self):
        v = rescaling.rescale(self.u, 1)
        finite = np.isfinite(self.u.values)
        self.assertTrue(np.array_equal(finite, np.isfinite(v.values)))
        self.assertClose(self.u.values[finite] - 1.0, v.values[finite])
        self.assertEqual(self.grid.h, v.grid.h)

    def test_quadratic_is_self_similar(self):
        target = expression.parse_expression(QUADRATIC + ' - 1')
        for R in (2, 4):
            v = rescaling.rescale(self.u, R)
            self.assertEqual(self.grid.h, v.grid.h)
            self.assertEqual(self.grid.tau, v.grid.tau)
            self.assertEqual(0.0, v.grid.times[-1])
            coords = v.grid.coordinates()
            expected = np.stack([expression.evaluate_on(target, coords, t)
                                 for t in v.grid.times])
            finite = np.isfinite(v.values)
            self.assertGreater(int(np.sum(finite)), 0)
            self.assertClose(expected[finite], v.values[finite])

    def test_coarse_ratio_one(self):
        v = rescaling.rescale(self.u, 2, coarse_ratio=1)
        self.assertEqual(self.grid.h / 2, v.grid.h)
        self.assertEqual(self.grid.tau / 4, v.grid.tau)
        self.assertEqual(self.grid.inside.shape, v.values.shape)

    def test_invalid_radius(self):
        self.assertRaises(error.DomainError, rescaling.rescale, self.u, 0)
        self.assertRaises(error.AlignmentError, rescaling.rescale, self.u,
                          2, coarse_ratio=1.5)

    def test_stride_too_large(self):
        self.assertRaises(error.AlignmentError, rescaling.subsample, self.u,
                          64)

    def test_subsample_keeps_nodes(self):
        coarse = rescaling.subsample(self.u, 2)
        self.assertEqual(0.5, coarse.grid.h)
        self.assertEqual(0.5, coarse.grid.tau)
        self.assertEqual(self.grid.half // 2, coarse.grid.half)
        source = self.u.values[-1][self.grid.origin_index]
        self.assertEqual(source, coarse.values[-1][coarse.grid.origin_index])

    def test_residual_invariance(self):
        quartic = expression.parse_expression(
            '(x1^4+x2^4)/12 + (x1^2+x2^2)/2 - t')
        u = field.SolutionField.from_function(self.grid, quartic)
        spec = problem.ProblemSpec(k=2, psi=expression.constant(1.0),
                                   g=quartic, m1_floor=1.0)
        v = rescaling.rescale(u, 2, coarse_ratio=1)
        for level in (1, self.grid.levels - 1):
            res_u = stepper.ParabolicSolver(spec, u.grid).residual_field(
                u, level)
            res_v = stepper.ParabolicSolver(spec, v.grid).residual_field(
                v, level)
            interior = self.grid.interior(level)
            self.assertTrue(np.all(
                np.abs(res_v[interior])
                <= (1 + 1e-8) * np.abs(res_u[interior]) + 1e-9))


class LevelDomainTestCase(base.TestCase):

    def setUp(self):
        super().setUp()
        self.grid = domain.build_grid(domain.Cylinder(2, 3.0, -2.0), 0.25,
                                      0.25)
        self.u = field.SolutionField.from_function(
            self.grid, expression.parse_expression(QUADRATIC))

    def test_omega_geometry(self):
        omega = rescaling.level_domain(self.u, R=1)
        self.assertAlmostEqual(math.sqrt(29) / 4, omega.inner_radius,
                               places=12)
        self.assertAlmostEqual(math.sqrt(29) / 4, omega.outer_radius,
                               places=12)
        self.assertEqual(-0.75, omega.t_floor)
        self.assertTrue(rescaling.nesting_holds(omega.mask, self.grid))
        self.assertFalse(rescaling.reaches_box(omega.mask, self.grid))
        self.assertEqual({'inner_radius', 'outer_radius', 't_floor'},
                         set(omega.as_dict()))

    def test_threshold(self):
        v = rescaling.rescale(self.u, 1)
        omega = rescaling.level_domain(v, threshold=-0.5)
        self.assertAlmostEqual(math.sqrt(13) / 4, omega.outer_radius,
                               places=12)
        self.assertAlmostEqual(math.sqrt(13) / 4, omega.inner_radius,
                               places=12)
        self.assertEqual(-0.25, omega.t_floor)

    def test_box_too_small(self):
        grid = domain.build_grid(domain.Cylinder(2, 1.0, -2.0), 0.25, 0.25)
        u = field.SolutionField.from_function(
            grid, expression.parse_expression(QUADRATIC))
        self.assertRaises(error.BoxTooSmallError, rescaling.level_domain, u,
                          R=1)
        omega = rescaling.level_domain(u, R=1, check_box=False)
        self.assertGreater(omega.outer_radius, 0.0)
        self.assertTrue(rescaling.reaches_box(omega.mask, grid))

    def test_nesting_violation(self):
        mask = np.zeros((2, 3, 3), dtype=bool)
        mask[0, 1, 1] = True
        self.assertFalse(rescaling.nesting_holds(mask))
        mask[1, 1, 1] = True
        self.assertTrue(rescaling.nesting_holds(mask))

    def test_quadratic_bracket(self):
        v = rescaling.rescale(self.u, 1)
        self.assertTrue(rescaling.quadratic_bracket(v, 0.5, 0.5))
        self.assertTrue(rescaling.quadratic_bracket(v, 0.25, 1.0))
        self.assertFalse(rescaling.quadratic_bracket(v, 0.6, 1.0))

    def test_quadratic_bracket_skips_unsolved(self):
        v = rescaling.rescale(self.u, 1)
        v.values[-1][v.grid.origin_index] = np.nan
        self.assertTrue(rescaling.quadratic_bracket(v, 0.5, 0.5))
