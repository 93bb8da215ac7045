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
from khessian_lab.verifier import directions
from khessian_lab.verifier import pogorelov
from khessian_lab.tests.unit import base


class WeightTestCase(base.TestCase):

    def test_single_point(self):
        self.assertEqual(2.0, pogorelov.pogorelov_weight(
            0.0, -1.0, [0.0, 0.0], 2.0, cap=0.0))
        self.assertEqual(2.0, pogorelov.pogorelov_weight(
            0.0, -1.0, [0.0, 0.0], 2.0, cap=1.0))

    def test_energy_factor(self):
        value = pogorelov.pogorelov_weight(1.0, 0.0, [1.0, 0.0], 1.0,
                                           cap=2.0)
        self.assertAlmostEqual(0.75 ** -0.125, value, places=12)

    def test_spectral_norm(self):
        self.assertClose([3.0], pogorelov.spectral_norm(
            np.array([[[1.0, 0.0], [0.0, -3.0]]])))


class AuxiliaryPhiTestCase(base.TestCase):

    def setUp(self):
        super().setUp()
        self.grid = domain.build_grid(domain.Paraboloid(2, 1.0), 0.25,
                                      0.0625)
        self.dirs = directions.direction_set(2, self.rng, count=8)

    def _bowl(self):
        # negative inside, zero on boundary nodes
        solution = field.SolutionField.from_function(
            self.grid, expression.parse_expression('x1^2 + x2^2 - 1 - t'))
        solution.values[self.grid.masks == domain.BOUNDARY] = 0.0
        return solution

    def test_w_equals_u(self):
        solution = self._bowl()
        report = pogorelov.aux_Phi_and_pogorelov(solution, solution,
                                                 self.dirs)
        self.assertEqual(0.0, report.sup_phi)
        self.assertEqual(0.0, report.sup_pog)
        self.assertGreater(report.M_cap, 0.0)

    def test_constant_w(self):
        solution = self._bowl()
        report = pogorelov.aux_Phi_and_pogorelov(
            solution, expression.constant(0.0), self.dirs)
        self.assertGreater(report.sup_pog, 0.0)
        self.assertGreater(report.sup_phi, 0.0)
        self.assertEqual(0.25, report.as_dict()['h'])

    def test_w_below_u(self):
        solution = self._bowl()
        lowered = solution.values.copy()
        interior = self.grid.masks == domain.INTERIOR
        lowered[interior] -= 1.0
        self.assertRaises(error.InputError,
                          pogorelov.aux_Phi_and_pogorelov, solution,
                          lowered, self.dirs)

    def test_boundary_mismatch(self):
        solution = self._bowl()
        self.assertRaises(error.InputError,
                          pogorelov.aux_Phi_and_pogorelov, solution,
                          expression.constant(1.0), self.dirs)


class RefinementTestCase(base.TestCase):

    def test_psi_floor(self):
        spec = pogorelov.constant_boundary_problem(
            1, expression.constant(1e-4), 0.0, 0.25)
        grid = domain.build_grid(domain.Paraboloid(2, 1.0), 0.25, 0.0625)
        self.assertRaises(error.InputError, pogorelov.check_psi_floor,
                          spec, grid)

    def test_psi_floor_on_solution(self):
        # psi = 1 + z passes at z = g = 0 but not where u reaches -1
        spec = pogorelov.constant_boundary_problem(
            1, expression.parse_expression('1 + z'), 0.0, 0.25)
        grid = domain.build_grid(domain.Paraboloid(2, 1.0), 0.25, 0.0625)
        solution = field.SolutionField.from_function(
            grid, expression.parse_expression('x1^2 + x2^2 - 1 - t'))
        pogorelov.check_psi_floor(spec, grid)
        exc = self.assertRaises(error.InputError, pogorelov.check_psi_floor,
                                spec, grid, solution)
        self.assertIn('level %s' % (grid.levels - 1), str(exc))

    def test_constant_boundary_sweep(self):
        spec = pogorelov.constant_boundary_problem(
            1, expression.constant(1.0), 0.0, 0.25)
        dirs = directions.direction_set(2, self.rng, count=8)
        reports, summary = pogorelov.pogorelov_refinement(
            spec, 1.0, 0.25, 0.0625, 1, dirs, 0.0)
        self.assertEqual([0.25, 0.125], [report.h for report in reports])
        for report in reports:
            self.assertGreater(report.sup_pog, 0.0)
        self.assertEqual(2, len(summary['sup_pog_per_grid']))
        self.assertLessEqual(summary['refinement_change'],
                             pogorelov.REFINEMENT_STABILITY)
        self.assertTrue(summary['passed'])
