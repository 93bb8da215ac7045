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

from unittest import mock

import numpy as np

from khessian_lab import error
from khessian_lab.harness import expression
from khessian_lab.solver import domain
from khessian_lab.solver import field
from khessian_lab.verifier import liouville
from khessian_lab.tests.unit import base

QUADRATIC = expression.parse_expression('(x1^2+x2^2)/2 - t')
QUARTIC = expression.parse_expression('(x1^4+x2^4)/12 + (x1^2+x2^2)/2 - t')


def scaled_field(R, u=QUADRATIC, radius=2.0, t_start=-1.25):
    grid = domain.build_grid(
        domain.Cylinder(2, R * radius, R ** 2 * t_start), 0.125 * R,
        0.0625 * R ** 2)
    return field.SolutionField.from_function(grid, u)


def base_field(u=QUADRATIC, radius=4.0, t_start=-0.5):
    grid = domain.build_grid(domain.Cylinder(2, radius, t_start), 0.25,
                             0.0625)
    return field.SolutionField.from_function(grid, u)


class RescalingStepTestCase(base.TestCase):

    def test_exact_quadratic(self):
        report = liouville.rescaling_step(scaled_field(2), 2, 0.5, 0.5, 0.5,
                                          1.0, 1.0, coarse_ratio=1)
        self.assertTrue(report.valid)
        self.assertEqual('', report.reason)
        for name, passed in report.checks.items():
            self.assertTrue(passed, name)
        self.assertLessEqual(report.semi_d2u, 1e-10)
        self.assertLessEqual(report.semi_d2v, 1e-10)
        self.assertGreater(report.t_floor, -1.0)
        self.assertFalse(report.omega_truncated)
        inner, outer = report.omega_radii
        self.assertLessEqual(inner, outer)

    def test_scaling_identity(self):
        report = liouville.rescaling_step(scaled_field(2, QUARTIC), 2, 0.5,
                                          0.5, 1.0, 1.0, 1.0, coarse_ratio=1)
        self.assertGreater(report.semi_d2v, 0.0)
        self.assertAlmostEqual(report.semi_d2u, 2 ** -0.5 * report.semi_d2v,
                               places=11)
        self.assertTrue(report.checks['scaling_d2u'])
        self.assertTrue(report.checks['scaling_ut'])

    def test_scaling_identity_strided(self):
        report = liouville.rescaling_step(base_field(QUARTIC), 4, 0.5, 0.5,
                                          1.0, 1.0, 1.0, coarse_ratio=2)
        self.assertEqual(2, report.stride)
        self.assertGreater(report.semi_d2v, 0.0)
        self.assertAlmostEqual(report.semi_d2u, 0.5 * report.semi_d2v,
                               places=11)
        self.assertTrue(report.checks['scaling_d2u'])

    def test_q_outside_sublevel(self):
        report = liouville.rescaling_step(scaled_field(2), 2, 0.5, 0.05, 0.05,
                                          1.0, 1.0, coarse_ratio=1)
        self.assertFalse(report.valid)
        self.assertIn('O_{-1/3}', report.reason)

    def test_truncated_omega(self):
        report = liouville.rescaling_step(scaled_field(2, radius=1.0), 2,
                                          0.5, 0.5, 0.5, 1.0, 1.0,
                                          coarse_ratio=1)
        self.assertTrue(report.omega_truncated)
        self.assertTrue(report.valid)
        for name, passed in report.checks.items():
            self.assertTrue(passed, name)

    def test_box_too_small(self):
        self.assertRaisesRegex(error.BoxTooSmallError, 'Window Q',
                               liouville.rescaling_step,
                               scaled_field(2, radius=0.375), 2, 0.5, 0.5,
                               0.5, 1.0, 1.0, coarse_ratio=1)

    def test_window_before_first_level(self):
        self.assertRaises(error.BoxTooSmallError, liouville.rescaling_step,
                          scaled_field(2), 2, 0.5, 0.5, 0.5, 0.01, 0.01,
                          coarse_ratio=1)


class WindowTestCase(base.TestCase):

    def test_window_mask(self):
        grid = base_field().grid
        mask = liouville.window_mask(grid, 1.0, -0.25)
        self.assertEqual((grid.levels,) + grid.shape, mask.shape)
        self.assertFalse(np.any(mask[:grid.levels - 4]))
        # |x| < 1 at h = 0.25 holds 45 nodes
        self.assertEqual(45, int(np.sum(mask[-1])))

    def test_unsolved_node(self):
        u = base_field()
        u.values[-1][u.grid.origin_index] = np.nan
        self.assertRaises(error.BoxTooSmallError, liouville.require_window,
                          u, 1.0, -0.25, 'Q')
        liouville.require_window(base_field(), 1.0, -0.25, 'Q')


class DecayExperimentTestCase(base.TestCase):

    def test_trend(self):
        self.assertTrue(liouville.decay_trend([1.0, 1.04, 0.5]))
        self.assertFalse(liouville.decay_trend([1.0, 1.2]))
        self.assertTrue(liouville.decay_trend([0.0, 0.0]))

    def test_exact_solution_sweep(self):
        logger = mock.Mock()
        reports, summary = liouville.liouville_decay_experiment(
            base_field(), [2, 4], 0.5, 0.5, 0.5, 1.0, 1.0, logger=logger)
        self.assertEqual([2, 4], [report.R for report in reports])
        self.assertEqual([1, 2], [report.stride for report in reports])
        self.assertTrue(summary['valid'])
        self.assertTrue(summary['trend'])
        self.assertTrue(summary['checks'])
        self.assertEqual([], summary['reasons'])
        self.assertEqual([2, 4], summary['omega_truncated'])
        for R, semi in summary['semi_decay']:
            self.assertLessEqual(semi, 1e-10, R)
        self.assertEqual(2, logger.info.call_count)
        self.assertEqual(2, logger.warning.call_count)
        self.assertEqual(2, len(reports[0].as_dict()['omega_radii']))

    def test_explicit_strides(self):
        reports, _ = liouville.liouville_decay_experiment(
            base_field(), [2, 4], 0.5, 0.5, 0.5, 1.0, 1.0,
            strides={2: 2, 4: 2})
        self.assertEqual([2, 2], [report.stride for report in reports])

    def test_unaligned_radii(self):
        self.assertRaises(error.AlignmentError,
                          liouville.liouville_decay_experiment,
                          base_field(), [2, 3], 0.5, 0.5, 0.5, 1.0, 1.0)

    def test_invalid_sweep(self):
        _, summary = liouville.liouville_decay_experiment(
            base_field(), [2], 0.5, 0.05, 0.05, 1.0, 1.0)
        self.assertFalse(summary['valid'])
        self.assertEqual(1, len(summary['reasons']))


class FormCheckTestCase(base.TestCase):

    def test_quadratic(self):
        found = liouville.liouville_form_check(scaled_field(1))
        self.assertTrue(found['passed'])
        self.assertAlmostEqual(1.0, found['m'], places=10)

    def test_quartic(self):
        found = liouville.liouville_form_check(scaled_field(1, QUARTIC))
        self.assertFalse(found['passed'])
        self.assertGreater(found['hessian_spread'], 0.1)
