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

import json
import os
import shutil
import tempfile
from unittest import mock

from oslotest import base

from khessian_lab import error
from khessian_lab.harness import main


def patch_resource(name):
    def decorator(func):
        return mock.patch.object(main.Laboratory, name,
                                 new_callable=mock.PropertyMock)(func)
    return decorator


def _write(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write(text)
    return path


class LaboratoryTestCase(base.BaseTestCase):

    def setUp(self):
        super().setUp()
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp)
        self.lab = main.Laboratory()

    def test_defaults(self):
        self.assertEqual(20240101, self.lab.config['KHESSIAN_SEED'])
        self.assertEqual(1e-12, self.lab.config['KHESSIAN_CONE_TOLERANCE'])
        self.assertEqual('khessian-out', self.lab.config['KHESSIAN_OUTPUT_DIR'])

    def test_configure(self):
        lab_config = _write(self.tmp, 'lab.conf',
                            'KHESSIAN_NEWTON_RTOL = 1e-8\n'
                            'KHESSIAN_SEED = 3\n')
        self.lab.configure(config_file=lab_config,
                           extra_config={'KHESSIAN_SEED': 4})
        self.assertEqual(1e-8, self.lab.config['KHESSIAN_NEWTON_RTOL'])
        self.assertEqual(4, self.lab.config['KHESSIAN_SEED'])

    def test_experiments_memoized(self):
        self.assertIs(self.lab.experiments, self.lab.experiments)

    def test_configure_rebuilds_components(self):
        runner = self.lab.experiments
        self.lab.configure(extra_config={'KHESSIAN_DIRECTION_COUNT': 4})
        self.assertIsNot(runner, self.lab.experiments)
        self.assertEqual(4, self.lab.experiments.option('DIRECTION_COUNT'))

    def test_load_selftest_without_file(self):
        self.lab.configure(extra_config={'KHESSIAN_SELFTEST_SAMPLES': 7})
        cfg = self.lab.load('selftest')
        self.assertEqual('selftest', cfg.kind)
        self.assertEqual(7, cfg.samples)

    def test_load_requires_file(self):
        exc = self.assertRaises(error.ConfigError, self.lab.load, 'solve')
        self.assertEqual(['--config is required for solve'], exc.messages)

    def test_load_unreadable(self):
        self.assertRaises(error.ConfigError, self.lab.load, 'solve',
                          os.path.join(self.tmp, 'missing.json'))

    def test_load_kind_mismatch(self):
        path = _write(self.tmp, 'cfg.json', '{"experiment": "selftest"}')
        exc = self.assertRaises(error.ConfigError, self.lab.load, 'solve',
                                path)
        self.assertEqual(
            ['$.experiment: config is for selftest, command is solve'],
            exc.messages)

    @patch_resource('experiments')
    def test_run_seed_from_config(self, experiments_mock):
        path = _write(self.tmp, 'cfg.json', json.dumps(
            {'experiment': 'selftest', 'seed': 9,
             'output': {'dir': 'somewhere'}}))
        experiments_mock.return_value.run.return_value = 0
        self.assertEqual(0, self.lab.run('selftest', path))
        cfg, out_dir, seed = experiments_mock.return_value.run.call_args[0]
        self.assertEqual(9, seed)
        self.assertEqual('somewhere', out_dir)

    @patch_resource('experiments')
    def test_run_defaults(self, experiments_mock):
        self.lab.run('selftest')
        cfg, out_dir, seed = experiments_mock.return_value.run.call_args[0]
        self.assertEqual(20240101, seed)
        self.assertEqual('khessian-out', out_dir)

    @patch_resource('experiments')
    def test_run_overrides(self, experiments_mock):
        path = _write(self.tmp, 'cfg.json', json.dumps(
            {'experiment': 'selftest', 'seed': 9,
             'output': {'dir': 'somewhere'}}))
        self.lab.configure(extra_config={
            'KHESSIAN_SEED_OVERRIDE': 1,
            'KHESSIAN_OUTPUT_DIR_OVERRIDE': 'elsewhere'})
        self.lab.run('selftest', path)
        cfg, out_dir, seed = experiments_mock.return_value.run.call_args[0]
        self.assertEqual(1, seed)
        self.assertEqual('elsewhere', out_dir)


class MainTestCase(base.BaseTestCase):

    def setUp(self):
        super().setUp()
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp)

    def test_parse_args(self):
        args = main.parse_args(['selftest'])
        self.assertEqual('selftest', args.command)
        self.assertIsNone(args.config)
        self.assertIsNone(args.seed)
        self.assertFalse(args.debug)

        args = main.parse_args(['solve', '--config', 'a.json', '--seed', '5',
                                '--out', 'out', '--debug'])
        self.assertEqual(('a.json', 5, 'out'),
                         (args.config, args.seed, args.out))
        self.assertTrue(args.debug)

    @mock.patch('sys.stderr', new_callable=mock.MagicMock)
    def test_parse_args_unknown_command(self, stderr_mock):
        self.assertRaises(SystemExit, main.parse_args, ['bake'])

    def test_selftest(self):
        lab_config = _write(self.tmp, 'lab.conf',
                            'KHESSIAN_SELFTEST_SAMPLES = 10\n')
        out_dir = os.path.join(self.tmp, 'out')
        code = main.main(['selftest', '--lab-config', lab_config,
                          '--out', out_dir, '--seed', '2'])
        self.assertEqual(0, code)
        with open(os.path.join(out_dir, 'report.json')) as f:
            report = json.load(f)
        self.assertEqual(2, report['seed'])
        self.assertEqual(10, report['parameters']['samples'])

    def test_missing_config(self):
        self.assertEqual(error.EXIT_ERROR, main.main(['solve']))

    def test_invalid_config(self):
        path = _write(self.tmp, 'cfg.json', '{"experiment": "solve", "n": 9}')
        with mock.patch.object(main.LOG, 'error', autospec=True) as log_mock:
            self.assertEqual(error.EXIT_ERROR,
                             main.main(['solve', '--config', path]))
        messages = [call[0][1] for call in log_mock.call_args_list]
        self.assertIn('$.n: must lie in 2..3, got 9', messages)

    @patch_resource('experiments')
    def test_experiment_invalid(self, experiments_mock):
        experiments_mock.return_value.run.side_effect = (
            error.BoxTooSmallError('Omega reaches the box'))
        self.assertEqual(error.EXIT_INVALID, main.main(['selftest']))

    @patch_resource('experiments')
    def test_unexpected_failure(self, experiments_mock):
        experiments_mock.return_value.run.side_effect = Exception(
            'Fish is dead')
        with mock.patch.object(main.LOG, 'exception',
                               autospec=True) as log_mock:
            self.assertEqual(error.EXIT_ERROR, main.main(['selftest']))
        log_mock.assert_called_once_with('Unexpected failure')

    @patch_resource('experiments')
    def test_exit_code_passthrough(self, experiments_mock):
        experiments_mock.return_value.run.return_value = 1
        self.assertEqual(1, main.main(['selftest']))

    @patch_resource('experiments')
    def test_lab_config_from_environment(self, experiments_mock):
        lab_config = _write(self.tmp, 'lab.conf', 'KHESSIAN_SEED = 77\n')
        experiments_mock.return_value.run.return_value = 0
        with mock.patch.dict(os.environ, {'KHESSIAN_LAB_CONFIG': lab_config}):
            self.assertEqual(0, main.main(['selftest']))
        cfg, out_dir, seed = experiments_mock.return_value.run.call_args[0]
        self.assertEqual(77, seed)
