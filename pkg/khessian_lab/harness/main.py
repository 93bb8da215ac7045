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

import argparse
import logging
import os
import sys

import flask

from khessian_lab import error
from khessian_lab.harness import config as experiment_config
from khessian_lab.harness import experiments
from khessian_lab import memoize

LOG = logging.getLogger('khessian_lab')

COMMANDS = experiment_config.KINDS

DEFAULTS = {
    'KHESSIAN_SEED': 20240101,
    'KHESSIAN_CONE_TOLERANCE': 1e-12,
    'KHESSIAN_NEWTON_MAX_ITERATIONS': 50,
    'KHESSIAN_NEWTON_MAX_HALVINGS': 40,
    'KHESSIAN_NEWTON_RTOL': 1e-10,
    'KHESSIAN_DIRECTION_COUNT': 64,
    'KHESSIAN_SELFTEST_SAMPLES': 1000,
    'KHESSIAN_HOLDER_CHUNK': 512,
    'KHESSIAN_OUTPUT_DIR': 'khessian-out',
    'KHESSIAN_REPORT_TIMESTAMPS': False,
}


class Laboratory(object):
    """Laboratory settings plus the components built from them."""

    def __init__(self):
        self.config = flask.Config(os.getcwd(), DEFAULTS)
        self.logger = LOG

    def configure(self, config_file=None, extra_config=None):
        if config_file:
            self.config.from_pyfile(config_file)
        if extra_config:
            self.config.update(extra_config)
        memoize.forget(self)

    @property
    @memoize.memoize()
    def experiments(self):
        result = experiments.ExperimentRunner(self.config, self.logger)
        self.logger.debug('Initialized %s', result)
        return result

    def load(self, command, path=None):
        """Read and validate the experiment config for `command`.

        :raises: `error.ConfigError`
        """
        if path is None:
            if command != 'selftest':
                raise error.ConfigError('--config is required for %s'
                                        % command)
            text = '{"experiment": "selftest", "samples": %d}' % (
                self.config['KHESSIAN_SELFTEST_SAMPLES'])
        else:
            try:
                with open(path) as f:
                    text = f.read()
            except OSError as exc:
                raise error.ConfigError('Cannot read %s: %s' % (path, exc))
        cfg = experiment_config.parse_config(text)
        if cfg.kind != command:
            raise error.ConfigError(
                '$.experiment: config is for %s, command is %s'
                % (cfg.kind, command))
        return cfg

    def run(self, command, path=None):
        cfg = self.load(command, path)
        seed = cfg.seed
        if seed is None or 'KHESSIAN_SEED_OVERRIDE' in self.config:
            seed = self.config.get('KHESSIAN_SEED_OVERRIDE',
                                   self.config['KHESSIAN_SEED'])
        out_dir = self.config.get('KHESSIAN_OUTPUT_DIR_OVERRIDE',
                                  cfg.output_dir
                                  or self.config['KHESSIAN_OUTPUT_DIR'])
        return self.experiments.run(cfg, out_dir, seed)


def parse_args(argv=None):
    parser = argparse.ArgumentParser('khessian')
    parser.add_argument('command', choices=COMMANDS,
                        help='Experiment to run.')
    parser.add_argument('--config',
                        type=str,
                        help='Experiment config (JSON). Optional for '
                             'selftest.')
    parser.add_argument('--out',
                        type=str,
                        help='Output directory. Can also be set via config '
                             'variable KHESSIAN_OUTPUT_DIR. Default is '
                             'khessian-out.')
    parser.add_argument('--seed',
                        type=int,
                        help='Seed of the random generator, overriding the '
                             'experiment config and KHESSIAN_SEED.')
    parser.add_argument('--lab-config',
                        type=str,
                        help='Laboratory settings file. Can also be set via '
                             'environment variable KHESSIAN_LAB_CONFIG.')
    parser.add_argument('--debug', action='store_true',
                        help='Enables debug logging.')
    return parser.parse_args(argv)


def main(argv=None):

    args = parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s %(message)s')

    lab = Laboratory()

    extra = {}
    if args.out:
        extra['KHESSIAN_OUTPUT_DIR_OVERRIDE'] = args.out
    if args.seed is not None:
        extra['KHESSIAN_SEED_OVERRIDE'] = args.seed

    try:
        lab.configure(
            config_file=(args.lab_config
                         or os.environ.get('KHESSIAN_LAB_CONFIG')),
            extra_config=extra)
        return lab.run(args.command, args.config)

    except error.ConfigError as exc:
        for message in exc.messages:
            LOG.error('Config error: %s', message)
        return exc.code

    except error.LabError as exc:
        LOG.error('%(cls)s: %(exc)s', {'cls': type(exc).__name__,
                                      'exc': exc})
        return exc.code

    except Exception:
        LOG.exception('Unexpected failure')
        return error.EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
