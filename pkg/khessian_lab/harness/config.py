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

"""JSON experiment configurations.

Every problem found in a document is collected, tagged with its JSON path
(``$.domain.radius``), and raised together in one `error.ConfigError`.
"""

import dataclasses
import json
import math
import typing

from khessian_lab import error
from khessian_lab.harness import expression

KINDS = ('solve', 'verify-gradient', 'verify-pogorelov', 'verify-liouville',
         'selftest')

SHAPES = ('cylinder', 'paraboloid')

_TOP_KEYS = {'experiment', 'n', 'k', 'domain', 'grid', 'psi', 'g', 'exact',
             'm1', 'm2', 'A1', 'A2', 'B', 'alpha', 'R', 'C0', 'samples',
             'tilts', 'scales', 'u0', 'seed', 'output'}
_DOMAIN_KEYS = {'shape', 'radius', 't_start'}
_GRID_KEYS = {'h', 'tau', 'refinements'}
_OUTPUT_KEYS = {'dir', 'timestamps'}


@dataclasses.dataclass
class ExperimentConfig:
    kind: str
    n: int = 2
    k: int = 1
    shape: str = 'cylinder'
    radius: float = 1.0
    t_start: float = -1.0
    h: float = 0.25
    tau: float = 0.0625
    refinements: int = 0
    psi: typing.Optional[expression.Expression] = None
    g: typing.Optional[expression.Expression] = None
    exact: typing.Optional[expression.Expression] = None
    m1: float = 1.0
    m2: float = 2.0
    A1: float = 0.5
    A2: float = 1.0
    B: float = 1.0
    alpha: float = 0.5
    R: typing.List[float] = dataclasses.field(
        default_factory=lambda: [2.0, 4.0, 8.0])
    C0: float = 5.0
    samples: int = 1000
    tilts: typing.List[float] = dataclasses.field(
        default_factory=lambda: [0.0, 0.5, 1.0])
    scales: typing.List[float] = dataclasses.field(
        default_factory=lambda: [1.0, 2.0])
    u0: float = 0.0
    seed: typing.Optional[int] = None
    output_dir: typing.Optional[str] = None
    timestamps: typing.Optional[bool] = None
    document: dict = dataclasses.field(default_factory=dict)

    @property
    def R0(self):
        return math.sqrt(2 * self.B)


class _Collector(object):

    def __init__(self):
        self.messages = []

    def reject(self, path, message):
        self.messages.append('%s: %s' % (path, message))

    def unknown(self, path, document, allowed):
        for key in sorted(set(document) - allowed):
            self.reject('%s.%s' % (path, key), 'unknown key')

    def number(self, path, value, positive=False, non_negative=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.reject(path, 'must be a number, got %r' % (value,))
            return None
        if positive and not value > 0:
            self.reject(path, 'must be positive, got %r' % (value,))
        if non_negative and value < 0:
            self.reject(path, 'must not be negative, got %r' % (value,))
        return float(value)

    def integer(self, path, value, low=None, high=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.reject(path, 'must be an integer, got %r' % (value,))
            return None
        if (low is not None and value < low) or (
                high is not None and value > high):
            self.reject(path, 'must lie in %s..%s, got %s'
                        % (low, high, value))
        return value

    def numbers(self, path, value, positive=False):
        if not isinstance(value, list) or not value:
            self.reject(path, 'must be a non-empty list of numbers')
            return None
        items = [self.number('%s[%d]' % (path, i), item, positive=positive)
                 for i, item in enumerate(value)]
        return None if None in items else items

    def expression(self, path, value):
        if not isinstance(value, str):
            self.reject(path, 'must be an expression string')
            return None
        try:
            return expression.parse_expression(value)
        except error.ExpressionError as exc:
            self.reject(path, str(exc))


def _section(collector, document, key, allowed):
    section = document.get(key, {})
    if not isinstance(section, dict):
        collector.reject('$.%s' % key, 'must be an object')
        return {}
    collector.unknown('$.%s' % key, section, allowed)
    return section


def parse_config(text):
    """Parse and validate an experiment configuration.

    :param text: JSON document
    :returns: `ExperimentConfig`
    :raises: `error.ConfigError` listing every violation with its path
    """
    try:
        document = json.loads(text)
    except ValueError as exc:
        raise error.ConfigError('$: malformed JSON: %s' % exc)
    if not isinstance(document, dict):
        raise error.ConfigError('$: top level must be an object')

    check = _Collector()
    check.unknown('$', document, _TOP_KEYS)
    kind = document.get('experiment')
    if kind not in KINDS:
        check.reject('$.experiment', 'must be one of %s, got %r'
                     % (', '.join(KINDS), kind))
    config = ExperimentConfig(kind=kind, document=document)

    def take(key, **kwargs):
        if key in document:
            value = check.number('$.' + key, document[key], **kwargs)
            if value is not None:
                setattr(config, key, value)

    config.n = check.integer('$.n', document.get('n', config.n), 2, 3)
    if config.n is not None:
        config.k = check.integer('$.k', document.get('k', config.k), 1,
                                 config.n)

    domain = _section(check, document, 'domain', _DOMAIN_KEYS)
    config.shape = domain.get('shape', config.shape)
    if config.shape not in SHAPES:
        check.reject('$.domain.shape', 'must be one of %s'
                     % ', '.join(SHAPES))
    if 'radius' in domain:
        config.radius = check.number('$.domain.radius', domain['radius'],
                                     positive=True)
    if 't_start' in domain:
        config.t_start = check.number('$.domain.t_start', domain['t_start'])
        if config.t_start is not None and config.t_start >= 0:
            check.reject('$.domain.t_start', 'must be negative')

    grid = _section(check, document, 'grid', _GRID_KEYS)
    if 'h' in grid:
        config.h = check.number('$.grid.h', grid['h'], positive=True)
    if 'tau' in grid:
        config.tau = check.number('$.grid.tau', grid['tau'], positive=True)
    if 'refinements' in grid:
        config.refinements = check.integer('$.grid.refinements',
                                           grid['refinements'], 0, 4)

    for key in ('psi', 'g', 'exact'):
        if key in document:
            setattr(config, key, check.expression('$.' + key,
                                                  document[key]))

    for key in ('m1', 'm2', 'A1', 'A2', 'C0', 'alpha'):
        take(key, positive=True)
    take('B', non_negative=True)
    take('u0')
    if 'samples' in document:
        config.samples = check.integer('$.samples', document['samples'], 1)
    if 'seed' in document:
        config.seed = check.integer('$.seed', document['seed'], 0)
    for key in ('R', 'tilts', 'scales'):
        if key in document:
            items = check.numbers('$.' + key, document[key],
                                  positive=key != 'tilts')
            if items is not None:
                setattr(config, key, items)

    output = _section(check, document, 'output', _OUTPUT_KEYS)
    if 'dir' in output:
        if isinstance(output['dir'], str):
            config.output_dir = output['dir']
        else:
            check.reject('$.output.dir', 'must be a string')
    if 'timestamps' in output:
        if isinstance(output['timestamps'], bool):
            config.timestamps = output['timestamps']
        else:
            check.reject('$.output.timestamps', 'must be a boolean')

    _check_constants(check, config)
    _check_kind(check, config, document)

    if check.messages:
        raise error.ConfigError(check.messages)
    return config


def _check_constants(check, config):
    if None in (config.A1, config.A2, config.m1, config.m2):
        return
    if config.A1 > config.A2:
        check.reject('$.A1', 'A1 <= A2 is required by the growth bound '
                     'A1 |x|^2 <= u(x, 0) <= A2 |x|^2 + B, got A1=%s > '
                     'A2=%s' % (config.A1, config.A2))
    if config.m1 > config.m2:
        check.reject('$.m1', 'm1 <= m2 is required by the bound '
                     'm1 <= -u_t <= m2, got m1=%s > m2=%s'
                     % (config.m1, config.m2))
    if config.alpha is not None and not config.alpha < 1:
        check.reject('$.alpha', 'must lie in (0, 1)')


def _check_kind(check, config, document):
    kind = config.kind
    if kind == 'solve':
        if config.g is None and config.exact is None:
            check.reject('$.g', 'solve needs boundary data g or exact')
        if config.psi is None and config.exact is None:
            check.reject('$.psi', 'solve needs psi or exact')
    elif kind in ('verify-gradient', 'verify-pogorelov'):
        if 'domain' in document and config.shape != 'paraboloid':
            check.reject('$.domain.shape', '%s runs on a paraboloid' % kind)
        if kind == 'verify-pogorelov' and config.psi is None:
            check.reject('$.psi', 'verify-pogorelov needs psi')
        if kind == 'verify-gradient' and config.psi is not None and (
                not config.psi.is_constant):
            check.reject('$.psi', 'the gradient check needs constant psi')
    elif kind == 'verify-liouville':
        if config.g is None and config.exact is None:
            check.reject('$.g', 'verify-liouville needs boundary data')
        if config.psi is None and config.exact is None:
            check.reject('$.psi', 'verify-liouville needs psi or exact')
        if config.B is not None and config.R:
            for i, radius in enumerate(config.R):
                if radius <= config.R0:
                    check.reject('$.R[%d]' % i,
                                 'R must exceed R0 = sqrt(2B) = %s, got %s'
                                 % (config.R0, radius))
