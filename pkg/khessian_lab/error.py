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

EXIT_ERROR = 1
EXIT_INVALID = 2


class LabError(Exception):
    """Create generic khessian-lab exception object

    The `code` attribute doubles as the process exit code.
    """

    def __init__(self, msg='Unknown error', code=EXIT_ERROR):
        super().__init__(msg)
        self.code = code


class DomainError(LabError):
    """Argument outside the domain of an operation"""


class ConeError(LabError):
    """Spectrum outside the Gamma_k cone where it is required"""


class ConeCollapseError(ConeError):
    """Newton safeguard could not keep the iterate admissible"""


class NonConvergenceError(LabError):
    """Newton iteration stagnated."""

    def __init__(self, msg, history=(), code=EXIT_ERROR):
        super().__init__(msg, code)
        self.history = list(history)


class DegenerateGridError(LabError):
    """Grid has no interior nodes."""


class ConsistencyError(LabError):
    """Field violates a bound it holds by construction."""


class InputError(LabError):
    """Caller supplied data violating a precondition."""


class AlignmentError(LabError):
    """Rescaled nodes do not coincide with source nodes."""


class ExperimentInvalid(LabError):
    """Experiment set-up cannot support its conclusion."""

    def __init__(self, msg, code=EXIT_INVALID):
        super().__init__(msg, code)


class BoxTooSmallError(ExperimentInvalid):
    """Sublevel set reaches the computational box boundary."""


class ConfigError(LabError):
    """Experiment configuration rejected."""

    def __init__(self, messages, code=EXIT_ERROR):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__('; '.join(self.messages), code)


class ExpressionError(LabError):
    """Malformed or non-evaluable expression."""

    def __init__(self, msg, offset=None, code=EXIT_ERROR):
        super().__init__(msg, code)
        self.offset = offset
