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

import logging


class ComponentBase(object):
    """Common base for laboratory components (solver, verifiers)"""

    def __init__(self, config=None, logger=None):
        """Initialize a component.

        :params config: laboratory configuration dict (`flask.Config`)
        :params logger: logger object, defaults to a package child logger
        """
        self._config = config if config is not None else {}
        self._logger = logger or logging.getLogger(
            'khessian_lab.%s' % type(self).__name__.lower())

    def option(self, name, default=None):
        """Fetch a ``KHESSIAN_`` prefixed laboratory option."""
        return self._config.get('KHESSIAN_' + name, default)
