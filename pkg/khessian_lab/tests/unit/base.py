# -*- coding: utf-8 -*-

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
from oslotest import base


class TestCase(base.BaseTestCase):
    """Test case base class for all unit tests"""

    SEED = 20240101

    def setUp(self):
        super().setUp()
        self.rng = np.random.default_rng(self.SEED)

    def assertClose(self, expected, observed, atol=1e-12, rtol=0.0):
        np.testing.assert_allclose(observed, expected, atol=atol, rtol=rtol)
