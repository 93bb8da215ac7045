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

RANDOM_DIRECTIONS = 64


def direction_set(n, rng, count=RANDOM_DIRECTIONS):
    """The n axis directions followed by `count` seeded unit vectors.

    :returns: array of shape ``(n + count, n)``
    """
    random = rng.standard_normal((count, n))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    return np.concatenate([np.eye(n), random])


def directional(vectors, directions):
    """Contract the last axis of `vectors` with each direction."""
    return np.tensordot(vectors, directions, axes=([-1], [1]))


def second_directional(matrices, directions):
    """xi^T A xi for every matrix and direction, last axis indexes xi."""
    return np.einsum('...ij,di,dj->...d', matrices, directions, directions)
