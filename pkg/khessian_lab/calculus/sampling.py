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

from khessian_lab.calculus import sigma
from khessian_lab import error

SAMPLING_BOX = (-1.0, 3.0)


def sample_gamma_k(rng, n, k, count, box=SAMPLING_BOX, max_draws=None):
    """Rejection sample spectra of Gamma_k from a box.

    :param rng: `numpy.random.Generator`
    :returns: array of shape ``(count, n)``
    :raises: `error.DomainError` if the acceptance rate is hopeless
    """
    max_draws = max_draws or 1000 * count + 1000
    accepted = []
    draws = 0
    while len(accepted) < count:
        if draws >= max_draws:
            raise error.DomainError(
                'Only %(got)s of %(want)s Gamma_%(k)s samples after %(d)s '
                'draws' % {'got': len(accepted), 'want': count, 'k': k,
                           'd': draws})
        lam = rng.uniform(box[0], box[1], size=n)
        draws += 1
        if sigma.in_gamma_k(lam, k).inside:
            accepted.append(lam)
    return np.array(accepted).reshape(count, n)


def random_orthogonal(rng, n):
    """Haar distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_symmetric(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) * scale
    return (a + a.T) / 2


def symmetric_with_spectrum(rng, lam):
    """Random symmetric matrix with the given eigenvalues."""
    lam = np.asarray(lam, dtype=float)
    q = random_orthogonal(rng, lam.size)
    h = q @ np.diag(lam) @ q.T
    return (h + h.T) / 2
