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

"""Randomized check of the structure conditions for E(q, N).

E(q, N) = (-q)^(1/k) S_k(N)^(1/k) - 1 over q in [-m2, -m1] and N with
1/m2 <= S_k(N) <= 1/m1 and |N| <= C0.
"""

import numpy as np

from khessian_lab.calculus import sampling
from khessian_lab.calculus import sigma
from khessian_lab import error

PERTURBATION_SCALE = 1e-2
CONCAVITY_TOLERANCE = 1e-10
MAX_LISTED = 20


def ek_value(q, matrix, k):
    f, _ = sigma.f_and_grad(matrix, k)
    return (-np.asarray(q)) ** (1.0 / k) * f - 1.0


def ek_q_derivative(q, matrix, k):
    f, _ = sigma.f_and_grad(matrix, k)
    return -(1.0 / k) * (-np.asarray(q)) ** (1.0 / k - 1.0) * f


def _norm(matrices):
    return np.max(np.abs(np.linalg.eigvalsh(matrices)), axis=-1)


def sample_admissible(rng, n, k, m1, m2, C0, count, max_draws=None):
    """Matrices N of Gamma_k type with S_k in [1/m2, 1/m1], |N| <= C0.

    :raises: `error.DomainError` if the norm bound rejects too often
    """
    max_draws = max_draws or 100 * count + 100
    accepted = []
    draws = 0
    while len(accepted) < count:
        if draws >= max_draws:
            raise error.DomainError(
                'Only %(got)s admissible matrices after %(d)s draws; '
                'C0=%(c0)s is too tight' % {'got': len(accepted), 'd': draws,
                                            'c0': C0})
        draws += 1
        lam = sampling.sample_gamma_k(rng, n, k, 1)[0]
        target = rng.uniform(1.0 / m2, 1.0 / m1)
        lam = lam * (target / sigma.sigma(lam, k)) ** (1.0 / k)
        if np.max(np.abs(lam)) > C0:
            continue
        accepted.append(sampling.symmetric_with_spectrum(rng, lam))
    return np.array(accepted)


def ek_hypothesis_check(rng, n, k, m1, m2, C0, samples):
    """Measure the EK constants and list every violation.

    :returns: JSON friendly report with empirical Lambda_1, Lambda_2 for
        both conditions
    """
    if not 0 < m1 <= m2 or C0 <= 0:
        raise error.DomainError('Need 0 < m1 <= m2 and C0 > 0')
    qs = rng.uniform(-m2, -m1, size=samples)
    base = sample_admissible(rng, n, k, m1, m2, C0, samples)
    violations = []

    e_q = ek_q_derivative(qs, base, k)
    for i in np.flatnonzero(e_q >= 0):
        violations.append({'condition': 'EK-1', 'sample': int(i),
                           'value': float(e_q[i])})

    factors = rng.standard_normal((samples, n, n))
    psd = factors @ np.swapaxes(factors, -1, -2)
    psd *= (PERTURBATION_SCALE * rng.uniform(0.1, 1.0, size=samples)
            / _norm(psd))[:, None, None]
    gain = ek_value(qs, base + psd, k) - ek_value(qs, base, k)
    ratio = gain / _norm(psd)
    for i in np.flatnonzero(ratio <= 0):
        violations.append({'condition': 'EK-2', 'sample': int(i),
                           'value': float(ratio[i])})

    other = sample_admissible(rng, n, k, m1, m2, C0, samples)
    theta = rng.uniform(0.0, 1.0, size=samples)
    f_a, _ = sigma.f_and_grad(base, k)
    f_b, _ = sigma.f_and_grad(other, k)
    f_mid, _ = sigma.f_and_grad(theta[:, None, None] * base
                                + (1 - theta)[:, None, None] * other, k)
    chord = theta * f_a + (1 - theta) * f_b
    defect = chord - f_mid
    for i in np.flatnonzero(defect > CONCAVITY_TOLERANCE * (1 + chord)):
        violations.append({'condition': 'concavity', 'sample': int(i),
                           'value': float(defect[i])})

    identity = np.eye(n)
    return {
        'samples': samples,
        'n': n, 'k': k, 'm1': m1, 'm2': m2, 'C0': C0,
        'ek1': {'lambda1': float(-np.max(e_q)),
                'lambda2': float(-np.min(e_q))},
        'ek2': {'lambda1': float(np.min(ratio)),
                'lambda2': float(np.max(ratio))},
        'concavity_max_defect': float(np.max(defect)),
        'spot': {'E': float(ek_value(-1.0, identity, k)),
                 'E_q': float(ek_q_derivative(-1.0, identity, k))},
        'violation_count': len(violations),
        'violations': violations[:MAX_LISTED],
        'passed': not violations,
    }
