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

"""Randomized sweeps over the sigma calculus."""

import itertools

import numpy as np

from khessian_lab.calculus import sampling
from khessian_lab.calculus import sigma

FD_STEP = 1e-5


def subset_sigma(lam, l):
    """Brute force sigma_l over all l-subsets, with its magnitude scale."""
    value = scale = 0.0
    for subset in itertools.combinations(lam, l):
        prod = float(np.prod(subset))
        value += prod
        scale += abs(prod)
    return value, max(scale, 1.0)


def finite_difference_grad(h, k, step=FD_STEP):
    """Central differences of s_k w.r.t. each raw matrix entry."""
    n = h.shape[0]
    grad = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n))
            e[i, j] = step
            grad[i, j] = (sigma.s_k(h + e, k) - sigma.s_k(h - e, k)) / (
                2 * step)
    return grad


def _check(worst, limit, **extra):
    result = {'worst': float(worst), 'limit': limit,
              'passed': bool(worst <= limit)}
    result.update(extra)
    return result


def oracle_sweep(rng, samples, n=5):
    worst = 0.0
    for _ in range(samples):
        lam = rng.standard_normal(n) * 2
        for l in range(n + 1):
            expected, scale = subset_sigma(lam, l)
            worst = max(worst, abs(sigma.sigma(lam, l) - expected) / scale)
    return _check(worst, 1e-12)


def identity_sweep(rng, samples, n=4):
    """Permutation symmetry and the split identity."""
    perm_worst = split_worst = 0.0
    for _ in range(samples):
        lam = rng.standard_normal(n)
        perm = rng.permutation(lam)
        for l in range(1, n + 1):
            value = sigma.sigma(lam, l)
            _, scale = subset_sigma(lam, l)
            perm_worst = max(perm_worst,
                             abs(sigma.sigma(perm, l) - value) / scale)
            for i in range(n):
                split = (sigma.sigma_restricted(lam, l, [i])
                         + lam[i] * sigma.sigma_restricted(lam, l - 1, [i]))
                split_worst = max(split_worst, abs(split - value) / scale)
    return {'permutation': _check(perm_worst, 1e-14),
            'split': _check(split_worst, 1e-12)}


def derivative_sweep(rng, samples, max_n=4):
    grad_worst = euler_worst = orth_worst = 0.0
    for s in range(samples):
        n = 2 + s % (max_n - 1)
        h = sampling.random_symmetric(rng, n)
        q = sampling.random_orthogonal(rng, n)
        for k in range(1, n + 1):
            grad = sigma.s_k_grad(h, k)
            fd = finite_difference_grad(h, k)
            grad_worst = max(grad_worst, float(
                np.max(np.abs(grad - fd) / np.maximum(1.0, np.abs(fd)))))
            value = sigma.s_k(h, k)
            euler_worst = max(euler_worst,
                              sigma.euler_identity_residual(h, k)
                              / (1 + abs(value)))
            rotated = sigma.s_k(q.T @ h @ q, k)
            orth_worst = max(orth_worst,
                             abs(rotated - value) / max(1.0, abs(value)))
    return {'gradient': _check(grad_worst, 1e-6),
            'euler': _check(euler_worst, 1e-10),
            'orthogonal_invariance': _check(orth_worst, 1e-10)}


def cone_sweep(rng, samples, n=3):
    """Maclaurin gap, Chou-Wang ratio, positivity and concavity of F."""
    gap_worst = 0.0
    concavity_worst = 0.0
    positivity_min = np.inf
    ratio_inf = np.inf
    for k in range(1, n + 1):
        lams = sampling.sample_gamma_k(rng, n, k, samples)
        for lam in lams:
            gap_worst = max(gap_worst, -sigma.maclaurin_gap(lam, k))
            diag = np.diag(sigma.s_k_grad(np.diag(lam), k))
            positivity_min = min(positivity_min, float(np.min(diag)))
            ordered = sigma.Spectrum(lam).sorted()
            if k == 2 and sigma.sigma(ordered, k) > 0:
                ratio_inf = min(ratio_inf,
                                sigma.chou_wang_ratio(ordered, k))
        others = sampling.sample_gamma_k(rng, n, k, samples)
        for lam_a, lam_b in zip(lams, others):
            h_a = sampling.symmetric_with_spectrum(rng, lam_a)
            h_b = sampling.symmetric_with_spectrum(rng, lam_b)
            theta = rng.uniform(0.0, 1.0)
            f_a, _ = sigma.f_and_grad(h_a, k)
            f_b, _ = sigma.f_and_grad(h_b, k)
            f_mid, _ = sigma.f_and_grad(theta * h_a + (1 - theta) * h_b, k)
            concavity_worst = max(
                concavity_worst, theta * f_a + (1 - theta) * f_b - f_mid)
    return {
        'maclaurin': _check(gap_worst, 1e-12),
        'concavity': _check(concavity_worst, 1e-10),
        'positivity': {'min': positivity_min,
                       'passed': bool(positivity_min > 0)},
        'chou_wang': {'infimum': ratio_inf,
                      'passed': bool(ratio_inf > 0)},
    }


def run_selftest(rng, samples=1000, logger=None):
    """Run every sweep and return a JSON friendly report.

    :param rng: `numpy.random.Generator`
    :param samples: sample count per sweep
    """
    report = {'oracle': oracle_sweep(rng, samples)}
    report.update(identity_sweep(rng, max(1, samples // 10)))
    report.update(derivative_sweep(rng, max(1, samples // 5)))
    report.update(cone_sweep(rng, samples))
    if logger:
        for name, check in sorted(report.items()):
            logger.info('Self-test %(name)s: %(state)s',
                        {'name': name,
                         'state': 'ok' if check['passed'] else 'FAILED'})
    return report
