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

"""Elementary symmetric functions of matrix spectra.

Matrix valued operations accept a :class:`SymMatrix` or any array of shape
``(..., n, n)``; stacked matrices are processed in one call, which is how
the solver evaluates whole grid slices.
"""

from collections import namedtuple
import itertools
import math

import numpy as np

from khessian_lab import error

CONE_TOLERANCE = 1e-12

ConeVerdict = namedtuple('ConeVerdict', ['k', 'inside', 'margin'])


class Spectrum(object):
    """Eigenvalue vector of a symmetric matrix."""

    def __init__(self, values):
        values = np.array(values, dtype=float).reshape(-1)
        if values.size < 1:
            raise error.DomainError('Spectrum needs at least one entry')
        if not np.all(np.isfinite(values)):
            raise error.DomainError('Spectrum entries must be finite: %s'
                                    % values)
        self.values = values

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return 'Spectrum(%s)' % self.values.tolist()

    def sorted(self):
        """Return a copy ordered descending."""
        return Spectrum(np.sort(self.values)[::-1])

    @property
    def is_sorted(self):
        return bool(np.all(np.diff(self.values) <= 0))

    @classmethod
    def of(cls, matrix):
        """Spectrum of a symmetric matrix."""
        return cls(np.linalg.eigvalsh(_as_array(matrix)))


class SymMatrix(object):
    """Symmetric n x n matrix, symmetrized on construction."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise error.DomainError('Square matrix expected, got shape %s'
                                    % (entries.shape,))
        self.entries = (entries + entries.T) / 2

    @property
    def n(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return 'SymMatrix(%s)' % self.entries.tolist()

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)))


def _as_values(lam):
    if isinstance(lam, Spectrum):
        return lam.values
    return Spectrum(lam).values


def _as_array(matrix):
    if isinstance(matrix, SymMatrix):
        return matrix.entries
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim < 2 or matrix.shape[-1] != matrix.shape[-2]:
        raise error.DomainError('Square matrices expected, got shape %s'
                                % (matrix.shape,))
    return matrix


def _check_order(l, n, lowest=0):
    if not lowest <= l <= n:
        raise error.DomainError(
            'Order %(l)s outside %(low)s..%(n)s' % {'l': l, 'low': lowest,
                                                    'n': n})


def sigma(lam, l):
    """Evaluate the l-th elementary symmetric function.

    Uses the one-pass recursion e_j <- e_j + x * e_{j-1}, never subsets.

    :param lam: `Spectrum` or sequence of reals
    :param l: order, 0 <= l <= n (sigma_0 is 1)
    :returns: sigma_l(lam) as `float`
    :raises: `error.DomainError` if `l` is out of range
    """
    values = _as_values(lam)
    _check_order(l, values.size)
    e = np.zeros(l + 1)
    e[0] = 1.0
    for x in values:
        for j in range(l, 0, -1):
            e[j] += x * e[j - 1]
    return float(e[l])


def sigma_restricted(lam, l, excluded):
    """Evaluate sigma_l with the excluded coordinates set to zero.

    Indices are zero based. A repeated index makes the value 0.

    :raises: `error.DomainError` on out of range orders or indices
    """
    values = _as_values(lam).copy()
    _check_order(l, values.size)
    excluded = list(excluded)
    for i in excluded:
        if not 0 <= i < values.size:
            raise error.DomainError('Index %s outside 0..%s'
                                    % (i, values.size - 1))
    if len(set(excluded)) != len(excluded):
        return 0.0
    values[excluded] = 0.0
    return sigma(values, l)


def in_gamma_k(lam, k):
    """Test membership in the open cone Gamma_k.

    :returns: `ConeVerdict` with the margin min_{j<=k} sigma_j(lam)
    """
    values = _as_values(lam)
    _check_order(k, values.size, lowest=1)
    margin = min(sigma(values, j) for j in range(1, k + 1))
    return ConeVerdict(k=k, inside=margin > 0, margin=margin)


def in_closure_gamma_k(lam, k, tol=CONE_TOLERANCE):
    """Closure test with tolerance, used by solver safeguards."""
    return in_gamma_k(lam, k).margin >= -tol


def _minor_sum(a, k):
    n = a.shape[-1]
    if k == 0:
        return np.ones(a.shape[:-2])
    total = np.zeros(a.shape[:-2])
    for idx in itertools.combinations(range(n), k):
        idx = list(idx)
        total = total + np.linalg.det(a[..., idx, :][..., idx])
    return total


def s_k(matrix, k):
    """k-Hessian value as the sum of all k x k principal minors."""
    a = _as_array(matrix)
    _check_order(k, a.shape[-1])
    result = _minor_sum(a, k)
    return float(result) if result.ndim == 0 else result


def s_k_grad(matrix, k):
    """Derivative tensor dS_k/dH_ij of the principal minor expansion.

    Entries are cofactors of the principal submatrices, so the tensor is
    well defined for repeated eigenvalues. Entries H_ij and H_ji are
    treated as independent variables.
    """
    a = _as_array(matrix)
    n = a.shape[-1]
    _check_order(k, n, lowest=1)
    grad = np.zeros(a.shape)
    for idx in itertools.combinations(range(n), k):
        idx = list(idx)
        sub = a[..., idx, :][..., idx]
        for p, i in enumerate(idx):
            rows = [r for r in range(k) if r != p]
            for q, j in enumerate(idx):
                cols = [c for c in range(k) if c != q]
                if k == 1:
                    minor = 1.0
                else:
                    minor = np.linalg.det(sub[..., rows, :][..., cols])
                grad[..., i, j] += (-1) ** (p + q) * minor
    if isinstance(matrix, SymMatrix):
        return SymMatrix(grad)
    return grad


def f_and_grad(matrix, k):
    """F = S_k^(1/k) and its gradient.

    :returns: tuple ``(F, F_ij)``
    :raises: `error.ConeError` where S_k <= 0
    """
    a = _as_array(matrix)
    value = np.asarray(_minor_sum(a, k))
    if np.any(value <= 0):
        raise error.ConeError('S_%s must be positive, got %s'
                              % (k, np.min(value)))
    grad = np.asarray(s_k_grad(a, k))
    f = np.asarray(value ** (1.0 / k))
    scale = (1.0 / k) * value ** (1.0 / k - 1.0)
    f_grad = np.asarray(scale)[..., None, None] * grad
    if isinstance(matrix, SymMatrix):
        return float(f), SymMatrix(f_grad)
    return (float(f) if f.ndim == 0 else f), f_grad


def euler_identity_residual(matrix, k):
    """|sum_ij S_k^ij H_ij - k S_k(H)|, zero by homogeneity."""
    a = _as_array(matrix)
    lhs = np.sum(np.asarray(s_k_grad(a, k)) * a, axis=(-2, -1))
    result = np.abs(lhs - k * _minor_sum(a, k))
    return float(result) if result.ndim == 0 else result


def maclaurin_gap(lam, k):
    """Gap of the Maclaurin inequality between orders k-1 and k.

    For k = 1 the inequality degenerates and sigma_1 / n is returned.

    :raises: `error.ConeError` if `lam` is outside Gamma_k
    """
    values = _as_values(lam)
    n = values.size
    if not in_gamma_k(values, k).inside:
        raise error.ConeError('%s is outside Gamma_%s' % (values, k))
    if k == 1:
        return sigma(values, 1) / n
    lower = (sigma(values, k - 1) / math.comb(n, k - 1)) ** (1.0 / (k - 1))
    upper = (sigma(values, k) / math.comb(n, k)) ** (1.0 / k)
    return lower - upper


def chou_wang_ratio(lam, k):
    """lambda_1 sigma_{k-1;1} / sigma_k for a descending spectrum.

    :raises: `error.DomainError` if unsorted, outside Gamma_k or
        sigma_k <= 0
    """
    spectrum = lam if isinstance(lam, Spectrum) else Spectrum(lam)
    if not spectrum.is_sorted:
        raise error.DomainError('Spectrum must be sorted descending: %s'
                                % spectrum)
    verdict = in_gamma_k(spectrum, k)
    sk = sigma(spectrum, k)
    if not verdict.inside or sk <= 0:
        raise error.DomainError('%s is outside Gamma_%s' % (spectrum, k))
    values = spectrum.values
    return values[0] * sigma_restricted(values, k - 1, [0]) / sk
