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

import csv
from datetime import datetime
import json
import math
import os

import numpy as np

from khessian_lab.solver import domain

REPORT_FILE = 'report.json'
CONVERGENCE_FILE = 'convergence.csv'


def format_number(value):
    """Shortest round-trip decimal; NaN and infinities stay literal."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_plain(value):
    """Recursively convert to JSON types, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_report(report, timestamps=False):
    body = to_plain(report)
    if timestamps:
        body['generated_at'] = datetime.utcnow().isoformat()
    return json.dumps(body, sort_keys=True, indent=2) + '\n'


def write_report(out_dir, report, timestamps=False):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, REPORT_FILE)
    with open(path, 'w') as f:
        f.write(render_report(report, timestamps))
    return path


def _write_rows(path, header, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(item) for item in row])
    return path


def solution_rows(solution, k, level):
    """CSV rows for the closure nodes of one level."""
    grid = solution.grid
    coords = grid.coordinates().reshape(-1, grid.n)
    closure = (grid.masks[level] != domain.EXTERIOR).reshape(-1)
    values = solution.values[level].reshape(-1)
    ut = solution.ut(level).reshape(-1)
    margin = solution.cone_margin(level, k).reshape(-1)
    for node in np.flatnonzero(closure):
        yield ([level, grid.times[level], int(node)]
               + list(coords[node]) + [values[node], ut[node], margin[node]])


def write_solution(out_dir, solution, k):
    """One ``solution_<level>.csv`` per time level."""
    os.makedirs(out_dir, exist_ok=True)
    grid = solution.grid
    header = (['level', 't', 'node']
              + ['x%d' % (i + 1) for i in range(grid.n)]
              + ['u', 'ut', 'cone_margin'])
    return [_write_rows(os.path.join(out_dir, 'solution_%d.csv' % level),
                        header, solution_rows(solution, k, level))
            for level in range(grid.levels)]


def convergence_table(hs, taus, errors):
    """Rows ``(h, tau, error, order)``, the first order left empty."""
    rows = []
    for i, (h, tau, err) in enumerate(zip(hs, taus, errors)):
        order = ''
        if i and errors[i - 1] > 0 and err > 0:
            order = math.log(errors[i - 1] / err) / math.log(hs[i - 1] / h)
        rows.append((h, tau, err, order))
    return rows


def write_convergence(out_dir, rows):
    os.makedirs(out_dir, exist_ok=True)
    return _write_rows(os.path.join(out_dir, CONVERGENCE_FILE),
                       ['h', 'tau', 'error', 'order'], rows)


def write_table(out_dir, name, header, rows):
    os.makedirs(out_dir, exist_ok=True)
    return _write_rows(os.path.join(out_dir, name), header, rows)
