import csv
import json
import logging
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qnoise.engine.quantum_core import SuperOperator
from qnoise.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

RESULTS_FILE = 'results.csv'
META_FILE = 'meta.json'
SPECTRUM_FILE = 'spectrum.csv'
FIDELITIES_FILE = 'fidelities.csv'
SUPEROPERATOR_FILE = 'superoperator.json'

# metrics that must stay within [0, 1] up to rounding
BOUNDED_METRICS = frozenset({'fidelity', 'unitality', 'infidelity', 'survival', 'population'})


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return '%.17g' % float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


@dataclass
class ExperimentResult:
    """Tidy long table: one row per grid point per metric, each with a standard error."""

    name: str
    axes: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add(self, metric: str, value: float, stderr: float = 0.0, **axes):
        missing = set(self.axes) - set(axes)
        if missing:
            raise InvalidArgumentError(f"Row for '{metric}' is missing axes", {'missing': sorted(missing)})
        if stderr < 0 or not np.isfinite(stderr):
            raise InvalidArgumentError("Standard errors must be finite and >= 0",
                                       {'metric': metric, 'stderr': stderr})
        if metric in BOUNDED_METRICS and not (-1e-9 <= value <= 1.0 + 1e-9):
            raise InvalidArgumentError(f"Metric '{metric}' outside [0, 1]",
                                       {'value': value, **axes})
        row = {axis: axes[axis] for axis in self.axes}
        row.update(metric=metric, value=float(value), stderr=float(stderr))
        self.rows.append(row)

    def select(self, metric: str, **filters) -> List[Dict[str, Any]]:
        return [row for row in self.rows
                if row['metric'] == metric and all(row[k] == v for k, v in filters.items())]

    def values(self, metric: str, **filters) -> np.ndarray:
        return np.array([row['value'] for row in self.select(metric, **filters)])

    def stderrs(self, metric: str, **filters) -> np.ndarray:
        return np.array([row['stderr'] for row in self.select(metric, **filters)])

    def write_csv(self, path: str):
        columns = list(self.axes) + ['metric', 'value', 'stderr']
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(columns)
            for row in self.rows:
                writer.writerow([_format(row[c]) for c in columns])
        logger.info(f"💾 Wrote {len(self.rows)} rows to {path}")


def read_results_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


def package_versions(names: Sequence[str] = ('numpy', 'scipy', 'flask', 'python-dotenv')) -> Dict[str, str]:
    versions = {'python': platform.python_version()}
    for name in names:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'unknown'
    return versions


def write_meta(out_dir: str, config: Dict[str, Any], seed: int,
               extra: Optional[Dict[str, Any]] = None) -> str:
    """Config echo, seed and library versions; written before any computation starts."""
    os.makedirs(out_dir, exist_ok=True)
    meta = {
        'config': config,
        'seed': seed,
        'versions': package_versions(),
        'started_at': datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        meta.update(extra)
    path = os.path.join(out_dir, META_FILE)
    with open(path, 'w') as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
    return path


def update_meta(out_dir: str, **fields):
    path = os.path.join(out_dir, META_FILE)
    with open(path) as handle:
        meta = json.load(handle)
    meta.update(fields)
    with open(path, 'w') as handle:
        json.dump(meta, handle, indent=2, sort_keys=True, default=float)


def write_fidelities_csv(path: str, samples: Sequence[Tuple[Dict[str, Any], np.ndarray]]):
    """Per-trial process fidelities, one row per trial, labelled by the point's axes."""
    if not samples:
        raise InvalidArgumentError("No fidelity samples to write")
    axes = list(samples[0][0])
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(axes + ['trial', 'fidelity'])
        for labels, fidelities in samples:
            for trial, fidelity in enumerate(np.asarray(fidelities, dtype=float)):
                writer.writerow([_format(labels[a]) for a in axes] + [trial, _format(fidelity)])
    logger.info(f"💾 Wrote fidelity samples for {len(samples)} points to {path}")


def write_superoperator_json(path: str, channels: Sequence[Tuple[Dict[str, Any], SuperOperator]],
                             seed: int, n_samples: int, noise: Dict[str, Any]):
    """Mean superoperators (column-stacked, real and imaginary parts) with run metadata."""
    entries = []
    for labels, channel in channels:
        entries.append({
            **labels,
            'dimension': channel.dimension,
            'real': channel.data.real.tolist(),
            'imag': channel.data.imag.tolist(),
        })
    document = {'seed': seed, 'n_samples': n_samples, 'noise': noise,
                'convention': 'column-stacked', 'superoperators': entries}
    with open(path, 'w') as handle:
        json.dump(document, handle, default=float)
    logger.info(f"💾 Wrote {len(entries)} mean superoperators to {path}")


def read_superoperator_json(path: str) -> List[Tuple[Dict[str, Any], SuperOperator]]:
    with open(path) as handle:
        document = json.load(handle)
    channels = []
    for entry in document['superoperators']:
        data = np.array(entry['real']) + 1j * np.array(entry['imag'])
        labels = {k: v for k, v in entry.items() if k not in ('dimension', 'real', 'imag')}
        channels.append((labels, SuperOperator(data)))
    return channels
