import functools
import json
import logging
from typing import Optional

import click
from flask import current_app

from qnoise.config import RunConfig
from qnoise.exceptions import ConfigError, QNoiseError

logger = logging.getLogger(__name__)

FLAG_FIELDS = {'seed': 'run_seed', 'out': 'run_out', 'threads': 'run_threads', 'samples': 'run_samples'}


def run_options(fn):
    """Flags shared by every run command; file values are overridden by any flag given."""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                     help='KEY=VALUE run file'),
        click.option('--seed', type=click.IntRange(min=0), help='Master seed'),
        click.option('--out', type=click.Path(file_okay=False), help='Output directory'),
        click.option('--threads', type=click.IntRange(min=0), help='Worker threads (0 = all cores)'),
        click.option('--samples', type=click.IntRange(min=1), help='Monte Carlo samples'),
        click.option('--dry-run', is_flag=True, help='Print the resolved config and exit'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def base_config(kind: str) -> RunConfig:
    """Defaults with the application's environment settings applied."""
    return RunConfig(
        run_experiment=kind,
        run_seed=current_app.config['QNOISE_SEED'],
        run_out=current_app.config['QNOISE_OUTPUT_DIR'],
        run_threads=current_app.config['QNOISE_THREADS'],
    )


def resolve_config(kind: str, config_path: Optional[str] = None, **flags) -> RunConfig:
    overrides = {FLAG_FIELDS.get(name, name): value for name, value in flags.items()}
    base = base_config(kind)
    if config_path:
        cfg = RunConfig.from_file(config_path, base=base, **overrides)
    else:
        cfg = base.with_overrides(**overrides)
    return cfg.with_overrides(run_experiment=kind).validate()


def echo_config(cfg: RunConfig):
    click.echo(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))


def fail(error: Exception):
    """Structured error on stderr; exit 2 for config problems, 1 otherwise."""
    if isinstance(error, QNoiseError):
        payload = error.to_dict()
    else:
        payload = {'error': str(error), 'type': type(error).__name__, 'details': {}}
    click.echo(json.dumps(payload, sort_keys=True, default=str), err=True)
    raise SystemExit(2 if isinstance(error, ConfigError) else 1)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (QNoiseError, ValueError, OSError) as e:
            logger.error(f"❌ {fn.__name__} failed: {e}")
            fail(e)
    return wrapper
