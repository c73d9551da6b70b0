import logging
import os

import click
from flask import Blueprint

from qnoise.commands.common import echo_config, handle_errors, resolve_config, run_options
from qnoise.config import ExperimentConfig
from qnoise.experiments.results import RESULTS_FILE, update_meta, write_meta
from qnoise.services.monte_carlo_service import monte_carlo_service
from qnoise.services.validation_service import validation_service

logger = logging.getLogger(__name__)

validate_bp = Blueprint('validate', __name__, cli_group=None)


@validate_bp.cli.command('validate')
@run_options
@click.option('--level', 'validate_level', type=click.Choice(ExperimentConfig.VALIDATE_LEVELS),
              help='quick for smoke runs, full for acceptance sizes')
@handle_errors
def validate(config_path, dry_run, **flags):
    """Run the invariant suite; exits 1 if any check fails."""
    cfg = resolve_config('validate', config_path, **flags)
    if dry_run:
        echo_config(cfg)
        return

    write_meta(cfg.run_out, cfg.to_dict(), cfg.run_seed, {'experiment': 'validate'})
    monte_carlo_service.configure(cfg.run_threads)
    report = validation_service.run(cfg.validate_level, cfg.run_seed)
    report.to_result().write_csv(os.path.join(cfg.run_out, RESULTS_FILE))
    update_meta(cfg.run_out, passed=report.passed,
                failures=[check.name for check in report.failures])

    for check in report.checks:
        click.echo(check.line())
    click.echo(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} checks passed")
    if not report.passed:
        raise SystemExit(1)
