import logging

import click
from flask import Blueprint

from qnoise.commands.common import echo_config, handle_errors, resolve_config, run_options
from qnoise.config import ExperimentConfig
from qnoise.services.experiment_service import experiment_service

logger = logging.getLogger(__name__)

models_bp = Blueprint('models', __name__, cli_group=None)


@models_bp.cli.command('spectrum')
@run_options
@click.option('--model', 'arma_model', type=click.Choice(ExperimentConfig.ARMA_MODELS),
              help='ARMA design')
@click.option('--grid-size', 'spectrum_grid_size', type=click.IntRange(min=2),
              help='Frequencies on [0, pi]')
@click.option('--trajectory', 'spectrum_trajectory_length', type=click.IntRange(min=0),
              help='Also write a sample trajectory of this length')
@handle_errors
def spectrum(config_path, dry_run, **flags):
    """Design an ARMA model and write its power spectrum."""
    cfg = resolve_config('spectrum', config_path, **flags)
    if dry_run:
        echo_config(cfg)
        return
    result = experiment_service.run('spectrum', cfg)
    click.echo(f"spectrum: {cfg.arma_model} (p={result.summary['p']}, q={result.summary['q']}) "
               f"written to {cfg.run_out}")
