import logging

import click
from flask import Blueprint

from qnoise.commands.common import echo_config, handle_errors, resolve_config, run_options
from qnoise.services.experiment_service import experiment_service

# Configure logger
logger = logging.getLogger(__name__)

experiments_bp = Blueprint('experiments', __name__, cli_group=None)


def _run(kind: str, config_path, dry_run: bool, **flags):
    cfg = resolve_config(kind, config_path, **flags)
    if dry_run:
        echo_config(cfg)
        return
    result = experiment_service.run(kind, cfg)
    click.echo(f"{kind}: {len(result.rows)} rows written to {cfg.run_out}")


@experiments_bp.cli.command('qns')
@run_options
@click.option('--w', 'qns_w', type=int, help='Idle steps per sequence (even)')
@handle_errors
def qns(config_path, dry_run, **flags):
    """Noise spectroscopy: reconstruct the dephasing spectrum from sequence survivals."""
    _run('qns', config_path, dry_run, **flags)


@experiments_bp.cli.command('dd')
@run_options
@click.option('--periods', 'dd_periods', type=click.IntRange(min=1), help='Protocol periods')
@click.option('--noise', 'dd_noise', type=click.Choice(['multiaxis', 'amplitude_damping', 'static']),
              help='Noise family')
@handle_errors
def dd(config_path, dry_run, **flags):
    """Dynamical decoupling fidelity (or unitality) per step for each protocol."""
    _run('dd', config_path, dry_run, **flags)


@experiments_bp.cli.command('surface')
@run_options
@click.option('--check', 'surface_check', type=click.Choice(['X', 'Z']), help='Stabilizer check')
@click.option('--steps-per-gate', 'surface_steps_per_gate', type=click.IntRange(min=1),
              help='Trotter steps per gate')
@click.option('--circuit', 'surface_circuit', type=click.Path(dir_okay=False),
              help='Circuit text file to run instead of the stabilizer check')
@handle_errors
def surface(config_path, dry_run, **flags):
    """SchWARMA against Trotter infidelity over the (gamma, tau_c) grid."""
    _run('surface', config_path, dry_run, **flags)


@experiments_bp.cli.command('lz')
@run_options
@click.option('--spin', 'lz_spin', type=click.Choice(['half', 'one']), help='Spin of the sweep')
@click.option('--kappa', 'lz_kappa', type=click.IntRange(min=1), help='Fine steps per segment')
@handle_errors
def lz(config_path, dry_run, **flags):
    """Landau-Zener sweep: full Trotter against partitioned SchWARMA."""
    _run('lz', config_path, dry_run, **flags)
