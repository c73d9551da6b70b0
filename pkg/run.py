#!/usr/bin/env python3
"""qnoise command line: ``python run.py <qns|dd|surface|lz|spectrum|validate> [options]``."""
from flask.cli import FlaskGroup

from qnoise import create_app

cli = FlaskGroup(create_app=create_app, add_default_commands=False,
                 help='Correlated quantum noise simulator')

if __name__ == '__main__':
    cli()
