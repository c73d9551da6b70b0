import os
import logging
from flask import Flask
from qnoise.config import config

__version__ = '1.0.0'

# Configure logging
logging.basicConfig(
    level=os.environ.get('LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

# Get logger
logger = logging.getLogger(__name__)


def create_app(config_name=None):
    if config_name is None:
        config_name = os.environ.get('QNOISE_ENV', 'development')
    if config_name not in config:
        logger.warning(f"⚠️ Unknown QNOISE_ENV '{config_name}', using default")
        config_name = 'default'

    logger.info(f"🚀 Starting qnoise with config: {config_name}")

    app = Flask(__name__)
    app.config.from_object(config[config_name])
    logging.getLogger('qnoise').setLevel(app.config.get('LOG_LEVEL', 'INFO').upper())

    logger.info(f"📋 Worker threads: {app.config.get('QNOISE_THREADS') or 'all cores'}")
    logger.info(f"📋 Output directory: {app.config.get('QNOISE_OUTPUT_DIR')}")

    # Register command blueprints
    logger.info("📚 Registering commands...")
    from qnoise.commands.experiments import experiments_bp
    from qnoise.commands.models import models_bp
    from qnoise.commands.validate import validate_bp

    app.register_blueprint(experiments_bp)
    app.register_blueprint(models_bp)
    app.register_blueprint(validate_bp)
    logger.info("✅ Commands registered successfully")

    # Initialize services
    from qnoise.services.monte_carlo_service import monte_carlo_service
    monte_carlo_service.init_app(app)

    from qnoise.services.experiment_service import experiment_service
    experiment_service.init_app(app)

    from qnoise.services.validation_service import validation_service
    validation_service.init_app(app)

    logger.info("✅ qnoise ready")
    return app
