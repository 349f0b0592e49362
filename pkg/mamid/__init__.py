import logging

from flask import Flask
from dotenv import load_dotenv

__version__ = '1.0.0'

# Load environment variables
load_dotenv()


def configure_logging(app):
    """Route every `mamid.*` logger through the application logger."""
    level = getattr(logging, str(app.config['LOG_LEVEL']).upper(), logging.INFO)
    app.logger.setLevel(level)
    logging.getLogger('mamid').setLevel(level)


def create_app(overrides=None):
    """Initialize the core application."""
    app = Flask(__name__, instance_relative_config=False)

    # Configure the app
    app.config.from_object('mamid.config.Config')
    if overrides:
        app.config.update(overrides)
    configure_logging(app)

    with app.app_context():
        # Include pipeline commands
        from mamid.commands import (explain_commands, preprocess_commands, report_commands, synth_commands,
                                    tune_commands, validate_commands)

        # Register blueprints
        app.register_blueprint(preprocess_commands.preprocess_bp)
        app.register_blueprint(synth_commands.synth_bp)
        app.register_blueprint(tune_commands.tune_bp)
        app.register_blueprint(validate_commands.validate_bp)
        app.register_blueprint(explain_commands.explain_bp)
        app.register_blueprint(report_commands.report_bp)

        return app
