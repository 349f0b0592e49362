import logging
from functools import wraps

import click
from flask import current_app

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class MamidError(Exception):
    """Base class for all pipeline errors."""
    exit_code = EXIT_INTERNAL

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        """Convert the error to a dictionary for logs and ledgers."""
        return {'error': type(self).__name__, 'message': self.message, **self.details}


class UsageError(MamidError):
    exit_code = EXIT_USAGE


class DataError(MamidError):
    """Raised when input data cannot be used."""
    exit_code = EXIT_DATA


class DataIOError(DataError):
    pass


class SchemaError(DataError):
    pass


class LabelingError(DataError):
    def __init__(self, message, row=None, **details):
        super().__init__(message, row=row, **details)
        self.row = row


class EmptyFeatureSpaceError(DataError):
    pass


class PreconditionError(DataError):
    pass


class ModelError(MamidError):
    """Raised by the network engine."""
    exit_code = EXIT_INTERNAL


class InvalidArchitectureError(ModelError):
    pass


class IncompatibleConfigurationError(ModelError):
    pass


class DimensionError(ModelError):
    pass


class PropagationError(ModelError):
    def __init__(self, message, index=None, **details):
        super().__init__(message, index=index, **details)
        self.index = index


class OptimizerError(ModelError):
    pass


class TrainingDivergedError(ModelError):
    def __init__(self, message, epoch=None, **details):
        super().__init__(message, epoch=epoch, **details)
        self.epoch = epoch


def _logger():
    try:
        return current_app.logger
    except RuntimeError:
        return logging.getLogger('mamid')


def handle_errors(f):
    """Decorator for commands: map pipeline errors to exit codes."""
    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except MamidError as e:
            _logger().error(f"{f.__name__} failed: {e.message}")
            click.echo(f"Error: {e.message}", err=True)
            raise click.exceptions.Exit(e.exit_code)
        except Exception as e:
            _logger().exception(f"Unexpected error in {f.__name__}: {str(e)}")
            click.echo(f"Internal error: {str(e)}", err=True)
            raise click.exceptions.Exit(EXIT_INTERNAL)

    return decorated
