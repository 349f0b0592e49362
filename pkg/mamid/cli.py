import sys

import click
from flask.cli import FlaskGroup

from mamid import create_app
from mamid.utils.error_handler import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE

cli = FlaskGroup(name='mamid', create_app=create_app, add_default_commands=False,
                 help='Multi-tiered ANN intrusion detection pipeline.')


def main(argv=None):
    """Run one command and return its exit code."""
    try:
        code = cli.main(args=argv, prog_name='mamid', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo('Aborted.', err=True)
        return EXIT_INTERNAL
    return code if isinstance(code, int) else EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
