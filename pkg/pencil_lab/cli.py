"""``pencil`` console script: the management command without ``manage.py``."""

import os
import sys


def run(argv):
    """Runs ``pencil <subcommand> ...`` and returns the exit code (0, 1 or 2)."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "pencil_lab.settings")
    import django
    from django.core.management import call_command
    from django.core.management.base import CommandError

    django.setup()
    try:
        call_command("pencil", *argv)
    except CommandError as exc:
        sys.stderr.write(f"{exc}\n")
        return exc.returncode
    return 0


def main():
    sys.exit(run(sys.argv[1:]))
