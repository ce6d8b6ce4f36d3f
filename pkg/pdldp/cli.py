import sys

import django

from django.conf import settings as django_settings

from pdldp.conf import settings


def configure():
    """
    Minimal Django settings for running the experiments outside a project.
    """
    if not django_settings.configured:
        django_settings.configure(
            INSTALLED_APPS=('pdldp',),
            USE_I18N=False,
            USE_TZ=True,
            LOGGING=settings.LOGGING,
        )
    django.setup()


def main(argv=None):
    """
    Console script ``pdldp <mode> --config <path> [--output-dir <path>] [--seed <int>]``.
    """
    configure()
    from pdldp.management.commands.pdldp import Command

    argv = sys.argv[1:] if argv is None else list(argv)
    Command().run_from_argv(['pdldp', 'pdldp'] + argv)


if __name__ == '__main__':
    main()
