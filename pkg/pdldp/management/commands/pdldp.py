import logging

from django.core.management.base import BaseCommand, CommandError

from pdldp.exception import PdldpException
from pdldp.experiment import load_config, run_experiment
from pdldp.forms import ExperimentMode


VERBOSITY_LEVELS = {
    0: logging.ERROR,
    1: logging.INFO,
    2: logging.DEBUG,
    3: logging.DEBUG,
}


class Command(BaseCommand):

    help = 'Runs a large deviation experiment described by a JSON config file and writes CSV reports.'

    def add_arguments(self, parser):
        parser.add_argument('mode', choices=[str(mode) for mode in ExperimentMode])
        parser.add_argument('--config', required=True, help='Path of the JSON experiment file.')
        parser.add_argument('--output-dir', dest='output_dir', help='Directory of the reports.')
        parser.add_argument('--seed', type=int, help='Monte Carlo seed, overrides mc.seed of the config.')

    def handle(self, *args, **options):
        logging.getLogger('pdldp').setLevel(VERBOSITY_LEVELS.get(options['verbosity'], logging.INFO))
        try:
            config = load_config(
                options['config'], mode=options['mode'], seed=options['seed'], output_dir=options['output_dir']
            )
            reports = run_experiment(config)
        except OSError as ex:
            raise CommandError('Cannot read or write a file: {}'.format(ex))
        except PdldpException as ex:
            raise CommandError(str(ex))
        for report in reports:
            self.stdout.write(report)
