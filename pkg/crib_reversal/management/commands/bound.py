"""
Allowed field nonlinearity for a sample length and target efficiency.
"""
from crib_reversal import io, units
from crib_reversal.exceptions import UsageError
from crib_reversal.management.base import BaseCommand
from crib_reversal.materials import get_preset
from crib_reversal.reversal_protocol import allowed_ratio, optical_length


class Command(BaseCommand):
    help = 'Compute the allowed δν/Δν (quarter-cycle rule or target efficiency)'

    def add_arguments(self, parser):
        parser.add_argument(
            '--eps', type=units.efficiency, default=None, help='Target efficiency in (0, 1)'
        )
        parser.add_argument(
            '--lx-over-lambda', type=float, default=None, help='Sample length in vacuum wavelengths'
        )
        parser.add_argument('--n', type=float, default=None, help='Refractive index')
        parser.add_argument('--lx', type=units.length, default=None, help='Sample length, e.g. 1mm')
        parser.add_argument('--preset', default='pr-yso', help='Preset used with --lx')

    def handle(self, *args, **options):
        if options['lx_over_lambda'] is not None:
            n = options['n'] if options['n'] is not None else 1.0
            length = options['lx_over_lambda'] * n
        elif options['lx'] is not None:
            preset = get_preset(options['preset'])
            length = optical_length(preset, options['lx'])
        else:
            raise UsageError('Give either --lx-over-lambda or --lx')

        ratio = allowed_ratio(length, options['eps'])
        quarter = allowed_ratio(length)
        io.write_json(
            self.output_dir(options) / 'summary.json',
            {
                'optical_length': length,
                'epsilon': options['eps'],
                'allowed_ratio': ratio,
                'quarter_rule_ratio': quarter,
            },
        )
        rule = f'ε = {options["eps"]}' if options['eps'] is not None else 'quarter rule'
        self.stdout.write(f'allowed δν/Δν ({rule}) = {ratio:.3e}')
