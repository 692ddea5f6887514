"""
Reversal time, subradiance times and switching tolerance for one sample.
"""
from crib_reversal import io, units
from crib_reversal.management.base import BaseCommand
from crib_reversal.materials import get_preset
from crib_reversal.reversal_protocol import ReversalPlan


class Command(BaseCommand):
    help = 'Compute t_rev, the subradiance times t_m and the switching tolerance'

    def add_arguments(self, parser):
        parser.add_argument('--preset', default='pr-yso', help='Material preset name')
        parser.add_argument(
            '--lx', type=units.length, required=True, help='Sample length, e.g. 1mm'
        )
        parser.add_argument(
            '--delta-nu',
            type=units.frequency,
            required=True,
            help='Edge frequency shift, e.g. 1.11GHz',
        )
        parser.add_argument('--m-max', type=int, default=10, help='Number of subradiance times')

    def handle(self, *args, **options):
        preset = get_preset(options['preset'])
        plan = ReversalPlan.build(preset, options['lx'], options['delta_nu'], options['m_max'])
        out = self.output_dir(options)

        io.write_csv(
            out / 'timing.csv',
            ['m', 't_m_s'],
            [(m, t) for m, t in enumerate(plan.t_m, start=1)],
        )
        io.write_json(out / 'summary.json', plan.to_dict())

        self.stdout.write(f't_rev = {plan.t_rev * 1e6:.3f} µs')
        self.stdout.write(f'subradiance spacing = {plan.t_m[0] * 1e9:.3f} ns')
        self.stdout.write(f'switching tolerance = {plan.switching_tolerance * 1e9:.3f} ns')
        self.stdout.write(self.style.SUCCESS(f'Wrote {out / "timing.csv"}'))
