"""
Storage and retrieval efficiency against optical depth.
"""
from dataclasses import replace

from crib_reversal import io
from crib_reversal.exceptions import UsageError
from crib_reversal.management.base import BaseCommand
from crib_reversal.oracles import backward_crib_efficiency, forward_crib_efficiency
from crib_reversal.propagation_sim import (
    DetuningLine,
    PropagationConfig,
    RetrievalMode,
    efficiency_sweep,
)


def _depths(text):
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise UsageError(f'Optical depths must be comma-separated numbers, got {text!r}')
    if not values or any(v <= 0 for v in values):
        raise UsageError('Optical depths must be positive')
    return values


class Command(BaseCommand):
    help = 'Sweep retrieval efficiency over optical depth for each retrieval mode'

    def add_arguments(self, parser):
        parser.add_argument('--depths', type=_depths, default='1,2,5', help='e.g. 0.5,1,2,5')
        parser.add_argument(
            '--modes', nargs='+', choices=[m.value for m in RetrievalMode],
            default=[RetrievalMode.FORWARD_CRIB.value, RetrievalMode.BACKWARD_CONJUGATE.value],
        )
        parser.add_argument(
            '--line',
            choices=['lorentzian', 'flat'],
            default='lorentzian',
            help='Absorption line; flat matches the closed-form efficiencies',
        )
        parser.add_argument('--nz', type=int, default=128, help='Spatial grid points')
        parser.add_argument('--dt', type=float, default=0.01, help='Time step (pulse widths)')

    def handle(self, *args, **options):
        line = DetuningLine.flat() if options['line'] == 'flat' else DetuningLine.lorentzian()
        base = PropagationConfig(optical_depth=1.0, nz=options['nz'], dt=options['dt'])
        base = replace(base, line=line)
        table = efficiency_sweep(options['depths'], options['modes'], base)

        out = self.output_dir(options)
        modes = [m.value for m in table.modes]
        io.write_csv(
            out / 'sweep.csv',
            ['alpha_l'] + [f'eta_{m}' for m in modes] + ['oracle_forward', 'oracle_backward'],
            [
                row + (forward_crib_efficiency(row[0]), backward_crib_efficiency(row[0]))
                for row in table.to_rows()
            ],
        )
        crossover = (
            table.crossover_depth()
            if RetrievalMode.FORWARD_CRIB in table.modes
            and RetrievalMode.BACKWARD_CONJUGATE in table.modes
            else None
        )
        io.write_json(
            out / 'summary.json',
            {
                'depths': list(table.depths),
                'modes': modes,
                'crossover_depth': crossover,
                'line': options['line'],
            },
        )

        for row in table.to_rows():
            cells = '  '.join(f'{m}={v:.4f}' for m, v in zip(modes, row[1:]))
            self.stdout.write(f'αL = {row[0]:g}: {cells}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {out / "sweep.csv"}'))
