"""
Optimize electrode potentials of a layout family for field linearity.
"""
from crib_reversal import io, units
from crib_reversal.electrode_optimizer import (
    FINE_GRID,
    OptimizerConfig,
    eight_electrode_problem,
    optimize,
    twelve_electrode_problem,
)
from crib_reversal.layouts import SAWTOOTH_POTENTIALS
from crib_reversal.management.base import BaseCommand
from crib_reversal.materials import get_preset


class Command(BaseCommand):
    help = 'Minimize δν/Δν over free electrode potentials (Nelder-Mead with restarts)'

    def add_arguments(self, parser):
        parser.add_argument('--family', choices=['eight', 'twelve'], default='eight')
        parser.add_argument('--lx', type=units.length, default=units.length('80.8um'))
        parser.add_argument('--preset', default='pr-yso')
        parser.add_argument('--restarts', type=int, default=8)
        parser.add_argument('--max-evals', type=int, default=400)
        parser.add_argument(
            '--no-verify', action='store_true', help='Skip the fine-grid re-evaluation'
        )

    def handle(self, *args, **options):
        preset = get_preset(options['preset'])
        if options['family'] == 'eight':
            problem = eight_electrode_problem(options['lx'], preset)
            initial = (SAWTOOTH_POTENTIALS[0], SAWTOOTH_POTENTIALS[2])
        else:
            problem = twelve_electrode_problem(options['lx'], preset)
            initial = None
        config = OptimizerConfig(
            restarts=options['restarts'],
            max_evals=options['max_evals'],
            seed=options['seed'],
        )
        result = optimize(
            problem,
            config,
            initial=initial,
            verify_grid=None if options['no_verify'] else FINE_GRID,
        )

        out = self.output_dir(options)
        names = [p.group for p in problem.parameters]
        io.write_csv(
            out / 'history.csv',
            ['eval_index'] + names + ['ratio'],
            [(i,) + tuple(values) + (ratio,) for i, (values, ratio) in enumerate(result.history)],
        )
        summary = result.to_dict()
        summary['names'] = names
        io.write_json(out / 'summary.json', summary)

        values = ', '.join(f'{n}={v:.4f}' for n, v in zip(names, result.parameters))
        self.stdout.write(f'best: {values}')
        self.stdout.write(f'δν/Δν = {result.ratio:.3e} after {result.evaluations} evaluations')
        if not result.converged:
            self.stdout.write(self.style.WARNING('Best restart did not converge'))
