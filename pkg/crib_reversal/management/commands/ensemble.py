"""
Phased-array simulation of the full storage protocol.
"""
import numpy as np

from crib_reversal import io, units
from crib_reversal.ensemble_sim import (
    GaussianResidual,
    Placement,
    ProtocolConfig,
    TwoPointResidual,
    evolve,
    init_ensemble,
    report,
    run_protocol,
)
from crib_reversal.exceptions import UsageError
from crib_reversal.field_solver import ShiftProfile
from crib_reversal.management.base import BaseCommand
from crib_reversal.materials import get_preset, optical_wavevector
from crib_reversal.reversal_protocol import FieldSchedule

RESIDUALS = ['none', 'two-point', 'gaussian']


def _load_profile(path):
    rows = io.read_csv(path)
    try:
        x = np.array([float(r['x']) for r in rows])
        shift = np.array([float(r['shift_hz']) for r in rows])
    except (KeyError, ValueError) as e:
        raise UsageError(f'{path} needs numeric x and shift_hz columns: {e}')
    return ShiftProfile(x=x, shift=shift)


class Command(BaseCommand):
    help = 'Simulate forward/backward emission of the atom array through the protocol'

    def add_arguments(self, parser):
        parser.add_argument(
            '--profile', default='ideal-linear',
            help='"ideal-linear" or a profile CSV with x and shift_hz columns',
        )
        parser.add_argument('--n', type=int, default=10000, help='Number of atoms')
        parser.add_argument('--preset', default='pr-yso')
        parser.add_argument('--lx', type=units.length, default=units.length('1mm'))
        parser.add_argument(
            '--delta-nu', type=units.frequency, default=units.frequency('1.11GHz')
        )
        parser.add_argument('--m-max', type=int, default=3)
        parser.add_argument('--residual', choices=RESIDUALS, default='none')
        parser.add_argument(
            '--delta-nu-rms', type=units.frequency, default=None,
            help='Residual RMS for --residual, e.g. 66.6kHz',
        )
        parser.add_argument('--alpha-l', type=float, default=0.0, help='Optical depth αL')
        parser.add_argument(
            '--placement', choices=[p.value for p in Placement], default='equispaced'
        )
        parser.add_argument('--hold', type=units.duration, default=0.0, help='Field-off hold')
        parser.add_argument('--t2', action='store_true', help='Apply the preset T2 decay')
        parser.add_argument(
            '--samples', type=int, default=200, help='Time samples between 0 and t_rev'
        )

    def handle(self, *args, **options):
        preset = get_preset(options['preset'])
        if options['profile'] == 'ideal-linear':
            profile = None
        else:
            profile = _load_profile(options['profile'])

        residual = None
        if options['residual'] != 'none':
            if options['delta_nu_rms'] is None:
                raise UsageError('--residual needs --delta-nu-rms')
            if options['residual'] == 'two-point':
                residual = TwoPointResidual(options['delta_nu_rms'])
            else:
                residual = GaussianResidual(options['delta_nu_rms'], seed=options['seed'])

        config = ProtocolConfig(
            preset=preset,
            lx=options['lx'],
            delta_nu=options['delta_nu'],
            n_atoms=options['n'],
            m_max=options['m_max'],
            optical_depth=options['alpha_l'],
            placement=Placement(options['placement']),
            hold=options['hold'],
            use_t2=options['t2'],
            profile=profile,
            residual=residual,
            seed=options['seed'],
        )
        run = run_protocol(config)

        written = init_ensemble(
            config.n_atoms,
            config.lx,
            optical_wavevector(preset),
            placement=config.placement,
            optical_depth=config.optical_depth,
            t2=preset.t2 if config.use_t2 else None,
            seed=config.seed,
        )
        if residual is not None:
            written = written.with_offsets(residual.offsets(written))
        shift = config.shift_profile()
        on = FieldSchedule.rectangular(run.t_rev)
        series = [
            report(evolve(written, shift, on, float(t))).to_row()
            for t in np.linspace(0.0, run.t_rev, options['samples'] + 1)
        ]

        out = self.output_dir(options)
        io.write_csv(out / 'ensemble.csv', ['t_s', 'r_forward', 'r_backward'], series)
        io.write_csv(
            out / 'protocol.csv',
            ['label', 't_s', 'r_forward', 'r_backward'],
            [(r.label,) + r.to_row() for r in run.reports],
        )
        backward = run.find('backward_readout')
        io.write_json(
            out / 'summary.json',
            {
                't_rev_s': run.t_rev,
                'verdict': run.verdict,
                'backward_at_t_rev': backward.backward,
                'forward_at_t_rev': backward.forward,
                'forward_readout': run.find('forward_readout').forward,
                'residual': options['residual'],
            },
        )

        self.stdout.write(f'backward rate at t_rev = {backward.backward:.6f}')
        self.stdout.write(f'forward rate at t_rev = {backward.forward:.3e}')
        self.stdout.write(self.style.SUCCESS(f'Verdict: {run.verdict}'))
