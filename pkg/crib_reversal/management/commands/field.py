"""
Solve a layout's control field and report how linear its shift profile is.
"""
from crib_reversal import io, units
from crib_reversal.field_solver import (
    GridSpec,
    RegionBox,
    linearity_report,
    max_field,
    shift_profile,
    solve_potential,
    wire_field_map,
)
from crib_reversal.layouts import (
    QUADRUPOLE_SPAN_FRACTION,
    central_span,
    eight_electrode_layout,
    quadrupole_layout,
    twelve_electrode_layout,
    wire_quadrupole,
)
from crib_reversal.management.base import BaseCommand
from crib_reversal.materials import get_preset

FAMILIES = ['quadrupole', 'eight', 'twelve', 'wire-quadrupole']


class Command(BaseCommand):
    help = 'Solve the field of a layout and fit its shift profile'

    def add_arguments(self, parser):
        parser.add_argument('--family', choices=FAMILIES, default='eight', help='Layout family')
        parser.add_argument('--layout', default=None, help='Layout JSON file (overrides --family)')
        parser.add_argument(
            '--lx', type=units.length, default=units.length('80.8um'), help='Region A length'
        )
        parser.add_argument(
            '--u2', type=units.voltage, default=10.0, help='Potential scale U2 (or U), e.g. 10V'
        )
        parser.add_argument('--current', type=float, default=0.1, help='Wire current (A)')
        parser.add_argument(
            '--bias', type=units.field_strength, default=units.field_strength('70G'),
            help='Bias field for wire layouts, e.g. 70G',
        )
        parser.add_argument('--preset', default=None, help='Material preset name')
        parser.add_argument('--cells', type=int, default=256, help='Grid cells per period')
        parser.add_argument(
            '--core', type=float, default=None,
            help='Average over |y| < core * ly (e.g. 0.1); default samples y = 0',
        )
        parser.add_argument(
            '--span-fraction', type=float, default=None,
            help='Central fraction of region A used for the fit',
        )

    def handle(self, *args, **options):
        grid = GridSpec(cells_per_period=options['cells'])
        family = options['family']
        lx = options['lx']
        out = self.output_dir(options)

        if options['layout'] is None and family == 'wire-quadrupole':
            preset = get_preset(options['preset'] or 'er-yso')
            layout = wire_quadrupole(lx, current=options['current'], bias=options['bias'])
            field_map = wire_field_map(layout, lx, grid)
            region = (-lx / 2, lx / 2)
            ly = lx
        else:
            preset = get_preset(options['preset'] or 'pr-yso')
            if options['layout'] is not None:
                layout = io.load_layout(options['layout'])
            elif family == 'quadrupole':
                layout = quadrupole_layout(lx, u=options['u2'])
            elif family == 'twelve':
                layout = twelve_electrode_layout(lx, scale=options['u2'])
            else:
                layout = eight_electrode_layout(lx, scale=options['u2'])
            io.save_layout(layout, out / 'layout.json')
            field_map = solve_potential(layout, grid)
            region = layout.region_a[0] if layout.region_a else (-lx / 2, lx / 2)
            ly = layout.ly

        fraction = options['span_fraction']
        if fraction is None:
            fraction = QUADRUPOLE_SPAN_FRACTION if family == 'quadrupole' else 1.0
        span = central_span(region, fraction)
        core = options['core'] * ly if options['core'] is not None else None

        profile = shift_profile(field_map, preset, core)
        report = linearity_report(profile, span)
        e_max = max_field(field_map, RegionBox(region[0], region[1], core or 0.0))

        io.write_field_map(field_map, out / 'field_map.csv')
        io.write_profile(profile, out / 'profile.csv')
        summary = report.to_dict()
        summary.update(
            {
                'preset': preset.name,
                'span_m': list(span),
                'max_field': e_max,
                'delta_nu_from_max_field_hz': preset.coefficient * e_max,
            }
        )
        io.write_json(out / 'summary.json', summary)

        self.stdout.write(f'δν/Δν = {report.ratio:.3e}')
        self.stdout.write(f'Δν (fit) = {report.delta_nu / 1e6:.3f} MHz')
        self.stdout.write(f'|F_max| on region boundary = {e_max:.4g}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {out / "profile.csv"}'))
