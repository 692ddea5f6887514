"""
Re-derive every numeric claim and print a claim-by-claim table.
"""
from crib_reversal.management.base import BaseCommand, CommandError
from crib_reversal.reproduction import run_claims


class Command(BaseCommand):
    help = 'Run all reproduction checks; exits 2 if any gated claim fails'

    def add_arguments(self, parser):
        parser.add_argument(
            '--quick',
            action='store_true',
            help='Coarser grids and a shorter optimizer run',
        )

    def handle(self, *args, **options):
        report = run_claims(quick=options['quick'], seed=options['seed'])
        report.write(self.output_dir(options))

        width = max(len(c.id) for c in report.claims)
        for claim in report.claims:
            if claim.passed:
                status = self.style.SUCCESS('PASS')
            elif claim.gated:
                status = self.style.ERROR('FAIL')
            else:
                status = self.style.WARNING('miss')
            note = '' if claim.gated else ' (reported)'
            self.stdout.write(
                f'{status}  {claim.id:<{width}}  {claim.value:<12.6g} {claim.target}{note}'
            )

        if report.failed:
            names = ', '.join(c.id for c in report.failed)
            raise CommandError(f'{len(report.failed)} claim(s) failed: {names}')
        self.stdout.write(self.style.SUCCESS(f'All {len(report.claims)} claims checked'))
