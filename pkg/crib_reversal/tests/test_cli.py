"""
Tests for the crib-reversal command line
"""

import json
from io import StringIO

import pytest

from crib_reversal import io
from crib_reversal.management import COMMANDS, build_parser, main
from crib_reversal.management.base import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    BaseCommand,
    CommandError,
)


def run(*argv):
    stdout, stderr = StringIO(), StringIO()
    status = main(list(argv), stdout=stdout, stderr=stderr)
    return status, stdout.getvalue(), stderr.getvalue()


class TestParser:
    """Tests for subcommand registration and argument errors."""

    def test_every_subcommand_is_registered(self):
        _, commands = build_parser()
        assert set(commands) == set(COMMANDS)
        assert all(command.help for command in commands.values())

    def test_missing_subcommand(self):
        status, _, err = run()
        assert status == EXIT_USAGE
        assert 'usage' in err

    def test_unknown_option(self):
        status, _, err = run('timing', '--bogus')
        assert status == EXIT_USAGE
        assert 'Usage error' in err

    def test_bad_unit(self, output_dir):
        status, _, _ = run('timing', '--lx', '3 furlongs', '--delta-nu', '1GHz')
        assert status == EXIT_USAGE


class TestTimingCommand:
    """Tests for the timing subcommand."""

    def test_pr_yso_reversal_time(self, output_dir):
        status, out, _ = run(
            'timing', '--lx', '1mm', '--delta-nu', '1.11GHz', '--output-dir', str(output_dir)
        )
        assert status == EXIT_OK
        assert 't_rev = 2.676 µs' in out
        summary = json.loads((output_dir / 'summary.json').read_text())
        assert summary['t_rev_s'] == pytest.approx(2.676e-6, rel=1e-3)
        assert len(io.read_csv(output_dir / 'timing.csv')) == 10

    def test_subradiance_spacing(self, output_dir):
        status, out, _ = run(
            'timing',
            '--lx', '80.8um',
            '--delta-nu', '183MHz',
            '--m-max', '3',
            '--output-dir', str(output_dir),
        )
        assert status == EXIT_OK
        assert 'subradiance spacing = 2.732 ns' in out
        assert 'switching tolerance = 0.683 ns' in out

    def test_output_is_deterministic(self, tmp_path):
        for name in ('a', 'b'):
            run(
                'timing', '--lx', '1mm', '--delta-nu', '1.11GHz',
                '--output-dir', str(tmp_path / name),
            )
        for artifact in ('timing.csv', 'summary.json'):
            first = (tmp_path / 'a' / artifact).read_bytes()
            assert first == (tmp_path / 'b' / artifact).read_bytes()

    def test_invalid_shift_is_check_failure(self, output_dir):
        status, _, err = run(
            'timing', '--lx', '1mm', '--delta-nu', '0Hz', '--output-dir', str(output_dir)
        )
        assert status == EXIT_CHECK_FAILED
        assert 'INVALID_PROTOCOL' in err


class TestBoundCommand:
    """Tests for the bound subcommand."""

    def test_ninety_percent_target(self, output_dir):
        status, out, _ = run(
            'bound',
            '--eps', '0.9',
            '--lx-over-lambda', '133.3',
            '--n', '1.8',
            '--output-dir', str(output_dir),
        )
        assert status == EXIT_OK
        assert '2.134e-04' in out

    def test_quarter_rule_for_preset(self, output_dir):
        status, out, _ = run('bound', '--lx', '1mm', '--output-dir', str(output_dir))
        assert status == EXIT_OK
        assert 'quarter rule' in out
        assert '8.416e-05' in out

    @pytest.mark.parametrize('eps', ['1.5', '0', 'high'])
    def test_efficiency_outside_unit_interval(self, output_dir, eps):
        status, _, err = run(
            'bound', '--eps', eps, '--lx', '1mm', '--output-dir', str(output_dir)
        )
        assert status == EXIT_USAGE
        assert 'Efficiency' in err

    def test_needs_a_length(self, output_dir):
        status, _, err = run('bound', '--eps', '0.9', '--output-dir', str(output_dir))
        assert status == EXIT_USAGE
        assert '--lx' in err


class TestEnsembleCommand:
    """Tests for the ensemble subcommand."""

    def test_ideal_reversal(self, output_dir):
        status, out, _ = run(
            'ensemble', '--n', '1000', '--samples', '20', '--output-dir', str(output_dir)
        )
        assert status == EXIT_OK
        assert 'backward rate at t_rev = 1.000000' in out
        rows = io.read_csv(output_dir / 'ensemble.csv')
        assert len(rows) == 21
        assert float(rows[0]['r_forward']) == pytest.approx(1.0)
        labels = [r['label'] for r in io.read_csv(output_dir / 'protocol.csv')]
        assert labels[0] == 'write'
        assert 'backward_readout' in labels

    def test_residual_needs_rms(self, output_dir):
        status, _, _ = run(
            'ensemble', '--residual', 'two-point', '--output-dir', str(output_dir)
        )
        assert status == EXIT_USAGE

    def test_profile_file_without_columns(self, output_dir, tmp_path):
        path = tmp_path / 'profile.csv'
        io.write_csv(path, ['position', 'value'], [(0.0, 1.0)])
        status, _, _ = run('ensemble', '--profile', str(path), '--output-dir', str(output_dir))
        assert status == EXIT_USAGE


class TestPropagateCommand:
    """Tests for the propagate subcommand arguments."""

    @pytest.mark.parametrize('depths', ['1,x', '0,1', ','])
    def test_bad_depths(self, output_dir, depths):
        status, _, _ = run('propagate', '--depths', depths, '--output-dir', str(output_dir))
        assert status == EXIT_USAGE


class TestBaseCommand:
    """Tests for error translation in commands."""

    def test_command_error_maps_to_check_failure(self):
        class Failing(BaseCommand):
            def handle(self, *args, **options):
                raise CommandError('1 claim(s) failed: demo')

        stderr = StringIO()
        assert Failing(stdout=StringIO(), stderr=stderr).execute() == EXIT_CHECK_FAILED
        assert 'CHECK_FAILED' in stderr.getvalue()
