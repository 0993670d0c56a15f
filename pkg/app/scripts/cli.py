#!/usr/bin/env python3
"""
Command-line front door for the GHZ -> W conversion toolkit
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from app.core.errors import ConvergenceError, DataFileError, QuantumToolkitError
from app.core.logging_config import configure_logging
from app.models.state import DensityMatrix, PureState
from app.schemas.run_config import (
    AnalyzeConfig,
    FilterConfig,
    PipelineConfig,
    StateConfig,
    TomoReconstructConfig,
    TomoSimConfig,
)
from app.services import analysis_service, povm_service, state_service, tomography_service
from app.utils import serialization

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for CLI"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Master seed; derived from entropy if omitted')
    common.add_argument('--threads', type=int, default=1, help='Worker threads for parallel evaluation')
    common.add_argument('--json', dest='json_output', action='store_true', help='Print one JSON document')

    parser = argparse.ArgumentParser(description='GHZ to W state conversion toolkit')
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    state_parser = subparsers.add_parser('state', parents=[common], help='Write a canonical state')
    state_parser.add_argument('kind', choices=['ghz', 'w', 'wprime'])
    state_parser.add_argument('--n', type=int, required=True)
    state_parser.add_argument('--sign', choices=['+', '-'], default='+')
    state_parser.add_argument('--white-noise', type=float, default=0.0,
                              help='Mix in I/d with this weight (writes a density matrix)')
    state_parser.add_argument('--out')

    filter_parser = subparsers.add_parser('filter', parents=[common], help='Apply the local filter on every qubit')
    filter_parser.add_argument('--input', required=True)
    filter_parser.add_argument('--a-squared', '--a2', dest='a_squared', type=float, required=True)
    filter_parser.add_argument('--basis', choices=['DA', 'HV'], default='DA')
    filter_parser.add_argument('--out')

    tomo_parser = subparsers.add_parser('tomo', help='Tomography simulation and reconstruction')
    tomo_sub = tomo_parser.add_subparsers(dest='tomo_command')

    sim_parser = tomo_sub.add_parser('sim', parents=[common], help='Simulate coincidence counts')
    sim_parser.add_argument('--input', required=True)
    sim_parser.add_argument('--shots', type=float)
    sim_parser.add_argument('--peak', type=float)
    sim_parser.add_argument('--noise', choices=['none', 'poisson'], default='poisson')
    sim_parser.add_argument('--background', type=float, default=0.0)
    sim_parser.add_argument('--out')

    rec_parser = tomo_sub.add_parser('reconstruct', parents=[common], help='Maximum-likelihood reconstruction')
    rec_parser.add_argument('--counts', required=True)
    rec_parser.add_argument('--n', type=int)
    rec_parser.add_argument('--max-iterations', type=int)
    rec_parser.add_argument('--tolerance', type=float)
    rec_parser.add_argument('--initializer', choices=['linear', 'mixed'], default='linear')
    rec_parser.add_argument('--out')

    analyze_parser = subparsers.add_parser('analyze', parents=[common], help='Fidelities and error bars')
    analyze_parser.add_argument('--input', required=True, help='State or reconstruction JSON')
    analyze_parser.add_argument('--counts')
    analyze_parser.add_argument('--montecarlo', type=int)
    analyze_parser.add_argument('--statistic', default='fidelity_w_canonical')
    analyze_parser.add_argument('--starts', type=int)
    analyze_parser.add_argument('--plot-data')
    analyze_parser.add_argument('--basis', choices=['HV', 'DA'], default='HV')
    analyze_parser.add_argument('--out')

    pipe_parser = subparsers.add_parser('pipeline', parents=[common], help='State -> filter -> tomography -> report')
    pipe_parser.add_argument('--n', type=int, default=3)
    pipe_parser.add_argument('--a-squared', '--a2', dest='a_squared', type=float, default=0.38)
    pipe_parser.add_argument('--shots', type=float, default=100000.0)
    pipe_parser.add_argument('--noise', choices=['none', 'poisson'], default='poisson')
    pipe_parser.add_argument('--background', type=float, default=0.0)
    pipe_parser.add_argument('--white-noise', type=float, default=0.0)
    pipe_parser.add_argument('--montecarlo', type=int)
    pipe_parser.add_argument('--starts', type=int)
    pipe_parser.add_argument('--out-dir')

    return parser


def resolve_seed(seed: Optional[int]) -> int:
    """Use the given seed or draw one from OS entropy"""
    if seed is not None:
        return seed
    return int(np.random.SeedSequence().entropy % (2 ** 32))


def child_seeds(seed: int, count: int) -> List[int]:
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


def emit(summary: Dict[str, Any], json_output: bool) -> None:
    """Line-oriented key=value summary, or a single JSON document"""
    summary = serialization.convert_numpy_to_python(summary)
    if json_output:
        print(json.dumps(summary, indent=2))
        return
    for key, value in summary.items():
        if value is None:
            continue
        if isinstance(value, float):
            value = f"{value:.6f}"
        elif isinstance(value, (dict, list)):
            value = json.dumps(value)
        print(f"{key}={value}")


def _config_kwargs(args: argparse.Namespace, exclude=('command', 'tomo_command')) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in exclude and v is not None}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_state(config: StateConfig) -> Dict[str, Any]:
    builders = {
        'ghz': lambda n: state_service.make_ghz(n, config.sign),
        'w': state_service.make_w_hv,
        'wprime': state_service.make_w_prime,
    }
    state = builders[config.kind](config.n)
    if config.white_noise > 0.0:
        state = state_service.mix_with_white_noise(state, config.white_noise)
    payload = serialization.state_to_dict(state)
    if config.out:
        serialization.write_json(payload, config.out)
    elif not config.json_output:
        print(json.dumps(payload))
    return {
        'kind': config.kind,
        'n_qubits': state.n_qubits,
        'state_kind': payload['kind'],
        'entries': len(payload['data']),
        'out': config.out,
    }


def cmd_filter(config: FilterConfig) -> Dict[str, Any]:
    state = serialization.read_state(config.input)
    outcome = povm_service.apply_filter_all(state, config.a_squared, config.basis)
    if config.out:
        serialization.write_json(serialization.filter_outcome_to_dict(outcome), config.out)

    summary: Dict[str, Any] = {
        'success_probability': outcome.success_probability,
        'a_squared': config.a_squared,
        'basis': config.basis,
    }
    n = state.n_qubits
    if config.a_squared == 1.0:
        summary['notice'] = 'a^2 = 1 is the identity filter; input unchanged'
    if n >= 2:
        summary['fidelity_w_analytic'] = povm_service.fidelity_wN_analytic(n, config.a_squared)
        summary['fidelity_w'] = analysis_service.fidelity_pure(
            outcome.output_state, state_service.make_w_prime(n)
        )
    if n == 3:
        summary['fidelity_ghz_analytic'] = povm_service.fidelity_ghz3_analytic(config.a_squared)
    summary['out'] = config.out
    return summary


def cmd_tomo_sim(config: TomoSimConfig) -> Dict[str, Any]:
    state = serialization.read_state(config.input)
    shots = config.shots if config.shots is not None else tomography_service.shots_for_peak(state, config.peak)
    records = tomography_service.simulate_counts(
        state,
        shots_per_setting=shots,
        noise=config.noise,
        background_rate=config.background,
        rng_seed=config.seed,
    )
    if config.out:
        serialization.write_counts(records, config.out)
    elif not config.json_output:
        print(serialization.records_to_frame(records).to_csv(index=False), end='')
    return {
        'settings': len(records),
        'shots_per_setting': shots,
        'noise': config.noise,
        'max_counts': max(r.raw_counts for r in records),
        'out': config.out,
    }


def cmd_tomo_reconstruct(config: TomoReconstructConfig) -> Dict[str, Any]:
    records = serialization.read_counts(config.counts)
    n = config.n or records[0].setting.n_qubits
    result = tomography_service.reconstruct_mle(
        records, n,
        max_iterations=config.max_iterations,
        tolerance=config.tolerance,
        initializer=config.initializer,
    )
    if config.out:
        serialization.write_json(serialization.reconstruction_to_dict(result), config.out)
    summary = {
        'converged': result.converged,
        'iterations': result.iterations,
        'log_likelihood': result.log_likelihood,
        'residual': result.residual,
        'fidelity_ghz': analysis_service.fidelity_pure(result.rho, state_service.make_ghz(n, '+')) if n >= 2 else None,
        'fidelity_w': analysis_service.fidelity_pure(result.rho, state_service.make_w_prime(n)) if n >= 2 else None,
        'purity': result.rho.purity,
        'out': config.out,
    }
    if not result.converged:
        summary['exit_code'] = EXIT_NOT_CONVERGED
    return summary


def cmd_analyze(config: AnalyzeConfig) -> Dict[str, Any]:
    state = serialization.read_state(config.input)
    rho = state_service.to_density(state)
    n = rho.n_qubits
    summary: Dict[str, Any] = {'n_qubits': n, 'purity': rho.purity}
    if n >= 2:
        summary['fidelity_ghz_canonical'] = analysis_service.evaluate_statistic('fidelity_ghz_canonical', rho)
        summary['fidelity_w_canonical'] = analysis_service.evaluate_statistic('fidelity_w_canonical', rho)
        for family in ('GHZ_G', 'W_G'):
            value, params = analysis_service.fidelity_local_optimized(
                rho, family, starts=config.starts, rng_seed=config.seed, threads=config.threads
            )
            summary[f'fidelity_{family.lower()}'] = value
            summary[f'angles_{family.lower()}'] = [list(t) for t in params.angles]

    if config.montecarlo is not None:
        records = serialization.read_counts(config.counts)
        report = analysis_service.monte_carlo_uncertainty(
            records, config.statistic,
            n_trials=config.montecarlo,
            rng_seed=config.seed,
            threads=config.threads,
            local_opt_starts=config.starts,
        )
        summary[f'{config.statistic}_point_estimate'] = report.point_estimate
        summary[f'{config.statistic}_mean'] = report.mean
        summary[f'{config.statistic}_std_dev'] = report.std_dev
        summary['montecarlo_trials'] = report.n_trials
        summary['montecarlo_failed'] = report.n_failed

    if config.plot_data:
        analysis_service.export_plot_data(rho, config.plot_data, config.basis)
        summary['plot_data'] = config.plot_data
    if config.out:
        serialization.write_json(summary, config.out)
    return summary


def cmd_pipeline(config: PipelineConfig) -> Dict[str, Any]:
    sim_in_seed, sim_out_seed, mc_seed = child_seeds(config.seed, 3)
    n = config.n

    ideal = state_service.relabeled_ghz(n)
    source = (state_service.mix_with_white_noise(ideal, config.white_noise)
              if config.white_noise > 0.0 else state_service.to_density(ideal))
    outcome = povm_service.apply_filter_all(source, config.a_squared)
    filtered = outcome.output_state

    counts_in = tomography_service.simulate_counts(
        source, config.shots, config.noise, config.background, rng_seed=sim_in_seed)
    counts_out = tomography_service.simulate_counts(
        filtered, config.shots, config.noise, config.background, rng_seed=sim_out_seed)
    rec_in = tomography_service.reconstruct_mle(counts_in, n)
    rec_out = tomography_service.reconstruct_mle(counts_out, n)

    report = analysis_service.conversion_report(
        rec_in.rho, rec_out.rho,
        records_in=counts_in if config.montecarlo else None,
        records_out=counts_out if config.montecarlo else None,
        n_trials=config.montecarlo,
        rng_seed=mc_seed,
        starts=config.starts,
        threads=config.threads,
    )
    w_prime = state_service.make_w_prime(n)
    summary: Dict[str, Any] = {
        'n_qubits': n,
        'a_squared': config.a_squared,
        'success_probability': outcome.success_probability,
        'fidelity_w_analytic': povm_service.fidelity_wN_analytic(n, config.a_squared),
        'fidelity_w_filtered': analysis_service.fidelity_pure(filtered, w_prime),
        'fidelity_w_in': analysis_service.fidelity_pure(rec_in.rho, w_prime),
        'fidelity_w': analysis_service.fidelity_pure(rec_out.rho, w_prime),
        'fidelity_ghz_in': analysis_service.fidelity_pure(rec_in.rho, ideal),
        'fidelity_ghz_out': analysis_service.fidelity_pure(rec_out.rho, ideal),
        'converged': rec_in.converged and rec_out.converged,
    }
    for side, column in (('in', report.input), ('out', report.output)):
        for family, entry in column.items():
            summary[f'{family.lower()}_{side}'] = entry.value
            if entry.std_dev is not None:
                summary[f'{family.lower()}_{side}_std_dev'] = entry.std_dev

    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        serialization.write_state(source, os.path.join(config.out_dir, 'input_state.json'))
        serialization.write_json(serialization.filter_outcome_to_dict(outcome),
                                 os.path.join(config.out_dir, 'filtered.json'))
        serialization.write_counts(counts_in, os.path.join(config.out_dir, 'counts_in.csv'))
        serialization.write_counts(counts_out, os.path.join(config.out_dir, 'counts_out.csv'))
        serialization.write_json(serialization.reconstruction_to_dict(rec_in),
                                 os.path.join(config.out_dir, 'rho_in.json'))
        serialization.write_json(serialization.reconstruction_to_dict(rec_out),
                                 os.path.join(config.out_dir, 'rho_out.json'))
        analysis_service.export_plot_data(rec_out.rho, os.path.join(config.out_dir, 'plot_out.csv'), 'HV')
        serialization.write_json(summary, os.path.join(config.out_dir, 'report.json'))
        summary['out_dir'] = config.out_dir

    if not config.json_output:
        print(analysis_service.render_table(report), file=sys.stderr)
    if not summary['converged']:
        summary['exit_code'] = EXIT_NOT_CONVERGED
    return summary


COMMANDS = {
    'state': (StateConfig, cmd_state),
    'filter': (FilterConfig, cmd_filter),
    'tomo sim': (TomoSimConfig, cmd_tomo_sim),
    'tomo reconstruct': (TomoReconstructConfig, cmd_tomo_reconstruct),
    'analyze': (AnalyzeConfig, cmd_analyze),
    'pipeline': (PipelineConfig, cmd_pipeline),
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run the CLI"""
    configure_logging()
    parser = create_parser()
    args = parser.parse_args(argv)

    # If no command is provided, show help
    if not args.command:
        parser.print_help()
        return EXIT_VALIDATION
    name = args.command
    if name == 'tomo':
        if not args.tomo_command:
            parser.print_help()
            return EXIT_VALIDATION
        name = f'tomo {args.tomo_command}'

    config_cls, handler = COMMANDS[name]
    kwargs = _config_kwargs(args)
    kwargs['seed'] = resolve_seed(kwargs.get('seed'))

    try:
        config = config_cls(**kwargs)
        summary = handler(config)
    except ValidationError as e:
        messages = "; ".join(err['msg'] for err in e.errors())
        print(f"error: {messages}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as e:
        logger.error(f"{name} failed: {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except DataFileError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_IO
    except QuantumToolkitError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    exit_code = summary.pop('exit_code', EXIT_OK)
    summary = {'seed': config.seed, **summary}
    emit(summary, config.json_output)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
