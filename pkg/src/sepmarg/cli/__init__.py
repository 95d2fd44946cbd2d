#
# Copyright (c) 2015-2024 Thierry Florac <tflorac AT ulthar.net>
# All Rights Reserved.
#
# This software is subject to the provisions of the Zope Public License,
# Version 2.1 (ZPL).  A copy of the ZPL should accompany this distribution.
# THIS SOFTWARE IS PROVIDED "AS IS" AND ANY AND ALL EXPRESS OR IMPLIED
# WARRANTIES ARE DISCLAIMED, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF TITLE, MERCHANTABILITY, AGAINST INFRINGEMENT, AND FITNESS
# FOR A PARTICULAR PURPOSE.
#

"""SepMarg.cli module

This module provides the `sepmarg` command line interface.

Commands are:

- check: decide an ensemble file at a given level; exit code 0 means
  feasible, 3 infeasible (a witness file is written next to the input
  file), 4 inconclusive, 1 parse error and 2 solver breakdown;
- sep-energy: separable energy lower bound of a Hamiltonian file;
- beta-scan: critical inverse temperature scan of a Hamiltonian file;
- bounds: convergence radius table;
- glue: global distribution extending clique marginals;
- complete: chordal completion of a scenario file.
"""

import argparse
import json
import logging
import sys

from zope.schema import ValidationError

from sepmarg.bounds import epsilon, set_bound
from sepmarg.classical import glue_chordal
from sepmarg.cli.files import completion_to_dict, dump_json, ensemble_from_dict, \
    glued_to_dict, hamiltonian_from_dict, load_json, marginals_from_dict, \
    scenario_from_dict, site_label, witness_to_dict
from sepmarg.cli.interfaces import EXIT_BREAKDOWN, EXIT_FEASIBLE, EXIT_INCONCLUSIVE, \
    EXIT_PARSE_ERROR, FileFormatError, SCENARIO_KEY, VERDICT_EXIT_CODES, WITNESS_SUFFIX
from sepmarg.hierarchy import HierarchyOptions, build_hierarchy, check_instance, \
    extract_witness
from sepmarg.interfaces import COMPAT_TOL, HIERARCHIES, INFEASIBLE, NoConvergence, \
    NumericalBreakdown, SCHEMA_VERSION, SepMargError
from sepmarg.models import ScanOptions, critical_beta_scan, separable_energy
from sepmarg.scenarios import MarginalScenario, chordal_complete, line_scenario, \
    ring_scenario, star_scenario, ti1d_scenario
from sepmarg.sdp import SolverOptions
from sepmarg.sdpa import dump_sdpa


__docformat__ = 'restructuredtext'


LOGGER = logging.getLogger('SepMarg (cli)')

SCENARIO_CHOICES = ('file', 'star', 'line', 'ring', 'ti1d', 'pairs')


def _emit(args, text, data):
    if getattr(args, 'json', False):
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _solver_options(args):
    return SolverOptions(tol=args.tol, max_iter=args.max_iter)


def parse_cut(text):
    """Partial transposition cut from its 'site:count,site:count' form

        >>> from sepmarg.cli import parse_cut
        >>> parse_cut('1:1, 2:1')
        {1: 1, 2: 1}
        >>> parse_cut('1')
        Traceback (most recent call last):
        ...
        argparse.ArgumentTypeError: Invalid cut '1', expected site:count pairs
    """
    cut = {}
    try:
        for item in text.split(','):
            site, count = item.split(':')
            cut[site_label(site.strip())] = int(count)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Invalid cut {text!r}, expected site:count pairs") \
            from exc
    return cut


#
# Commands
#

def cmd_check(args):
    """Decide an ensemble file"""
    data = load_json(args.file)
    ensemble, private_sites = ensemble_from_dict(data, args.compat_tol, args.file)
    if not args.private:
        private_sites = {}
    options = HierarchyOptions(level=args.level, hierarchy=args.hierarchy,
                               compat_tol=args.compat_tol,
                               extra_cuts=tuple(args.extra_cut or ()))
    inst = build_hierarchy(ensemble, options, private_sites)
    if args.dump_sdp:
        dump_sdpa(inst, args.dump_sdp)
    verdict, sol = check_instance(inst, _solver_options(args))
    result = {
        'version': SCHEMA_VERSION,
        'verdict': verdict,
        'status': sol.status,
        'hierarchy': options.hierarchy,
        'level': options.level,
        'cuts': {label: [list(cut) for cut in cuts]
                 for label, cuts in inst.metadata['cuts'].items()},
        'iterations': sol.iterations
    }
    if verdict == INFEASIBLE:
        witness = extract_witness(inst, sol, ensemble)
        path = args.file + WITNESS_SUFFIX
        dump_json(witness_to_dict(witness), path)
        result['witness'] = path
        result['violation'] = witness.violation
    _emit(args, verdict.upper(), result)
    return VERDICT_EXIT_CODES[verdict]


def _energy_scenario(args, h):
    kind = args.scenario
    if kind == 'file':
        data = load_json(args.scenario_file) if args.scenario_file else None
        if data is None or SCENARIO_KEY not in data:
            raise FileFormatError("A scenario file is required with --scenario file")
        return scenario_from_dict(data, args.scenario_file)
    if kind == 'star':
        return star_scenario(h.n)
    if kind == 'line':
        return line_scenario(h.n)
    if kind == 'ring':
        return ring_scenario(h.n)
    if kind == 'ti1d':
        return ti1d_scenario(args.window or h.n)
    return MarginalScenario({site: 2 for site in range(1, h.n + 1)},
                            [tuple(sorted(string)) for _coefficient, string in h.terms if string])


def cmd_sep_energy(args):
    """Print a separable energy lower bound"""
    h = hamiltonian_from_dict(load_json(args.file), args.file)
    scenario = _energy_scenario(args, h)
    private_sites = None
    if args.private:
        private_sites = {members: members[-1] for members in scenario.sets}
    value, info = separable_energy(h, scenario, args.level, args.hierarchy, private_sites,
                                   _solver_options(args))
    info['version'] = SCHEMA_VERSION
    info['value'] = value
    _emit(args, f'{value:.10f}', info)
    return EXIT_FEASIBLE


def cmd_beta_scan(args):
    """Print verdicts along a grid of inverse temperatures"""
    h = hamiltonian_from_dict(load_json(args.file), args.file)
    scenario = _energy_scenario(args, h)
    options = ScanOptions(beta_min=args.range[0], beta_max=args.range[1], step=args.step,
                          resolution=args.resolution, max_workers=args.workers)
    result = critical_beta_scan(h, scenario, args.level, options, args.hierarchy,
                                solver_options=_solver_options(args))
    lines = [f'{beta:.6f} {verdict}' for beta, verdict in result.table()]
    lines += [f'# transition {low:.6f} {high:.6f} {below} {above}'
              for low, high, below, above in result.transitions]
    _emit(args, '\n'.join(lines), {
        'version': SCHEMA_VERSION,
        'level': result.level,
        'betas': result.betas,
        'verdicts': result.verdicts,
        'transitions': [list(transition) for transition in result.transitions]
    })
    return EXIT_FEASIBLE


def cmd_bounds(args):
    """Print convergence radius table"""
    rows = []
    for level in args.level:
        rows.append({
            'level': level,
            'epsilon': {str(d): epsilon(level, d) for d in sorted(set(args.dims))},
            'radius': set_bound(args.dims, level)
        })
    lines = ['level ' + ' '.join(f'eps(d={d})' for d in sorted(set(args.dims))) + ' radius']
    for row in rows:
        lines.append(f"{row['level']} " +
                     ' '.join(f'{value:.12f}' for value in row['epsilon'].values()) +
                     f" {row['radius']:.12f}")
    _emit(args, '\n'.join(lines), {'version': SCHEMA_VERSION, 'dims': args.dims,
                                   'bounds': rows})
    return EXIT_FEASIBLE


def cmd_glue(args):
    """Write the glued global distribution"""
    marginals = marginals_from_dict(load_json(args.file), args.file)
    result = glued_to_dict(glue_chordal(marginals))
    if args.output:
        dump_json(result, args.output)
    else:
        print(json.dumps(result, indent=2))
    return EXIT_FEASIBLE


def cmd_complete(args):
    """Print the chordal completion of a scenario"""
    scenario = scenario_from_dict(load_json(args.file), args.file)
    graph, clique_map = chordal_complete(scenario)
    print(json.dumps(completion_to_dict(scenario, graph, clique_map), indent=2))
    return EXIT_FEASIBLE


#
# Parser
#

def _add_solver_arguments(parser):
    parser.add_argument('--tol', type=float, default=None, help="solver tolerance")
    parser.add_argument('--max-iter', type=int, default=None, help="solver iterations cap")
    parser.add_argument('--json', action='store_true', help="machine readable output")


def _add_hierarchy_arguments(parser, default=None):
    parser.add_argument('--level', '-L', type=int, default=1, help="hierarchy level")
    parser.add_argument('--hierarchy', choices=sorted(HIERARCHIES), default=default,
                        help="relaxation hierarchy")
    parser.add_argument('--private', action='store_true',
                        help="don't extend private sites (simplified hierarchy)")


def _add_scenario_arguments(parser):
    parser.add_argument('--scenario', choices=SCENARIO_CHOICES, default='pairs',
                        help="scenario of the relaxation; 'pairs' uses the terms supports")
    parser.add_argument('--scenario-file', help="scenario file, with --scenario file")
    parser.add_argument('--window', type=int, default=None,
                        help="window size of translation invariant chains")


def get_parser():
    """Command line parser"""
    parser = argparse.ArgumentParser(prog='sepmarg',
                                     description="Separability of quantum marginals")
    parser.add_argument('--verbose', '-v', action='count', default=0)
    parser.add_argument('--quiet', '-q', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    check = commands.add_parser('check', help=cmd_check.__doc__)
    check.add_argument('file')
    _add_hierarchy_arguments(check, default='H')
    check.add_argument('--compat-tol', type=float, default=COMPAT_TOL,
                       help="local compatibility tolerance")
    check.add_argument('--extra-cut', type=parse_cut, action='append', metavar='SITE:K,...',
                       help="additional partial transposition, repeatable")
    check.add_argument('--dump-sdp', metavar='PATH', help="write SDPA instance")
    _add_solver_arguments(check)
    check.set_defaults(handler=cmd_check)

    energy = commands.add_parser('sep-energy', help=cmd_sep_energy.__doc__)
    energy.add_argument('file')
    _add_hierarchy_arguments(energy)
    _add_scenario_arguments(energy)
    _add_solver_arguments(energy)
    energy.set_defaults(handler=cmd_sep_energy)

    scan = commands.add_parser('beta-scan', help=cmd_beta_scan.__doc__)
    scan.add_argument('file')
    _add_hierarchy_arguments(scan)
    _add_scenario_arguments(scan)
    scan.add_argument('--range', type=float, nargs=2, default=(0.0, 2.0),
                      metavar=('MIN', 'MAX'))
    scan.add_argument('--step', type=float, default=0.05)
    scan.add_argument('--resolution', type=float, default=None)
    scan.add_argument('--workers', type=int, default=1)
    _add_solver_arguments(scan)
    scan.set_defaults(handler=cmd_beta_scan)

    bounds = commands.add_parser('bounds', help=cmd_bounds.__doc__)
    bounds.add_argument('--level', '-L', type=int, nargs='+', default=[1, 2])
    bounds.add_argument('--dims', type=int, nargs='+', default=[2, 2])
    bounds.add_argument('--json', action='store_true')
    bounds.set_defaults(handler=cmd_bounds)

    glue = commands.add_parser('glue', help=cmd_glue.__doc__)
    glue.add_argument('file')
    glue.add_argument('--output', '-o')
    glue.set_defaults(handler=cmd_glue)

    complete = commands.add_parser('complete', help=cmd_complete.__doc__)
    complete.add_argument('file')
    complete.set_defaults(handler=cmd_complete)
    return parser


def main(argv=None):
    """Command line entry point"""
    args = get_parser().parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    if args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=max(level, logging.DEBUG),
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.handler(args)
    except NumericalBreakdown as exc:
        LOGGER.error("Solver breakdown: %s", exc)
        return EXIT_BREAKDOWN
    except NoConvergence as exc:
        LOGGER.error("No convergence: %s", exc)
        return EXIT_INCONCLUSIVE
    except (SepMargError, ValidationError) as exc:
        LOGGER.error("%s", exc)
        print(f'ERROR: {exc!r}', file=sys.stderr)
        return EXIT_PARSE_ERROR


if __name__ == '__main__':
    sys.exit(main())
