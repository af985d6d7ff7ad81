"""
Command-line interface
run / dump-field / validate
"""

import functools
import logging
import sys
from dataclasses import replace

import click

from app.campaign import drop_seeds, prepare_drop, run_campaign
from app.deployment_service import DeploymentService
from app.exceptions import ScenarioParseError, SelfDeploymentError
from app.models.episode import ALGORITHMS
from app.scenario_loader import UNLIMITED, load_scenario
from app.storage import ResultStore
from config.logging_config import configure_logging
from config.sim_config import SimConfig

logger = logging.getLogger(__name__)


class RepositionBudget(click.ParamType):
    """A non-negative integer or the word 'unlimited'"""

    name = 'budget'

    def convert(self, value, param, ctx):
        if value is None or isinstance(value, int):
            return value
        if str(value).lower() == UNLIMITED:
            return UNLIMITED
        try:
            budget = int(value)
        except ValueError:
            self.fail(f"{value!r} is neither an integer nor '{UNLIMITED}'", param, ctx)
        if budget < 0:
            self.fail("budget must be >= 0", param, ctx)
        return budget


def _handle_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SelfDeploymentError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)
        except Exception as e:
            logger.error(f"Unexpected error: {e}")
            raise
    return wrapper


def _apply_overrides(scenario, max_repositions=None, max_requests=None):
    if max_repositions is not None:
        scenario = replace(scenario, max_repositions=None if max_repositions == UNLIMITED else max_repositions)
    if max_requests is not None:
        scenario = replace(scenario, max_requests=max_requests)
    return scenario


@click.group()
@click.option('--log-level', default=SimConfig.LOG_LEVEL, show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
def cli(log_level):
    """Indoor Wi-Fi extender self-deployment simulator"""
    configure_logging(log_level)


@cli.command()
@click.option('--scenario', 'scenario_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Scenario YAML file')
@click.option('--algo', 'algorithms', multiple=True, type=click.Choice(ALGORITHMS), default=('ai-cbr',),
              show_default=True, help='Algorithm to run; repeat for several')
@click.option('--drops', type=click.IntRange(min=1), help='Number of drops (default: from the scenario)')
@click.option('--seed', type=click.IntRange(min=0), help='Master seed (default: from the scenario)')
@click.option('--max-repositions', type=RepositionBudget(), help="Reposition budget N or 'unlimited'")
@click.option('--max-requests', type=click.IntRange(min=1), help='Request horizon per episode')
@click.option('--workers', type=click.IntRange(min=1), default=SimConfig.CAMPAIGN_WORKERS, show_default=True)
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--save-kb', is_flag=True, help='Write the ai-cbr knowledge base(s)')
@click.option('--carry-knowledge/--fresh-knowledge', default=None,
              help="Hand each drop's knowledge bases to the next (default: from the scenario)")
@_handle_errors
def run(scenario_path, algorithms, drops, seed, max_repositions, max_requests, workers, out_dir, save_kb,
        carry_knowledge):
    """Run a campaign and write summary.csv, drops.csv and convergence_cdf.csv"""
    scenario = _apply_overrides(load_scenario(scenario_path), max_repositions, max_requests)
    result = run_campaign(scenario, list(dict.fromkeys(algorithms)), drops=drops, seed=seed,
                          workers=workers, out_dir=out_dir, save_kb=save_kb,
                          carry_knowledge=carry_knowledge)
    for algorithm, report in result.reports.items():
        click.echo(f"{algorithm:>12}: avg {report.avg_throughput:7.1f} Mbps  jain {report.jain_index:.3f}  "
                   f"outage {report.outage_fraction:.3f}  repositions {report.mean_repositions:.2f}")
    for path in result.paths:
        click.echo(f"wrote {path}")


@cli.command('dump-field')
@click.option('--scenario', 'scenario_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--drop', type=click.IntRange(min=0), default=0, show_default=True,
              help='Drop whose users and seed are used')
@click.option('--seed', type=click.IntRange(min=0), help='Master seed (default: from the scenario)')
@click.option('--max-repositions', type=RepositionBudget())
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False))
@_handle_errors
def dump_field(scenario_path, drop, seed, max_repositions, out_dir):
    """Write the fitness field and learned map of every optimization request of one ai-cbr episode"""
    scenario = _apply_overrides(load_scenario(scenario_path), max_repositions)
    seed = scenario.seed if seed is None else seed
    drop_scenario, rng = prepare_drop(scenario, drop_seeds(seed, drop + 1)[drop])
    store = ResultStore(out_dir)
    written = []

    def observer(request_index, node_id, field, learned):
        written.append(store.write_fitness_field(field, request_index, node_id))
        written.append(store.write_learned_map(learned, request_index, node_id))

    log = DeploymentService().run_episode(drop_scenario, 'ai-cbr', drop, rng, observer=observer)
    click.echo(f"episode {log.status}: {log.repositions} reposition(s), "
               f"fitness {log.final.overall_fitness:.3f}; wrote {len(written)} file(s) to {out_dir}")


@cli.command()
@click.argument('scenario_path', type=click.Path(dir_okay=False))
def validate(scenario_path):
    """Check a scenario file and report every problem with its line"""
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioParseError as e:
        for problem in e.problems:
            click.echo(f"{e.path}: {problem}", err=True)
        sys.exit(1)
    click.echo(f"OK: {scenario}")
