import pandas as pd
import pytest
from click.testing import CliRunner

from app.cli import cli
from app.knowledge_base import KnowledgeBase
from tests.conftest import SCENARIO_DIR

ISOLATED = str(SCENARIO_DIR / 'isolated_apartment.yaml')
HIDDEN = str(SCENARIO_DIR / 'hidden_node.yaml')


@pytest.fixture
def runner():
    return CliRunner()


class TestValidate:
    def test_good_file(self, runner):
        result = runner.invoke(cli, ['validate', ISOLATED])
        assert result.exit_code == 0
        assert 'OK: ' in result.output

    def test_bad_file(self, runner, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("name: bad\nfloor_plan:\n  width_m: -3\n  height_m: 8\n"
                        "ap:\n  location: [1, 1]\nusers: []\n")
        result = runner.invoke(cli, ['validate', str(path)])
        assert result.exit_code == 1
        assert 'line 3:' in result.output


class TestRun:
    def test_writes_campaign_files(self, runner, tmp_path):
        out = tmp_path / 'out'
        result = runner.invoke(cli, ['run', '--scenario', ISOLATED, '--drops', '2', '--algo', 'ai-cbr',
                                     '--algo', 'ap-only', '--out', str(out)])
        assert result.exit_code == 0, result.output
        for name in ('summary.csv', 'drops.csv', 'convergence_cdf.csv'):
            assert (out / name).exists()
        assert len(pd.read_csv(out / 'summary.csv')) == 2
        assert 'ap-only' in result.output

    def test_unlimited_budget_and_save_kb(self, runner, tmp_path):
        result = runner.invoke(cli, ['run', '--scenario', ISOLATED, '--drops', '1', '--max-repositions',
                                     'unlimited', '--max-requests', '4', '--save-kb', '--out', str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert (tmp_path / 'kb.txt').exists()

    def test_carry_knowledge(self, runner, tmp_path):
        result = runner.invoke(cli, ['run', '--scenario', ISOLATED, '--drops', '3', '--carry-knowledge', '--save-kb',
                                     '--out', str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert len(KnowledgeBase.load(tmp_path / 'kb.txt')) == 3

    def test_bad_budget(self, runner, tmp_path):
        result = runner.invoke(cli, ['run', '--scenario', ISOLATED, '--max-repositions', 'abc',
                                     '--out', str(tmp_path)])
        assert result.exit_code == 2
        assert 'unlimited' in result.output

    def test_unknown_algorithm(self, runner, tmp_path):
        result = runner.invoke(cli, ['run', '--scenario', ISOLATED, '--algo', 'greedy', '--out', str(tmp_path)])
        assert result.exit_code == 2

    def test_invalid_scenario_exits_with_one(self, runner, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("name: bad\nfloor_plan: {width_m: 10, height_m: 10}\n")
        result = runner.invoke(cli, ['run', '--scenario', str(path), '--out', str(tmp_path / 'out')])
        assert result.exit_code == 1
        assert 'Error:' in result.output


class TestDumpField:
    def test_hidden_node(self, runner, tmp_path):
        result = runner.invoke(cli, ['dump-field', '--scenario', HIDDEN, '--out', str(tmp_path)])
        assert result.exit_code == 0, result.output
        field = pd.read_csv(tmp_path / 'field_ext-1_t00.csv')
        learned = pd.read_csv(tmp_path / 'map_ext-1_t00.csv')
        assert len(field) == len(learned) == 121
        assert list(field.columns) == ['x', 'y', 'F_R', 'F_E', 'product']
        assert (field['product'] - field['F_R'] * field['F_E']).abs().max() < 1e-2
