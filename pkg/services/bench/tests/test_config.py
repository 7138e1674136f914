"""Tests for suite configuration loading."""

from pathlib import Path

import pytest
from structqn_core.errors import ConfigError
from structqn_core.models.config import Variant

from bench.config import load_suite, parse_suite
from bench.profiles import Metric

SUITES_DIR = Path(__file__).parents[1] / "suites"


def _field_path(path) -> str | None:
    with pytest.raises(ConfigError) as exc:
        load_suite(path)
    return exc.value.field_path


class TestLoadSuite:
    """Test cases for load_suite."""

    def test_valid_suite(self, quadratic_suite):
        """Every section of a well-formed file is read."""
        config = load_suite(quadratic_suite)
        assert config.suite.name == "quadratics"
        assert config.metrics == [Metric.ITERATIONS, Metric.F_EVALS]
        assert [s.name for s in config.solvers] == ["minus", "lbfgs"]
        assert config.solvers[1].config.variant == Variant.LBFGS
        assert config.solvers[0].config.memory == 5
        problem = config.problems[0]
        assert problem.label == "structured_quadratic-n20-r2"
        assert problem.run_seeds() == [0, 1, 2, 3, 4]

    def test_missing_file(self, tmp_path):
        """A path that does not exist is a configuration error."""
        assert _field_path(tmp_path / "missing.toml") is None

    def test_invalid_toml(self, suite_file):
        """Unparseable TOML is a configuration error."""
        with pytest.raises(ConfigError):
            load_suite(suite_file("problems = [\n"))

    def test_unknown_top_level_key(self, suite_file, two_solvers):
        """Keys outside the schema are rejected by name."""
        path = suite_file(
            """
            bogus = 1

            [[problems]]
            generator = "structured_quartic"
            """
            + two_solvers
        )
        assert _field_path(path) == "bogus"

    def test_unknown_generator(self, suite_file, two_solvers):
        """Generators outside the registry point at the generator field."""
        path = suite_file(
            """
            [[problems]]
            generator = "rosenbrock"
            """
            + two_solvers
        )
        assert _field_path(path) == "problems.0.generator"

    def test_invalid_memory(self, suite_file):
        """Solver fields are validated with their index in the path."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quartic"

            [[solvers]]
            name = "bad"
            memory = 0
            """
        )
        assert _field_path(path) == "solvers.0.memory"

    def test_invalid_wolfe_parameter(self, suite_file):
        """Nested line-search tables keep their position in the path."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quartic"

            [[solvers]]
            name = "tight"

            [solvers.wolfe]
            c1 = 2.0
            """
        )
        assert _field_path(path) == "solvers.0.wolfe.c1"

    def test_solver_needs_name(self, suite_file):
        """Every solver table carries a name."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quartic"

            [[solvers]]
            variant = "plus"
            """
        )
        assert _field_path(path) == "solvers.0.name"

    def test_duplicate_solver_names(self, suite_file):
        """Solver names identify result columns and must be unique."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quartic"

            [[solvers]]
            name = "same"

            [[solvers]]
            name = "same"
            variant = "plus"
            """
        )
        assert _field_path(path) == "solvers"

    def test_seed_in_params(self, suite_file, two_solvers):
        """Seeded generators take their seeds from the seeds list only."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quadratic"
            params = { n = 10, seed = 3 }
            """
            + two_solvers
        )
        assert _field_path(path) == "problems.0.params.seed"

    def test_unexpected_parameter(self, suite_file, two_solvers):
        """Parameters the generator does not accept are reported on params."""
        path = suite_file(
            """
            [[problems]]
            generator = "structured_quartic"
            params = { n = 10, rank = 2 }
            """
            + two_solvers
        )
        assert _field_path(path) == "problems.0.params"


class TestDataPaths:
    """Test cases for data files referenced from a suite."""

    def test_relative_path_resolved_against_config(self, suite_file, two_solvers, tmp_path):
        """A relative path is looked up next to the suite file."""
        data = tmp_path / "data"
        data.mkdir()
        (data / "small.libsvm").write_text("1 1:1\n-1 2:1\n")
        path = suite_file(
            """
            [[problems]]
            generator = "logistic"
            params = { path = "data/small.libsvm", lam = 0.01 }
            """
            + two_solvers
        )
        problem = load_suite(path).problems[0]
        assert problem.params["path"] == str(data / "small.libsvm")
        assert problem.label == "logistic-lam0.01"
        assert problem.run_seeds() == [None]

    def test_missing_data_file(self, suite_file, two_solvers):
        """A data file that does not exist is reported on its parameter."""
        path = suite_file(
            """
            [[problems]]
            generator = "logistic"
            params = { path = "nowhere.libsvm" }
            """
            + two_solvers
        )
        assert _field_path(path) == "problems.0.params.path"


class TestParseSuite:
    """Test cases for parse_suite on in-memory documents."""

    def test_labels_and_unseeded_generators(self):
        """Names default to generator plus parameters; Poisson has no seeds."""
        config = parse_suite(
            {
                "problems": [
                    {"generator": "structured_quartic", "params": {"n": 10}},
                    {"name": "mesh-1", "generator": "poisson_control", "params": {"j": 1}},
                ],
                "solvers": [{"name": "plus", "variant": "plus"}],
            }
        )
        quartic, poisson = config.problems
        assert quartic.label == "structured_quartic-n10"
        assert quartic.seeded
        assert poisson.label == "mesh-1"
        assert poisson.run_seeds() == [None]
        assert config.metrics == [Metric.ITERATIONS]

    def test_input_not_modified(self, tmp_path):
        """Resolving paths works on a copy of the document."""
        (tmp_path / "a.libsvm").write_text("1 1:1\n")
        params = {"path": "a.libsvm"}
        parse_suite(
            {
                "problems": [{"generator": "logistic", "params": params}],
                "solvers": [{"name": "minus"}],
            },
            tmp_path,
        )
        assert params == {"path": "a.libsvm"}

    def test_problems_required(self):
        """A suite without problems is invalid."""
        with pytest.raises(ConfigError) as exc:
            parse_suite({"problems": [], "solvers": [{"name": "minus"}]})
        assert exc.value.field_path == "problems"


class TestBundledSuites:
    """Test cases for the suite files shipped with the harness."""

    @pytest.mark.parametrize("path", sorted(SUITES_DIR.glob("*.toml")), ids=lambda p: p.stem)
    def test_bundled_suite_is_valid(self, path):
        """Every bundled suite validates and compares at least two solvers."""
        config = load_suite(path)
        assert len(config.solvers) >= 2
        assert config.suite.output.startswith("results/")
