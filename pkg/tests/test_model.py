import json

import numpy as np
import pytest

from simam.errors import ConfigError, DomainError, IngestError, SchemaError, SizeError
from simam.model import (EarlyStop, FittedModel, MonotoneStepFunction, NodeConfig,
                         eval_step_function, largest_eigenvalue, validate_series)


def test_validate_series_examples():
    X = validate_series(np.arange(6.0).reshape(3, 2))
    assert (X.T, X.M) == (2, 2)
    np.testing.assert_array_equal(X.lagged, [[0, 1], [2, 3]])
    np.testing.assert_array_equal(X.target(1), [3, 5])

    raw = np.ones((3, 2))
    raw[1, 0] = np.nan
    with pytest.raises(IngestError) as info:
        validate_series(raw)
    assert (info.value.row, info.value.col) == (1, 0)

    with pytest.raises(SizeError):
        validate_series(np.ones((2, 5)))
    assert validate_series(np.ones((2, 5)), min_transitions=1).T == 1


def test_series_is_read_only():
    X = validate_series(np.ones((4, 2)))
    with pytest.raises(ValueError):
        X.data[0, 0] = 2.0


def test_step_function_examples():
    f = MonotoneStepFunction([0.0, 1.0], [2.0, 5.0])
    assert eval_step_function(f, -10) == 2
    assert eval_step_function(f, 0.5) == 5
    assert eval_step_function(f, 1) == 5
    assert eval_step_function(f, 10) == 5
    # left continuity: the breakpoint itself takes the left value
    assert eval_step_function(f, 0.0) == 2
    with pytest.raises(DomainError):
        eval_step_function(MonotoneStepFunction([], []), 0.0)


def test_step_function_validation():
    with pytest.raises(DomainError):
        MonotoneStepFunction([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        MonotoneStepFunction([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        MonotoneStepFunction([0.0], [1.0, 2.0])


def test_step_function_from_fit_merges_duplicates():
    f = MonotoneStepFunction.from_fit([0.0, 0.0, 1.0, 2.0], [1.0, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(f.breakpoints, [0, 1, 2])
    np.testing.assert_array_equal(f.values, [1, 2, 3])


def test_node_config_invariants():
    with pytest.raises(ConfigError):
        NodeConfig(max_iters=0)
    with pytest.raises(ConfigError):
        NodeConfig(step_size=0.0)
    with pytest.raises(ConfigError):
        NodeConfig(sparsity=0)
    with pytest.raises(ConfigError):
        NodeConfig(init="given")
    with pytest.raises(ConfigError):
        NodeConfig(sparsity=5).check(3)
    cfg = NodeConfig(sparsity=2, early_stop=EarlyStop(0.2, 5))
    assert NodeConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_largest_eigenvalue_matches_eigvalsh():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 6))
    assert largest_eigenvalue(X) == pytest.approx(np.linalg.eigvalsh(X.T @ X / 200)[-1], rel=1e-6)


def _tiny_model():
    from simam.estimator import fit_network
    rng = np.random.default_rng(1)
    X = validate_series(rng.standard_normal((30, 3)))
    return fit_network(X, NodeConfig(sparsity=2, max_iters=5))


def test_model_json_round_trip():
    m = _tiny_model()
    text = m.to_json()
    back = FittedModel.from_json(text)
    assert back.to_json() == text
    np.testing.assert_array_equal(back.network, m.network)


def test_model_schema_errors():
    d = json.loads(_tiny_model().to_json())
    bad = dict(d, extra=1)
    with pytest.raises(SchemaError):
        FittedModel.from_dict(bad)
    bad = dict(d)
    bad.pop("network")
    with pytest.raises(SchemaError):
        FittedModel.from_dict(bad)
    bad = dict(d, schema_version=99)
    with pytest.raises(SchemaError):
        FittedModel.from_dict(bad)
    bad = dict(d, config_digest="0" * 64)
    with pytest.raises(SchemaError):
        FittedModel.from_dict(bad)
