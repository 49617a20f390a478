"""Tests for compression plan parsing."""

import pytest

from tt_automl.compress.plan import (
    Plan,
    PlanFormatError,
    PruneAction,
    QuantAction,
    TTMAction,
    Tucker2Action,
    action_from_dict,
    plan_from_json,
)


def test_parse_plan(resource_dir) -> None:  # type: ignore[no-untyped-def]
    text = resource_dir.joinpath("plans", "mixed.json").read_text(encoding="utf-8")
    plan = plan_from_json(text)
    assert plan.layers == {
        "conv2": [Tucker2Action(target_ratio=3.0), PruneAction(0.25), QuantAction(8)],
        "fc": [QuantAction(4)],
    }
    assert plan.default == [PruneAction(0.5)]
    assert not plan.is_empty()


def test_ttm_action() -> None:
    action = action_from_dict(
        {"op": "ttm", "row_factors": [4, 4], "col_factors": [2, 3], "max_rank": 3}
    )
    assert action == TTMAction((4, 4), (2, 3), 0.0, 3)


def test_descriptions() -> None:
    assert Tucker2Action(rank=6).describe() == "tucker2(rank 6)"
    assert Tucker2Action(target_ratio=3.0).describe() == "tucker2(auto 3x)"
    assert PruneAction(0.5).describe() == "prune(0.5)"
    assert QuantAction(8).describe() == "quant(8 bit)"


def test_empty_plan() -> None:
    assert Plan().is_empty()
    assert plan_from_json('{"layers": {"fc": []}}').is_empty()


@pytest.mark.parametrize(
    "text",
    [
        "[1, 2",
        "[]",
        '{"layers": []}',
        '{"default": {"op": "prune"}}',
        '{"default": [{"op": "distill"}]}',
        '{"default": [{"op": "prune", "sparsity": 1.5}]}',
        '{"default": [{"op": "prune", "sparsity": "half"}]}',
        '{"default": [{"op": "quant", "bits": 5}]}',
        '{"default": [{"op": "quant", "bits": true}]}',
        '{"default": [{"op": "tucker2", "rank": 0}]}',
        '{"default": [{"op": "tucker2", "rank": "auto", "target_ratio": 0.5}]}',
        '{"default": [{"op": "ttm", "row_factors": [], "col_factors": [2]}]}',
        '{"layers": {"conv2": [{"op": "tucker2", "rank": 2}, {"op": "tucker2", "rank": 3}]}}',
    ],
)
def test_malformed_plans(text: str) -> None:
    with pytest.raises(PlanFormatError):
        plan_from_json(text)
