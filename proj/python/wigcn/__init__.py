"""Python bindings for the wigcn recommender core."""

from ._core import (
    DataError,
    Dataset,
    GraphInputs,
    LayerParams,
    ModelParams,
    NumericalError,
    TrainConfig,
    UsageError,
    Variant,
    build_graph_inputs,
    compute_gradients,
    evaluate,
    forward,
    init_params,
    k_core_filter,
    load_checkpoint,
    load_interactions,
    ndcg_at_k,
    parse_variant,
    run_cli,
    save_checkpoint,
    topk_ranking,
    train,
    train_test_split,
)


def train_config(**fields):
    """TrainConfig with the given fields set; strings are accepted for `variant`."""
    config = TrainConfig()
    for name, value in fields.items():
        if not hasattr(config, name):
            raise TypeError(f"unknown TrainConfig field {name!r}")
        if name == "variant" and isinstance(value, str):
            value = parse_variant(value)
        setattr(config, name, value)
    config.validate()
    return config


__all__ = [name for name in dir() if not name.startswith("_")]
