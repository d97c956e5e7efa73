"""Python access to the temsa core: TEMS construction, metrics, signed-rank
tests, model numerics and end-to-end experiment runs."""

from ._temsa import (
    TemsaError,
    bilstm_gradient_check,
    build_tems,
    clean_text,
    compare,
    config_defaults,
    encode_pad,
    encoder_block,
    evaluate_checkpoint,
    joint_label,
    load_manifest,
    load_record,
    make_desk_fixture,
    metrics,
    normalize_object_name,
    object_count_histogram,
    persist_record,
    prepare,
    run_experiment,
    self_attention,
    signed_rank_null_pmf,
    split_ids,
    tokenize,
    wilcoxon,
)

__all__ = [
    "TemsaError",
    "bilstm_gradient_check",
    "build_tems",
    "clean_text",
    "compare",
    "config_defaults",
    "encode_pad",
    "encoder_block",
    "evaluate_checkpoint",
    "joint_label",
    "load_manifest",
    "load_record",
    "make_desk_fixture",
    "metrics",
    "normalize_object_name",
    "object_count_histogram",
    "persist_record",
    "prepare",
    "run_experiment",
    "self_attention",
    "signed_rank_null_pmf",
    "split_ids",
    "tokenize",
    "wilcoxon",
]
