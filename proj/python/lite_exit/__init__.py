"""Python bindings for the lite_exit C++ core."""

import json

from . import _core
from ._core import (
    LiteError,
    Model,
    ModelConfig,
    NumericError,
    decode,
    edit_distance,
    encode,
    final_logits,
    flops_per_token,
    gen_data,
    generate,
    init_model,
    load_checkpoint,
    parse_policy,
    similarity,
    train,
)

__version__ = _core.__version__


def alignment(model, dataset, max_new_tokens=64, threads=1):
    """Alignment report and confidence curve as dicts."""
    return json.loads(_core.alignment(model, dataset, max_new_tokens, threads))


def calibrate(model, dataset, target=0.95, max_new_tokens=64, threads=1):
    """Policy file text fitted on `dataset`."""
    return _core.calibrate(model, dataset, target, max_new_tokens, threads)


def evaluate(model, dataset, policy, max_new_tokens=64, threads=1):
    return json.loads(_core.evaluate(model, dataset, policy, max_new_tokens, threads))
