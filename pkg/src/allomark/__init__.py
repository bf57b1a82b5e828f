"""Multi-bit language-model watermarking by position allocation.

Each generated token is pseudo-randomly allocated to one digit position of
the payload, and the digit value selects which colorlist of a seeded
vocabulary partition gets the logit bias.  Decoding counts tokens per
(position, colorlist) and reads the message off by majority vote, with a
binomial z-test for zero-bit detection and confidence-ranked list decoding
on top.
"""

from .attacks import copy_paste, token_edit
from .config import Scheme, WatermarkConfig, effective_length, secret_key_from_env
from .decoder import (
    CandidateList,
    DecodeResult,
    count_colorlists,
    decode,
    list_decode,
    position_confidence,
    predict_message,
)
from .detector import (
    RocReport,
    SeparabilityResult,
    detect,
    detect_from_decode,
    detection_score,
    roc_metrics,
    separability_sim,
)
from .encoder import (
    BiasStep,
    CapacityExceededError,
    bias_step,
    block_alloc_bias,
    cyclic_shift_bias,
    ems_sample,
    feedback_bias,
    greenlist_bias,
    message_hash_bias,
    position_alloc_bias,
)
from .harness import (
    AttackSpec,
    ExperimentConfig,
    ExperimentReport,
    latency_profile,
    load_experiment_config,
    packet_error,
    run_experiment,
)
from .levin import exact_max_cell_cdf, levin_max_cell_cdf
from .messages import Message, MessageOverflowError, bit_accuracy, from_radix, to_radix
from .prf import color_of, hash_context, permute_vocab, sample_position, secret_vector
from .simlm import SyntheticLM, SyntheticLMConfig, default_prompt, generate
from .types import CountMatrix, DetectionResult, TokenStream

__version__ = "0.1.0"

__all__ = [
    "AttackSpec",
    "BiasStep",
    "CandidateList",
    "CapacityExceededError",
    "CountMatrix",
    "DecodeResult",
    "DetectionResult",
    "ExperimentConfig",
    "ExperimentReport",
    "Message",
    "MessageOverflowError",
    "RocReport",
    "Scheme",
    "SeparabilityResult",
    "SyntheticLM",
    "SyntheticLMConfig",
    "TokenStream",
    "WatermarkConfig",
    "bias_step",
    "bit_accuracy",
    "block_alloc_bias",
    "color_of",
    "copy_paste",
    "count_colorlists",
    "cyclic_shift_bias",
    "decode",
    "default_prompt",
    "detect",
    "detect_from_decode",
    "detection_score",
    "effective_length",
    "ems_sample",
    "exact_max_cell_cdf",
    "feedback_bias",
    "from_radix",
    "generate",
    "greenlist_bias",
    "hash_context",
    "latency_profile",
    "levin_max_cell_cdf",
    "list_decode",
    "load_experiment_config",
    "message_hash_bias",
    "packet_error",
    "permute_vocab",
    "position_alloc_bias",
    "position_confidence",
    "predict_message",
    "roc_metrics",
    "run_experiment",
    "sample_position",
    "secret_key_from_env",
    "secret_vector",
    "separability_sim",
    "to_radix",
    "token_edit",
]
