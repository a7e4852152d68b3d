from .model import (PE_VARIANTS, EncoderConfig, MissingClassEncoder, TokenBatch,
                    attention_of_missing_token, build_classifier, build_tokens,
                    encode_positions, infer_class)
from .train import TrainSchedule, learning_rate_at, train_inference_model

__all__ = [
    "PE_VARIANTS", "EncoderConfig", "MissingClassEncoder", "TokenBatch",
    "attention_of_missing_token", "build_classifier", "build_tokens",
    "encode_positions", "infer_class",
    "TrainSchedule", "learning_rate_at", "train_inference_model",
]
