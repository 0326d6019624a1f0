"""Few-shot contrastive encoding and replay of velocity profiles.

Pipeline: segment a profile into sliding windows, smooth them, train a
Siamese GRU encoder on consecutive-vs-distant window pairs, store the
embeddings per context key, and decode them back into a stitched profile
when a matching context triggers replay.
"""

from .decoder import DecoderHyper, DecoderParams, decode, init_decoder, train_decoder
from .encoder import (
    EncoderHyper,
    GruParams,
    TrainedEncoder,
    batch_loss_and_grads,
    contrastive_loss,
    gru_encode,
    init_params,
    train_encoder,
    zero_grads,
)
from .project import project_2d
from .store import (
    Embedding,
    EmbeddingStore,
    StoreMeta,
    load_model,
    replay,
    save_model,
    store_from_dict,
)
from .windows import PairLabel, Window, WindowPair, gaussian_smooth, make_pairs, segment

__all__ = [
    "DecoderHyper", "DecoderParams", "decode", "init_decoder", "train_decoder",
    "EncoderHyper", "GruParams", "TrainedEncoder", "batch_loss_and_grads",
    "contrastive_loss", "gru_encode", "init_params", "train_encoder", "zero_grads",
    "project_2d",
    "Embedding", "EmbeddingStore", "StoreMeta", "load_model", "replay",
    "save_model", "store_from_dict",
    "PairLabel", "Window", "WindowPair", "gaussian_smooth", "make_pairs", "segment",
]
