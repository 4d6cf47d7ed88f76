from .similarity import cosine_similarity_matrix
from .skipgram import EmbeddingMatrix, SkipGramParams, sgns_loss_and_grad, train_skipgram
from .walks import (
    WalkCorpus,
    WalkParams,
    biased_step_weights,
    generate_corpus,
    generate_walk,
    sample_next_steps,
)

__all__ = [
    "EmbeddingMatrix",
    "SkipGramParams",
    "WalkCorpus",
    "WalkParams",
    "biased_step_weights",
    "cosine_similarity_matrix",
    "generate_corpus",
    "generate_walk",
    "sample_next_steps",
    "sgns_loss_and_grad",
    "train_skipgram",
]
