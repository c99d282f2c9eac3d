"""Extractive summarization by a learned affine transform of the document embedding."""
from .corpus import CorpusRecord, CorpusStats, SyntheticConfig, generate_synthetic, load_corpus
from .document import Document, build_document
from .embedding_space import EmbeddingSpace, embed_document, embed_tokens, load_word_vectors, load_word_vectors_file
from .extractors import (
    Selection,
    extract_baseline,
    extract_lead3,
    extract_oracle,
    extract_oracle_sent,
    extract_strass,
    render_summary,
)
from .model import (
    AffineTransform,
    Hyperparams,
    TrainingExample,
    backward,
    forward,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .rouge import RougeScore, bootstrap_ci, corpus_rouge, rouge_l, rouge_n
from .similarity import cos_plus, cos_sim, ncos_plus, rcos_plus
from .text_pipeline import PreprocessOptions, preprocess, split_sentences, tokenize

__version__ = "0.1.0"
