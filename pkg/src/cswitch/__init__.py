"""Code-switched corpus generation and encoder alignment objectives."""

from .align import (
    AlignmentLinkSet,
    DiagonalAligner,
    Model1Aligner,
    parse_pharaoh,
    symmetrize,
)
from .corpus import (
    CleaningPolicy,
    Sentence,
    SentencePair,
    clean_corpus,
    detokenize,
    mix_corpora,
    prepend_tag,
    tokenize,
)
from .generate import (
    CswRecord,
    ReplacementPolicy,
    apply_replacements,
    choose_matrix,
    emit_rows,
    generate_corpus,
    postfilter,
    sample_replacements,
)
from .metrics import BleuConfig, corpus_bleu, copying_baseline
from .objectives import ObjectiveConfig, ToyEncoder, gradcheck, train_encoder
from .subword import BpeEncoder, remove_bpe
from .units import MinimalUnit, extract_units, unit_span_histogram

__version__ = "0.1.0"
