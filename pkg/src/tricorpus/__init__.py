"""Corpus construction and MT evaluation toolkit for low-resource
language triples: corpus data model, text cleanup, subword vocabularies,
embedding-based alignment, BLEU/ChrF++ scoring, and experiment assembly.
"""

__version__ = "0.1.0"

from .align import (
    AlignedPair,
    AlignError,
    AlignmentPath,
    Bead,
    EmbeddingMatrix,
    align_documents,
    emit_pairs,
    load_embeddings,
    margin_score,
    save_embeddings,
)
from .bpe import (
    BpeError,
    BpeModel,
    DuplicateSpecial,
    detokenize,
    extend_vocab,
    learn_bpe,
    load_model,
    save_model,
    tokenize,
)
from .corpus import (
    Corpus,
    CorpusError,
    DuplicateId,
    MalformedRecord,
    ParallelUnit,
    Sentence,
    VerseAlignment,
    VerseDoc,
    align_verses,
    corpus_stats,
    load_corpus,
    load_verse_doc,
    save_corpus,
    save_verse_doc,
)
from .experiments import (
    ExperimentError,
    ExperimentSpec,
    HoldoutTooLarge,
    SplitAssignment,
    assemble_experiment,
    export_llm_batch,
    ingest_llm_responses,
    standard_experiment,
    stratified_split,
)
from .metrics import (
    EvalPair,
    MetricsError,
    ScoreReport,
    bleu_corpus,
    build_report,
    chrfpp_corpus,
)
from .textprep import (
    CleanReport,
    clean_text,
    filter_short,
    fix_encoding,
    normalize,
    split_sentences,
)
