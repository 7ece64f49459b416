"""amrkit: AMR graphs, PENMAN I/O, graph-isomorphic linearization and
repair, Smatch scoring, sequence-level knowledge distillation over
pluggable sequence models, and silver-data pipeline tooling."""

from .errors import AmrkitError, TooLarge
from .graph import (
    AmrGraph,
    Edge,
    MalformedPenman,
    Node,
    Triple,
    parse_penman,
    read_amr_file,
    read_amr_text,
    serialize_penman,
    to_triples,
    write_amr_file,
)
from .linearize import InvalidLinearization, delinearize, from_line, linearize, to_line
from .repair import RepairReport, repair, repair_pass_report, repair_with_report
from .smatch import (
    CorpusReport,
    CountMismatch,
    SmatchResult,
    corpus_smatch,
    smatch_exact,
    smatch_hill_climb,
)
from .seqmodel import BOS, EOS, SeqModel, ToyCondModel
from .decode import BeamHypothesis, beam_search, exact_mode, strip_sentinels
from .distill import (
    KdBatch,
    KdRecord,
    SupportMismatch,
    ZeroProbability,
    exact_seq_kl,
    kd_batches_from_corpus,
    mle_loss,
    seq_kd_build,
    token_kd_loss,
    train,
)
from .pipeline import (
    CorpusRecord,
    EmbeddingProvider,
    HashEmbedding,
    NoiseSpec,
    StubTranslator,
    augment_vocab,
    bt_filter,
    corpus_stats,
    read_corpus_jsonl,
    word_delete,
    write_corpus_jsonl,
)
from .report import row_averages

__version__ = "0.1.0"
