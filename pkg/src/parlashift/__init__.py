"""Parliamentary speech corpus construction and diachronic usage change."""

__version__ = "0.1.0"

from .align import AlignmentResult, align_models, orthogonal_procrustes
from .corpus import (
    CorpusStats,
    SpeechRecord,
    TimeSlice,
    corpus_stats,
    gender_participation,
    load_speeches,
    shared_vocabulary,
    slice_corpus,
    write_speeches,
)
from .detect import (
    ChangeConfig,
    ChangeRanking,
    apply_frequency_cutoffs,
    detect_changes,
    rank_changed_words,
    score_compass,
    score_nn,
    score_procrustes,
    score_second_order,
)
from .embed import (
    EmbeddingModel,
    TrainConfig,
    cosine_similarity,
    load_model,
    nearest_neighbors,
    save_model,
    train,
    train_compass,
)
from .evaluate import (
    DriftReport,
    StabilityConfig,
    StabilityReport,
    bootstrap_ci,
    intersection_at_k,
    party_drift,
    run_stability,
    track_topics,
)
from .preprocess import (
    PartyTagTable,
    merge_periods,
    normalize_tokens,
    strip_accents,
    tag_party_references,
)
from .resolve import (
    MemberEntry,
    NameCaseTable,
    NameVariantSet,
    generate_variants,
    genitive_to_nominative,
    jaro_winkler,
    merge_support_datasets,
    resolve_speaker,
)
from .sittings import RawSitting, SpeakerMention, detect_speaker_lines, segment_speeches
