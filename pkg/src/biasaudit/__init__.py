"""biasaudit: descriptor-based bias auditing for multilingual judgment corpora.

The toolkit detects label-correlated "dispreferred" social descriptors in a
labeled corpus, preprocesses documents under a hard token budget (extractive
summarization and fixed-size chunking), runs exact binomial significance
tests on descriptor-label co-occurrence, and measures whether externally
produced model predictions and word attributions reflect the detected bias.
"""

__version__ = "0.1.0"

from .attribution import (  # noqa: F401
    AttributionRecord,
    ConsistencyReport,
    TopKReport,
    consistency_report,
    load_attributions,
    topk_membership,
)
from .bst import (  # noqa: F401
    BinomialTestResult,
    TestConfig,
    binomial_lower_tail,
    binomial_upper_tail,
    label_frequencies,
    run_bst,
)
from .evaluation import (  # noqa: F401
    ClassMetrics,
    ConfusionMatrix,
    MetricsReport,
    PredictionRecord,
    aggregate_votes,
    classification_report,
    per_descriptor_performance,
    weighted_average,
)
from .lexicon import (  # noqa: F401
    Descriptor,
    Lexicon,
    TranslationCache,
    add_derived_forms,
    bundled_data_path,
    load_derivations,
    load_lexicon,
    save_lexicon,
    translate_lexicon,
)
from .matcher import (  # noqa: F401
    DescriptorMatch,
    DescriptorMatcher,
    MatchOptions,
    match_descriptors,
    match_units,
)
from .preprocess import (  # noqa: F401
    AnalysisUnit,
    Document,
    TokenCounterConfig,
    chunk_document,
    count_tokens,
    split_sentences,
)
from .summarizer import (  # noqa: F401
    CentralityConfig,
    SimilarityGraph,
    SummaryConfig,
    lexrank_scores,
    sentence_vectors,
    similarity_graph,
    summarize_budget,
)
