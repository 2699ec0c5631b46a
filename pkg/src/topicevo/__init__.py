"""Topic evolution tracking over temporal text corpora.

Per-snapshot semantic networks from word embeddings, Louvain topics, greedy
topic chaining with evolution events, importance filtering, k-core/TF-IDF
word reduction and PMI coherence scoring.
"""

__version__ = "0.1.0"

from .community import Partition, louvain, modularity  # noqa: E402
from .corpus import (Document, Snapshot, TermStats, TfidfTable, compute_tfidf,  # noqa: E402
                     load_corpus, partition_snapshots, term_frequencies)
from .embeddings import EmbeddingModel, cosine_similarity, load_embeddings, top_similar  # noqa: E402
from .evolution import (build_time_series, cluster_similarity, instability,  # noqa: E402
                        label_events, similarity_matrix)
from .network import (SemanticNetwork, build_network, cluster_centrality,  # noqa: E402
                      cluster_frequency, density, k_core_decomposition)
from .reduction import rank_words, reduce_words, top_n_words  # noqa: E402
