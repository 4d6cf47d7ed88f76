"""Correlated alarm detection: alarm log -> co-occurrence graph -> node2vec embeddings -> consensus clusters."""

from .cluster import ahc, consensus, cut, elbow, ensemble, epsilon, kmeans, select_kmax
from .graph import CooccurrenceGraph, PresenceMatrix, build_graph, presence_matrix
from .ingest import AlarmEvent, AlarmLog, TagVocabulary, build_vocabulary, parse_log
from .preprocess import AlarmSequence, PreprocessConfig, dechatter, segment
from .project import PcaModel, pca_fit, pca_transform

__version__ = "0.1.0"
