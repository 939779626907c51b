"""repvec: representative-vector document engine.

Chunks plain-text corpora, embeds them, quantizes the embedding space with
budgeted k-means, extracts centroid-nearest representative chunks, and emits
keyword maps, word-cloud weights, 2-D layouts, map-reduce summaries and
retrieval-augmented answers through a pluggable provider boundary.
"""

__version__ = "0.1.0"
