"""Skip-gram embeddings of polyphonic music slices."""

from .errors import (
    DataError,
    MidiParseError,
    ModelFormatError,
    NumericalError,
    Slice2VecError,
)
from .midi import NoteEvent, Piece, detect_key, parse_midi, transpose_to_reference
from .corpus import CorpusPiece, read_corpus, write_corpus
from .remix import render_midi, replace_slices
from .tsne import TsneConfig, tsne_embed
from .slicer import Slice, compute_slice_duration, slice_piece
from .vocabulary import Vocabulary, build_vocabulary, generate_training_pairs
from .sgns import EmbeddingModel, TrainingConfig, init_model, sgns_step, train
from .embedding import cosine_similarity, load_model, nearest_neighbors, save_model
from .analysis import ChordLabel, label_chord, tonnetz_distance

__version__ = "0.1.0"

__all__ = [
    "ChordLabel",
    "CorpusPiece",
    "DataError",
    "EmbeddingModel",
    "MidiParseError",
    "ModelFormatError",
    "NoteEvent",
    "NumericalError",
    "Piece",
    "Slice",
    "Slice2VecError",
    "TrainingConfig",
    "TsneConfig",
    "Vocabulary",
    "build_vocabulary",
    "compute_slice_duration",
    "cosine_similarity",
    "detect_key",
    "generate_training_pairs",
    "init_model",
    "label_chord",
    "load_model",
    "nearest_neighbors",
    "parse_midi",
    "read_corpus",
    "render_midi",
    "replace_slices",
    "save_model",
    "sgns_step",
    "slice_piece",
    "tonnetz_distance",
    "train",
    "transpose_to_reference",
    "tsne_embed",
    "write_corpus",
]
