from .generate import (APP_ITEM_MEANS, DEFAULT_EPOCH_START, DEFAULT_WINDOW_DAYS,
                       TRAIN_FRACTION, generate_corpus)
from .io import DATASET_FILES, load_corpus, save_corpus
from .model import (APPS, ContextItem, ContextStore, Corpus, LabeledQuery,
                    Persona, Plan, Tool, ToolParam, item_text, validate_corpus)
from .templates import build_toolbox, norm_text

__all__ = [
    "APPS", "APP_ITEM_MEANS", "DATASET_FILES", "DEFAULT_EPOCH_START",
    "DEFAULT_WINDOW_DAYS", "TRAIN_FRACTION",
    "ContextItem", "ContextStore", "Corpus", "LabeledQuery", "Persona", "Plan",
    "Tool", "ToolParam",
    "build_toolbox", "generate_corpus", "item_text", "load_corpus", "norm_text",
    "save_corpus", "validate_corpus",
]
