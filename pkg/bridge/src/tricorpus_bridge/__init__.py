"""Adapter producing the two artifacts the tricorpus toolkit consumes but
does not compute itself: sentence embeddings and back-translations.

The bridge never imports the toolkit.  It speaks to it purely through file
contracts:

* embeddings: the EMB1 binary format (magic ``EMB1``, u32 row count, u32
  dimension, little-endian float32 rows) plus a UTF-8 ``.ids`` sidecar with
  one id per line, emitted L2-normalized;
* back-translations: corpus JSONL where every unit gains one member in the
  target language tagged with origin ``back_translated``, ids and order
  preserved.
"""

from tricorpus_bridge.emb1 import read_emb1, write_emb1
from tricorpus_bridge.encoders import resolve_encoder
from tricorpus_bridge.errors import (
    BridgeError,
    EmptyInput,
    ModelLoadError,
    UnsupportedLanguage,
)
from tricorpus_bridge.jobs import BridgeJob, back_translate, embed, run_job
from tricorpus_bridge.translators import resolve_translator

__version__ = "0.1.0"

__all__ = [
    "BridgeError",
    "BridgeJob",
    "EmptyInput",
    "ModelLoadError",
    "UnsupportedLanguage",
    "back_translate",
    "embed",
    "read_emb1",
    "resolve_encoder",
    "resolve_translator",
    "run_job",
    "write_emb1",
    "__version__",
]
