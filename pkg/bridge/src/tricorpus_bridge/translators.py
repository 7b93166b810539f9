"""Translation models behind user-supplied model identifiers.

* ``debug-translit`` — a deterministic letter-for-letter transliterator
  from Azerbaijani Latin to Cyrillic.  It is not a translation model; it
  exists so that the back-translation file contract (target-script text,
  stable ids, origin tags) can be exercised without any ML dependency.
* anything else is treated as a ``transformers`` translation checkpoint
  and loaded lazily.
"""

from __future__ import annotations

from tricorpus_bridge.errors import ModelLoadError, UnsupportedLanguage

DEBUG_TRANSLIT_ID = "debug-translit"

_AZJ_TO_CYRILLIC = {
    "a": "а", "b": "б", "c": "дж", "ç": "ч", "d": "д", "e": "е", "ə": "а",
    "f": "ф", "g": "г", "ğ": "гъ", "h": "гь", "x": "х", "ı": "ы", "i": "и",
    "j": "ж", "k": "к", "q": "къ", "l": "л", "m": "м", "n": "н", "o": "о",
    "ö": "ё", "p": "п", "r": "р", "s": "с", "ş": "ш", "t": "т", "u": "у",
    "ü": "ю", "v": "в", "y": "й", "z": "з",
}


def _translit_char(ch: str) -> str:
    low = ch.lower()
    mapped = _AZJ_TO_CYRILLIC.get(low)
    if mapped is None:
        return ch
    # Title-case digraphs: "Q" becomes "Къ", not "КЪ".
    return mapped[0].upper() + mapped[1:] if ch != low else mapped


class TransliteratingTranslator:
    """Deterministic azj_Latn -> rus_Cyrl stand-in for contract tests."""

    pairs = {("azj_Latn", "rus_Cyrl")}

    def supports(self, src_lang: str, tgt_lang: str) -> bool:
        return (src_lang, tgt_lang) in self.pairs

    def translate(self, texts, src_lang: str, tgt_lang: str) -> list:
        if not self.supports(src_lang, tgt_lang):
            raise UnsupportedLanguage(
                f"{DEBUG_TRANSLIT_ID} only handles azj_Latn -> rus_Cyrl, "
                f"not {src_lang} -> {tgt_lang}"
            )
        return ["".join(_translit_char(ch) for ch in text) for text in texts]


class _TransformersTranslator:
    def __init__(self, model_id: str, device: str):
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelLoadError(
                f"model {model_id!r} needs the transformers package; "
                f"install it or use the {DEBUG_TRANSLIT_ID} model"
            ) from exc
        try:
            self._pipe = pipeline("translation", model=model_id, device=device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load translator {model_id!r}: {exc}") from exc

    def supports(self, src_lang: str, tgt_lang: str) -> bool:
        return True  # the checkpoint decides; errors surface at translate time

    def translate(self, texts, src_lang: str, tgt_lang: str) -> list:
        out = self._pipe(list(texts), src_lang=src_lang, tgt_lang=tgt_lang)
        return [item["translation_text"] for item in out]


def resolve_translator(model_id: str, device: str = "cpu"):
    """Return an object with `.supports(src, tgt)` and `.translate(texts, src, tgt)`."""
    if not model_id or not model_id.strip():
        raise ModelLoadError("model identifier must be non-empty")
    if model_id == DEBUG_TRANSLIT_ID:
        return TransliteratingTranslator()
    return _TransformersTranslator(model_id, device)
