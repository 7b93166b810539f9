class BridgeError(Exception):
    """Base class for all bridge failures."""


class ModelLoadError(BridgeError):
    """The requested model identifier cannot be resolved or loaded."""


class EmptyInput(BridgeError):
    """An input line that must carry a sentence is empty."""


class UnsupportedLanguage(BridgeError):
    """The loaded model does not handle the requested language pair."""
