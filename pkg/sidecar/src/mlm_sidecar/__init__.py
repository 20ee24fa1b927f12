"""HTTP sidecar exposing a BERT-class masked LM: tokenize, fill-mask
prediction, and light fine-tuning sessions."""

__version__ = "0.1.0"

from .app import create_app
from .config import Settings
from .modeling import ModelBundle

__all__ = ["ModelBundle", "Settings", "create_app", "__version__"]
