"""De-identification of social media data download packages."""

from .extract import Category, NameList, PiiMatch, Rule
from .keymap import PiiKeyMap, build_keymap, load_keys, save_keys
from .textdeid import TextDeidentifier, deidentify_text

__version__ = "0.1.0"

__all__ = [
    "Category",
    "NameList",
    "PiiMatch",
    "PiiKeyMap",
    "Rule",
    "TextDeidentifier",
    "build_keymap",
    "deidentify_text",
    "load_keys",
    "save_keys",
    "__version__",
]
