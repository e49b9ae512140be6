"""Structure-aware membership inference over source code.

Thin wrapper over the C++ core in ``sersem._core``.
"""

import os
from pathlib import Path

_packaged_wordlist = Path(__file__).with_name("data") / "english_words.txt"
if "SERSEM_WORDLIST" not in os.environ and _packaged_wordlist.exists():
    os.environ["SERSEM_WORDLIST"] = str(_packaged_wordlist)

from ._core import *  # noqa: E402,F401,F403
from ._core import (  # noqa: E402
    MaskBuilder,
    Wordlist,
    default_wordlist_path,
)

__version__ = "0.1.0"


def mask_builder(wordlist_path=None):
    """A MaskBuilder over the bundled English word list (or another file)."""
    return MaskBuilder(Wordlist.load(wordlist_path or default_wordlist_path()))
