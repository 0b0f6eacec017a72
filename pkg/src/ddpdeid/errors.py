"""Exception types shared across the package.

Two failure families map onto the two non-zero CLI exit codes: problems
with what the user handed us (exit 1) and violations of guarantees the
pipeline itself must uphold (exit 2).
"""


class FatalInputError(Exception):
    """Unusable input: missing files, malformed archives, bad options."""


class InvariantError(Exception):
    """An internal guarantee was broken; output cannot be trusted."""


class KeyCollisionError(InvariantError):
    """Two distinct values hashed to the same replacement code."""

    def __init__(self, code: str, first: str, second: str):
        super().__init__(
            f"code collision: {first!r} and {second!r} both map to {code}; "
            "re-run with a different salt"
        )
        self.code = code
