"""``key = value`` run configuration files.

Keys are CLI flag names without the leading dashes (``loss-log`` and
``loss_log`` are equivalent).  ``#`` starts a comment.  Explicit
command-line flags always override file values.
"""

from .errors import DataError


class ConfigError(DataError):
    pass


def read_config(path):
    """Return a list of ``(line_number, key, value)`` in file order."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            entries.append((lineno, key, value.strip()))
    return entries


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(text):
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")
