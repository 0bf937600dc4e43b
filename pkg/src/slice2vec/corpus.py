"""Reading and writing the line-oriented ``.slc`` corpus format.

::

    #piece <path> <slice_ticks>
    60h,64,67
    -
    ...

One header per piece, then one line per slice.  Pitches are comma separated,
``h`` marks a held pitch and ``-`` stands for an empty slice.  Blank lines
are ignored.
"""

from dataclasses import dataclass, field

from .errors import CorpusFormatError
from .slicer import Slice


@dataclass
class CorpusPiece:
    path: str
    slice_ticks: int
    slices: list = field(default_factory=list)

    @property
    def words(self):
        return [s.word for s in self.slices]


def format_slice(slice_):
    if not slice_.word:
        return "-"
    return ",".join(f"{p}h" if h else str(p) for p, h in zip(slice_.word, slice_.held))


def format_word(word):
    return ",".join(map(str, word)) if word else "-"


def parse_slice_line(text, start=0, slice_ticks=1, line=None):
    text = text.strip()
    if text == "-":
        return Slice((), (), start, start + slice_ticks)
    pairs = []
    for token in text.split(","):
        token = token.strip()
        held = token.endswith("h")
        digits = token[:-1] if held else token
        if not digits.isdigit() or not 0 <= int(digits) <= 127:
            raise CorpusFormatError(f"bad pitch token {token!r}", line)
        pairs.append((int(digits), held))
    pairs.sort()
    word = tuple(p for p, _ in pairs)
    if len(set(word)) != len(word):
        raise CorpusFormatError(f"duplicate pitch in slice {text!r}", line)
    return Slice(word, tuple(h for _, h in pairs), start, start + slice_ticks)


def parse_word(text):
    """Parse ``"60,64,67"`` (or ``"-"``) into a slice word; held markers are dropped."""
    return parse_slice_line(text).word


def write_corpus(pieces, path):
    with open(path, "w", encoding="utf-8") as fh:
        for piece in pieces:
            fh.write(f"#piece {piece.path} {piece.slice_ticks}\n")
            for s in piece.slices:
                fh.write(format_slice(s) + "\n")


def read_corpus(path):
    pieces = []
    current = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#piece"):
                head, _, ticks = text[len("#piece"):].strip().rpartition(" ")
                if not head or not ticks.isdigit() or int(ticks) < 1:
                    raise CorpusFormatError(f"malformed piece header {text!r}", lineno)
                current = CorpusPiece(head, int(ticks))
                pieces.append(current)
                continue
            if current is None:
                raise CorpusFormatError("slice line before any #piece header", lineno)
            start = len(current.slices) * current.slice_ticks
            current.slices.append(parse_slice_line(text, start, current.slice_ticks, lineno))
    if not pieces:
        raise CorpusFormatError(f"corpus {path} contains no pieces")
    return pieces
