import struct
from pathlib import Path

import numpy as np
import pytest

from slice2vec.midi import NoteEvent, Piece

FIXTURES = Path(__file__).parent / "fixtures"
MIDI_DIR = FIXTURES / "midi"


def vlq(value):
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def smf(tracks, division=480, fmt=None):
    """Assemble SMF bytes by hand from per-track lists of (delta, raw event bytes)."""
    fmt = (0 if len(tracks) == 1 else 1) if fmt is None else fmt
    out = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), division)
    for events in tracks:
        body = b"".join(vlq(delta) + raw for delta, raw in events) + b"\x00\xff\x2f\x00"
        out += b"MTrk" + struct.pack(">I", len(body)) + body
    return out


def make_piece(notes, tpq=480, **kw):
    """notes: iterable of (pitch, onset, duration)."""
    return Piece(tuple(NoteEvent(onset=o, pitch=p, duration=d) for p, o, d in notes), tpq, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def midi_files():
    files = sorted(MIDI_DIR.glob("*.mid"))
    assert len(files) == 4
    return files
