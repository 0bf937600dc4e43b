"""Standard MIDI File ingestion, global key detection and transposition.

Only what the slicing pipeline needs is decoded: note-on/note-off pairs and
the key-signature meta event.  Tempo and every other event are skipped over
(tempo has no bearing on slicing, which works on integer ticks).
"""

import logging
import struct
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, MidiParseError

log = logging.getLogger(__name__)

MAJOR, MINOR = "major", "minor"

# Krumhansl & Kessler (1982) probe-tone ratings, tonic first.
KK_MAJOR = np.array([6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88])
KK_MINOR = np.array([6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17])

REFERENCE_TONIC = {MAJOR: 0, MINOR: 9}

PITCH_NAMES = ["C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"]
_NAME_TO_PC = {
    "C": 0, "B#": 0, "C#": 1, "DB": 1, "D": 2, "D#": 3, "EB": 3, "E": 4, "FB": 4,
    "F": 5, "E#": 5, "F#": 6, "GB": 6, "G": 7, "G#": 8, "AB": 8, "A": 9,
    "A#": 10, "BB": 10, "B": 11, "CB": 11,
}


@dataclass(frozen=True, order=True)
class NoteEvent:
    """A single sounding note. Times are integer ticks."""

    onset: int
    pitch: int
    duration: int
    track: int = 0
    velocity: int = 64

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch out of range: {self.pitch}")
        if self.duration < 1:
            raise ValueError(f"duration must be >= 1, got {self.duration}")
        if self.onset < 0:
            raise ValueError(f"negative onset: {self.onset}")

    @property
    def end(self):
        return self.onset + self.duration


@dataclass(frozen=True)
class Piece:
    """A parsed piece: events sorted by (onset, pitch), one tick resolution.

    ``key_signature`` holds the key from the file's first key-signature meta
    event, if any; ``detected_key`` is filled in by :func:`with_detected_key`.
    ``warnings`` collects non-fatal parse problems such as dangling note-ons.
    """

    events: tuple = ()
    ticks_per_quarter: int = 480
    detected_key: tuple = None
    source_path: str = ""
    key_signature: tuple = None
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events)))
        if self.ticks_per_quarter < 1:
            raise ValueError("ticks_per_quarter must be positive")

    @property
    def end_tick(self):
        return max((e.end for e in self.events), default=0)


def pitch_class_name(pc):
    return PITCH_NAMES[pc % 12]


def parse_pitch_class(name):
    """``"Eb"`` -> 3. Accepts sharps/flats and bare integers 0-11."""
    text = name.strip()
    if text.lstrip("-").isdigit():
        return int(text) % 12
    try:
        return _NAME_TO_PC[text[:1].upper() + text[1:].upper()]
    except KeyError:
        raise DataError(f"unknown pitch class name {name!r}") from None


def parse_key(text):
    """Parse ``"<tonic>:<mode>"`` such as ``"Eb:major"`` or ``"9:minor"``."""
    tonic, sep, mode = text.partition(":")
    mode = mode.strip().lower()
    if not sep or mode not in (MAJOR, MINOR):
        raise DataError(f"key must look like 'D:major' or '9:minor', got {text!r}")
    return parse_pitch_class(tonic), mode


# ---------------------------------------------------------------------------
# SMF reading

class _Reader:
    def __init__(self, data, pos=0, end=None):
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    def take(self, n, what):
        if self.pos + n > self.end:
            raise MidiParseError(f"truncated {what}", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def byte(self, what):
        return self.take(1, what)[0]

    def varlen(self):
        start = self.pos
        value = 0
        for _ in range(4):
            b = self.byte("variable-length quantity")
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiParseError("variable-length quantity longer than 4 bytes", start)


_DATA_BYTES = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


def _key_from_signature(sharps, minor):
    major_tonic = (7 * sharps) % 12
    if minor:
        return (major_tonic + 9) % 12, MINOR
    return major_tonic, MAJOR


def _parse_track(reader, track_index, notes, key_events, warnings):
    tick = 0
    status = None
    open_notes = {}
    while reader.pos < reader.end:
        tick += reader.varlen()
        offset = reader.pos
        first = reader.byte("event")
        if first == 0xFF:
            kind = reader.byte("meta event type")
            payload = reader.take(reader.varlen(), "meta event")
            if kind == 0x2F:
                break
            if kind == 0x59:
                if len(payload) < 2:
                    raise MidiParseError("short key-signature event", offset)
                sharps = struct.unpack("b", payload[:1])[0]
                key_events.append((tick, track_index, _key_from_signature(sharps, payload[1] == 1)))
            continue
        if first in (0xF0, 0xF7):
            reader.take(reader.varlen(), "sysex event")
            status = None
            continue
        if first & 0x80:
            if first >= 0xF0:
                raise MidiParseError(f"unsupported status byte 0x{first:02X}", offset)
            status = first
            data = reader.take(_DATA_BYTES[status & 0xF0], "channel event")
        else:
            if status is None:
                raise MidiParseError("data byte without running status", offset)
            data = bytes([first]) + reader.take(_DATA_BYTES[status & 0xF0] - 1, "channel event")
        kind, channel = status & 0xF0, status & 0x0F
        if kind not in (0x80, 0x90):
            continue
        pitch, velocity = data[0] & 0x7F, data[1] & 0x7F
        key = (channel, pitch)
        if kind == 0x90 and velocity > 0:
            open_notes.setdefault(key, deque()).append((tick, velocity))
            continue
        pending = open_notes.get(key)
        if not pending:
            continue
        onset, vel = pending.popleft()
        if tick > onset:
            notes.append(NoteEvent(onset, pitch, tick - onset, track_index, vel))
    for (channel, pitch), pending in open_notes.items():
        for onset, vel in pending:
            warnings.append(f"track {track_index}: note {pitch} at tick {onset} never released")
            if tick > onset:
                notes.append(NoteEvent(onset, pitch, tick - onset, track_index, vel))


def parse_midi(data, source_path=""):
    """Parse a format 0 or 1 Standard MIDI File into a :class:`Piece`.

    Note-on with velocity 0 counts as note-off.  Repeated note-ons of one
    pitch on one channel are closed first-in first-out.  Notes left open at
    end-of-track are closed there and reported in ``Piece.warnings``.
    Zero-length notes are dropped.
    """
    data = bytes(data)
    reader = _Reader(data)
    if reader.take(4, "header chunk id") != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    (length,) = struct.unpack(">I", reader.take(4, "header length"))
    if length < 6:
        raise MidiParseError(f"header length {length} < 6", 4)
    fmt, ntracks, division = struct.unpack(">HHH", reader.take(6, "header"))
    reader.take(length - 6, "header")
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported MIDI format {fmt}", 8)
    if division & 0x8000 or division == 0:
        raise MidiParseError("SMPTE or zero time division is not supported", 12)

    notes, key_events, warnings = [], [], []
    track_index = 0
    while reader.pos < len(data):
        chunk_start = reader.pos
        chunk_id = reader.take(4, "chunk id")
        (chunk_len,) = struct.unpack(">I", reader.take(4, "chunk length"))
        if reader.pos + chunk_len > len(data):
            raise MidiParseError(f"chunk of {chunk_len} bytes runs past end of file", chunk_start)
        if chunk_id == b"MTrk":
            _parse_track(_Reader(data, reader.pos, reader.pos + chunk_len),
                         track_index, notes, key_events, warnings)
            track_index += 1
        reader.pos += chunk_len
    if track_index != ntracks:
        warnings.append(f"header declares {ntracks} tracks, found {track_index}")
    for w in warnings:
        log.warning("%s: %s", source_path or "<bytes>", w)

    key_signature = min(key_events)[2] if key_events else None
    return Piece(tuple(notes), division, None, source_path, key_signature, tuple(warnings))


def read_midi(path):
    with open(path, "rb") as fh:
        return parse_midi(fh.read(), source_path=str(path))


# ---------------------------------------------------------------------------
# SMF writing

def _varlen(value):
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(notes, key_signature=None):
    # (tick, order, bytes): note-offs sort before note-ons at the same tick
    timeline = []
    if key_signature is not None:
        tonic, mode = key_signature
        major_tonic = tonic if mode == MAJOR else (tonic - 9) % 12
        sharps = ((major_tonic * 7) % 12)
        if sharps > 6:
            sharps -= 12
        timeline.append((0, 0, 0, b"\xff\x59\x02" + struct.pack("bB", sharps, mode == MINOR)))
    for seq, note in enumerate(notes):
        timeline.append((note.onset, 2, seq, bytes([0x90, note.pitch, max(1, note.velocity)])))
        timeline.append((note.end, 1, seq, bytes([0x80, note.pitch, 0])))
    timeline.sort()
    body = bytearray()
    last = 0
    for tick, _, _, message in timeline:
        body += _varlen(tick - last) + message
        last = tick
    body += b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def write_smf(tracks, ticks_per_quarter=480, key_signature=None):
    """Serialise lists of :class:`NoteEvent` (one list per track) to SMF bytes.

    A single track gives a format-0 file, several give format 1.
    """
    if not tracks:
        tracks = [[]]
    fmt = 0 if len(tracks) == 1 else 1
    out = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), ticks_per_quarter)
    for i, notes in enumerate(tracks):
        out += _track_chunk(sorted(notes), key_signature if i == 0 else None)
    return out


def render_piece(piece):
    """Piece -> SMF bytes, one MTrk per track index so that re-parsing is lossless."""
    n_tracks = max((e.track for e in piece.events), default=0) + 1
    tracks = [[] for _ in range(n_tracks)]
    for e in piece.events:
        tracks[e.track].append(e)
    return write_smf(tracks, piece.ticks_per_quarter, piece.key_signature)


# ---------------------------------------------------------------------------
# Key handling

def pitch_class_distribution(piece):
    weights = np.zeros(12)
    for e in piece.events:
        weights[e.pitch % 12] += e.duration
    return weights


def key_correlations(weights):
    """Pearson correlation of a 12-bin profile with all 24 rotated KK profiles.

    Returns a (2, 12) array: row 0 major keys, row 1 minor keys, column = tonic.
    """
    weights = np.asarray(weights, dtype=float)
    out = np.empty((2, 12))
    for row, profile in enumerate((KK_MAJOR, KK_MINOR)):
        for tonic in range(12):
            out[row, tonic] = np.corrcoef(weights, np.roll(profile, tonic))[0, 1]
    return out


def detect_key(piece):
    """Global key of ``piece`` as ``(tonic_pc, mode)``.

    A key-signature meta event in the file wins; otherwise the
    Krumhansl-Schmuckler argmax over duration-weighted pitch classes is used.
    Ties go to the lowest tonic, major before minor.
    """
    if piece.key_signature is not None:
        return piece.key_signature
    if not piece.events:
        raise DataError("cannot detect key of empty piece")
    weights = pitch_class_distribution(piece)
    if np.ptp(weights) == 0:
        # flat profile: correlation undefined, fall back to the lowest pitch
        return piece.events[0].pitch % 12, MAJOR
    corr = key_correlations(weights)
    row, tonic = np.unravel_index(int(np.argmax(corr)), corr.shape)
    return int(tonic), (MAJOR, MINOR)[row]


def with_detected_key(piece, key=None):
    return replace(piece, detected_key=key if key is not None else detect_key(piece))


def reference_offset(tonic, mode):
    """Smallest signed shift taking ``tonic`` to C (major) or A (minor); +6 maps to -6."""
    offset = (REFERENCE_TONIC[mode] - tonic) % 12
    return offset - 12 if offset >= 6 else offset


def _fold_into_range(pitch):
    while pitch < 0:
        pitch += 12
    while pitch > 127:
        pitch -= 12
    return pitch


def transpose(piece, semitones):
    """Shift every pitch; notes pushed outside 0-127 are octave-folded back."""
    events = tuple(replace(e, pitch=_fold_into_range(e.pitch + semitones)) for e in piece.events)

    def shifted(key):
        return None if key is None else ((key[0] + semitones) % 12, key[1])

    return replace(piece, events=events, detected_key=shifted(piece.detected_key),
                   key_signature=shifted(piece.key_signature))


def transpose_to_reference(piece):
    """Transpose to C major or A minor according to ``piece.detected_key``."""
    if piece.detected_key is None:
        raise DataError("transpose_to_reference requires detected_key; call with_detected_key first")
    tonic, mode = piece.detected_key
    return transpose(piece, reference_offset(tonic, mode))
