"""Manifest ingestion, corpus indexing and the binary feature database.

Database layout (all integers little-endian)::

    b"MIXHDB01"                      8-byte magic, last two chars = version
    n_h, n_s, n_v, n_q               4 x uint16
    record count                     uint64
    per record:
        len(image_id), image_id      uint32 + UTF-8 bytes
        len(category), category      uint32 + UTF-8 bytes
        vector                       n_q*n_h*n_s*n_v x float64
    CRC32 of every preceding byte    uint32
"""

from __future__ import annotations

import csv
import logging
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .descriptor import DEFAULT_SCHEME, QuantizationScheme, extract
from .errors import (
    BadMagic,
    ChecksumMismatch,
    DBFormatError,
    DuplicateId,
    ExtractionError,
    MalformedRow,
    MissingFile,
    SchemeMismatch,
    VersionMismatch,
)
from .imaging import load_image

log = logging.getLogger(__name__)

MAGIC_PREFIX = b"MIXHDB"
VERSION = b"01"
MAGIC = MAGIC_PREFIX + VERSION
MANIFEST_HEADER = ("image_id", "path", "category")

_HEADER = struct.Struct("<8s4HQ")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: str
    category: str


class FeatureDB:
    """Immutable set of (image_id, category, vector) records sharing one scheme.

    Vectors are held as a read-only ``(n_records, scheme.length)`` float64
    matrix, which is what the query path scans.
    """

    def __init__(
        self,
        scheme: QuantizationScheme,
        image_ids: Sequence[str] = (),
        categories: Sequence[str] = (),
        vectors=None,
        *,
        check_sums: bool = True,
    ):
        ids = tuple(str(i) for i in image_ids)
        cats = tuple(str(c) for c in categories)
        if vectors is None or not ids:
            mat = np.zeros((0, scheme.length))
            if vectors is not None and np.size(vectors):
                raise SchemeMismatch("vectors given without image ids")
        else:
            mat = np.array(vectors, dtype=np.float64, copy=True)
        if len(cats) != len(ids):
            raise ValueError("image_ids and categories differ in length")
        if mat.shape != (len(ids), scheme.length):
            raise SchemeMismatch(
                f"vectors have shape {mat.shape}, scheme expects (n, {scheme.length})"
            )
        if len(set(ids)) != len(ids):
            raise DuplicateId("image ids in a FeatureDB must be unique")
        if check_sums and len(ids):
            bad = np.flatnonzero(np.abs(mat.sum(axis=1) - 1.0) > 1e-9)
            if bad.size:
                raise ValueError(f"vector for {ids[bad[0]]!r} does not sum to 1")
        mat.flags.writeable = False
        self.scheme = scheme
        self.image_ids = ids
        self.categories = cats
        self.vectors = mat
        self._pos = {iid: k for k, iid in enumerate(ids)}
        # lexicographic rank of each record's id, used to break distance ties
        self.id_rank = np.empty(len(ids), dtype=np.int64)
        self.id_rank[sorted(range(len(ids)), key=ids.__getitem__)] = np.arange(len(ids))

    def __len__(self) -> int:
        return len(self.image_ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureDB):
            return NotImplemented
        return (
            self.scheme == other.scheme
            and self.image_ids == other.image_ids
            and self.categories == other.categories
            and self.vectors.shape == other.vectors.shape
            and self.vectors.tobytes() == other.vectors.tobytes()
        )

    def __repr__(self) -> str:
        return f"FeatureDB({self.scheme}, {len(self)} records)"

    @property
    def records(self):
        return list(zip(self.image_ids, self.categories, self.vectors))

    def index_of(self, image_id: str) -> int:
        return self._pos[image_id]

    def vector(self, image_id: str) -> np.ndarray:
        return self.vectors[self._pos[image_id]]

    def category(self, image_id: str) -> str:
        return self.categories[self._pos[image_id]]

    def category_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for c in self.categories:
            sizes[c] = sizes.get(c, 0) + 1
        return sizes


# --- manifest ----------------------------------------------------------------


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a ``image_id,path,category`` CSV.

    Relative image paths are resolved against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    base = path.parent
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise MalformedRow(f"{path}: header must be {','.join(MANIFEST_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedRow(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            image_id, img_path, category = row
            if not image_id or not img_path:
                raise MalformedRow(f"{path}:{lineno}: empty image_id or path")
            if image_id in seen:
                raise DuplicateId(f"{path}:{lineno}: duplicate image_id {image_id!r}")
            seen.add(image_id)
            resolved = img_path if os.path.isabs(img_path) else str(base / img_path)
            entries.append(ManifestEntry(image_id, resolved, category))
    return entries


def write_manifest(path, entries: Iterable[ManifestEntry], relative_to=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for e in entries:
            p = os.path.relpath(e.path, relative_to) if relative_to is not None else e.path
            w.writerow((e.image_id, Path(p).as_posix(), e.category))


# --- indexing ----------------------------------------------------------------


def _extract_entry(entry: ManifestEntry, scheme: QuantizationScheme) -> np.ndarray:
    try:
        return extract(load_image(entry.path), scheme).values
    except Exception as exc:
        raise ExtractionError(entry.image_id, exc) from exc


def build_index(
    entries: Sequence[ManifestEntry],
    scheme: QuantizationScheme = DEFAULT_SCHEME,
    workers: int = 1,
) -> FeatureDB:
    """Extract one feature vector per manifest entry, in manifest order.

    Stops at the first failing image and raises :class:`ExtractionError`
    carrying its ``image_id``.
    """
    entries = list(entries)
    if not entries:
        return FeatureDB(scheme)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(lambda e: _extract_entry(e, scheme), entries))
    else:
        vectors = [_extract_entry(e, scheme) for e in entries]
    log.debug("indexed %d images with %s", len(entries), scheme)
    return FeatureDB(
        scheme,
        [e.image_id for e in entries],
        [e.category for e in entries],
        np.vstack(vectors),
    )


# --- persistence -------------------------------------------------------------


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _U32.pack(len(raw)) + raw


def dump_db(db: FeatureDB) -> bytes:
    s = db.scheme
    parts = [_HEADER.pack(MAGIC, s.n_h, s.n_s, s.n_v, s.n_q, len(db))]
    vec_le = db.vectors.astype("<f8", copy=False)
    for k, (iid, cat) in enumerate(zip(db.image_ids, db.categories)):
        parts.append(_pack_str(iid))
        parts.append(_pack_str(cat))
        parts.append(vec_le[k].tobytes())
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


def parse_db(data: bytes) -> FeatureDB:
    if len(data) < len(MAGIC) or not data.startswith(MAGIC_PREFIX):
        raise BadMagic("not a mixhist feature database")
    if data[: len(MAGIC)] != MAGIC:
        raise VersionMismatch(
            f"database version {data[6:8]!r} is not supported (expected {VERSION!r})"
        )
    if len(data) < _HEADER.size + _U32.size:
        raise ChecksumMismatch("database file is truncated")
    body, trailer = data[:-4], data[-4:]
    if zlib.crc32(body) & 0xFFFFFFFF != _U32.unpack(trailer)[0]:
        raise ChecksumMismatch("database checksum does not match its contents")

    _, n_h, n_s, n_v, n_q, count = _HEADER.unpack_from(body, 0)
    try:
        scheme = QuantizationScheme(n_h, n_s, n_v, n_q)
    except ValueError as exc:
        raise DBFormatError(f"invalid scheme in header: {exc}") from exc
    vec_bytes = 8 * scheme.length
    off = _HEADER.size
    ids, cats, vecs = [], [], []
    try:
        for _ in range(count):
            for out in (ids, cats):
                (n,) = _U32.unpack_from(body, off)
                off += 4
                if off + n > len(body):
                    raise DBFormatError("string runs past end of file")
                out.append(body[off : off + n].decode("utf-8"))
                off += n
            if off + vec_bytes > len(body):
                raise DBFormatError("vector runs past end of file")
            vecs.append(np.frombuffer(body, dtype="<f8", count=scheme.length, offset=off))
            off += vec_bytes
    except (struct.error, UnicodeDecodeError) as exc:
        raise DBFormatError(f"corrupt record data: {exc}") from exc
    if off != len(body):
        raise DBFormatError(f"{len(body) - off} trailing bytes after last record")
    mat = np.vstack(vecs).astype(np.float64) if vecs else np.zeros((0, scheme.length))
    return FeatureDB(scheme, ids, cats, mat, check_sums=False)


def save_db(db: FeatureDB, path) -> None:
    data = dump_db(db)
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def load_db(path) -> FeatureDB:
    with open(path, "rb") as fh:
        return parse_db(fh.read())
