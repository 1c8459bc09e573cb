"""Binary landscape files and ensemble directories.

File layout (little-endian), extension ``.nkl``:

    magic   4 bytes  b"NKLS"
    version u16      currently 1
    n       u16
    k       u16
    seed    u64      generation seed recorded for provenance
    gen_id  u32      table-generation scheme (see rng.GENERATOR_ID)
    payload N * 2^(K+1) float64 contribution-table entries, site-major
            (site 0 first; within a site, entry index is the window state
            with x_i as the least significant bit)
    crc     u32      CRC32 of the payload bytes

The payload carries the full tables, so loading never depends on agreeing
with the writer's random number generator.  An ensemble lives in one
directory, ``N{n}_K{k}`` for NK families, holding ``landscape_###.nkl``
files plus ``manifest.csv`` (per-landscape seed, global fitness to 17
significant digits, local-maxima count) and ``ensemble.json`` metadata.
Ising families are parameter-free, so their directories hold only the
manifest and metadata.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import ChecksumError, MagicError, ParameterError, TruncationError, VersionError
from .landscapes import IsingLandscape, Landscape, NkLandscape
from .rng import GENERATOR_ID

MAGIC = b"NKLS"
VERSION = 1
_HEADER = struct.Struct("<4sHHHQI")

FAMILIES = ("nk", "ising-ni", "ising-f")
_ISING_VARIANT = {"ising-ni": "noninteracting", "ising-f": "ferromagnetic"}


def save_landscape(landscape: NkLandscape, sink) -> None:
    """Write one NK landscape to a path or binary file object."""
    if not isinstance(landscape, NkLandscape):
        raise ParameterError("only NK landscapes have table payloads to persist")
    payload = np.ascontiguousarray(landscape.tables, dtype="<f8").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, landscape.n, landscape.k, landscape.seed, GENERATOR_ID)
    blob = header + payload + struct.pack("<I", zlib.crc32(payload))
    if hasattr(sink, "write"):
        sink.write(blob)
    else:
        Path(sink).write_bytes(blob)


def load_landscape(source) -> NkLandscape:
    """Read a landscape file; the global maximum is recomputed from the tables."""
    if hasattr(source, "read"):
        blob = source.read()
    else:
        blob = Path(source).read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncationError(f"file holds {len(blob)} bytes, shorter than the {_HEADER.size}-byte header")
    magic, version, n, k, seed, gen_id = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionError(f"file version {version} is not the supported version {VERSION}")
    count = n * 2 ** (k + 1)
    expected = _HEADER.size + 8 * count + 4
    if len(blob) < expected:
        raise TruncationError(f"file holds {len(blob)} bytes, expected {expected} for n={n}, k={k}")
    payload = blob[_HEADER.size : _HEADER.size + 8 * count]
    (crc,) = struct.unpack_from("<I", blob, _HEADER.size + 8 * count)
    if zlib.crc32(payload) != crc:
        raise ChecksumError("payload CRC32 mismatch")
    tables = np.frombuffer(payload, dtype="<f8").reshape(n, 2 ** (k + 1)).copy()
    land = NkLandscape(n, k, seed, tables)
    land.generator_id = gen_id
    return land


def ensemble_dir(root, family: str, n: int, k: int | None = None) -> Path:
    if family == "nk":
        return Path(root) / f"N{n}_K{k}"
    return Path(root) / f"{family.upper().replace('-', '_')}_N{n}"


def landscape_filename(index: int) -> str:
    return f"landscape_{index:03d}.nkl"


def write_manifest(path: Path, rows: list[dict]) -> None:
    lines = ["index,seed,global_fitness,local_maxima_count"]
    for row in rows:
        lines.append(
            f"{row['index']},{row['seed']},{row['global_fitness']:.17g},{row['local_maxima_count']}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path: Path) -> list[dict]:
    rows = []
    lines = Path(path).read_text().strip().splitlines()
    for line in lines[1:]:
        index, seed, fitness, maxima = line.split(",")
        rows.append(
            {
                "index": int(index),
                "seed": int(seed),
                "global_fitness": float(fitness),
                "local_maxima_count": int(maxima),
            }
        )
    return rows


def write_ensemble_meta(directory: Path, meta: dict) -> None:
    (Path(directory) / "ensemble.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_ensemble_meta(directory: Path) -> dict:
    return json.loads((Path(directory) / "ensemble.json").read_text())


def load_ensemble(directory) -> list[Landscape]:
    """All landscapes of an ensemble directory, in manifest order."""
    directory = Path(directory)
    meta = read_ensemble_meta(directory)
    family = meta["family"]
    if family == "nk":
        return [
            load_landscape(directory / landscape_filename(i)) for i in range(meta["count"])
        ]
    return [IsingLandscape(meta["n"], _ISING_VARIANT[family])]
