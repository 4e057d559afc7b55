"""
Binary checkpoint format.

Layout: magic (4 bytes), format version (u16 LE), header length (u32 LE),
UTF-8 JSON header with sorted keys, then every array as little-endian
float64 in header order. Identical parameters give identical bytes.
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from core.exceptions import CheckpointError

from .network import NetworkSpec, Sequential

logger = logging.getLogger(__name__)

NETWORK_MAGIC = b"PKLN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")


def write_checkpoint(meta, arrays, magic=NETWORK_MAGIC):
    """Serialize a metadata dict and named arrays to bytes."""
    names = sorted(arrays)
    header = {
        "meta": meta,
        "arrays": [[name, list(np.shape(arrays[name]))] for name in names],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    payload = b"".join(
        np.ascontiguousarray(arrays[name], dtype="<f8").tobytes() for name in names
    )
    return _PREFIX.pack(magic, FORMAT_VERSION, len(header_bytes)) + header_bytes + payload


def read_checkpoint(data, magic=NETWORK_MAGIC):
    """Parse bytes written by write_checkpoint. Returns (meta, arrays)."""
    if len(data) < _PREFIX.size:
        raise CheckpointError("Checkpoint is truncated")
    found, version, header_length = _PREFIX.unpack_from(data)
    if found != magic:
        raise CheckpointError(f"Bad checkpoint magic {found!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}")
    start = _PREFIX.size
    try:
        header = json.loads(data[start : start + header_length].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Corrupt checkpoint header: {exc}")

    offset = start + header_length
    arrays = {}
    for name, shape in header["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError(f"Checkpoint payload truncated at {name}")
        raw = np.frombuffer(data[offset:end], dtype="<f8")
        arrays[name] = raw.astype(np.float64).reshape(shape)
        offset = end
    if offset != len(data):
        raise CheckpointError("Trailing bytes after checkpoint payload")
    return header["meta"], arrays


def network_to_bytes(net, extra=None):
    meta = {"spec": net.spec.to_dict()}
    if extra:
        meta["extra"] = extra
    return write_checkpoint(meta, net.parameters())


def network_from_bytes(data):
    """Rebuild a Sequential network; returns (net, extra metadata)."""
    meta, arrays = read_checkpoint(data)
    spec = NetworkSpec.from_dict(meta["spec"])
    net = Sequential(spec, np.random.default_rng(0))
    net.load_parameters(arrays)
    return net, meta.get("extra", {})


def save_network(net, path, extra=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(network_to_bytes(net, extra))
    logger.info("Wrote network checkpoint %s", path)
    return path


def load_network(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"Cannot read checkpoint {path}: {exc}")
    return network_from_bytes(data)
