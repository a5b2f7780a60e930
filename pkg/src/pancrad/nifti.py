"""Minimal NIfTI-1 single-file (``.nii`` / ``.nii.gz``) reader and writer.

Only the parts of the format needed for scalar 3D volumes are supported:
the fixed 348-byte header, six scalar datatypes, intensity rescaling and
the qform/sform spatial transforms.
"""
from __future__ import annotations

import gzip
import io
import struct
from pathlib import Path

import numpy as np

from .exceptions import DimensionalityError, FormatError, UnsupportedDatatypeError
from .volume import Mask, Volume

HEADER_SIZE = 348
VOX_OFFSET = 352

DATATYPES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    8: np.dtype(np.int32),
    16: np.dtype(np.float32),
    64: np.dtype(np.float64),
    512: np.dtype(np.uint16),
}
DATATYPE_CODES = {dt: code for code, dt in DATATYPES.items()}

# (name, offset, struct format)
_FIELDS = [
    ("sizeof_hdr", 0, "i"),
    ("dim_info", 39, "B"),
    ("dim", 40, "8h"),
    ("intent_p", 56, "3f"),
    ("intent_code", 68, "h"),
    ("datatype", 70, "h"),
    ("bitpix", 72, "h"),
    ("slice_start", 74, "h"),
    ("pixdim", 76, "8f"),
    ("vox_offset", 108, "f"),
    ("scl_slope", 112, "f"),
    ("scl_inter", 116, "f"),
    ("slice_end", 120, "h"),
    ("slice_code", 122, "B"),
    ("xyzt_units", 123, "B"),
    ("cal_max", 124, "f"),
    ("cal_min", 128, "f"),
    ("descrip", 148, "80s"),
    ("qform_code", 252, "h"),
    ("sform_code", 254, "h"),
    ("quatern", 256, "3f"),
    ("qoffset", 268, "3f"),
    ("srow", 280, "12f"),
    ("magic", 344, "4s"),
]


def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def parse_header(raw):
    """Decode the fixed header into a dict; also returns the byte-order prefix."""
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"file has {len(raw)} bytes, header needs {HEADER_SIZE}", "sizeof_hdr")
    endian = None
    for prefix in ("<", ">"):
        dim0 = struct.unpack_from(prefix + "h", raw, 40)[0]
        if 1 <= dim0 <= 7:
            endian = prefix
            break
    if endian is None:
        raise FormatError("dim[0] is outside [1, 7] in both byte orders", "dim")
    hdr = {}
    for name, offset, fmt in _FIELDS:
        vals = struct.unpack_from(endian + fmt, raw, offset)
        hdr[name] = vals[0] if len(vals) == 1 else vals
    if hdr["sizeof_hdr"] != HEADER_SIZE:
        raise FormatError(f"expected 348, found {hdr['sizeof_hdr']}", "sizeof_hdr")
    if hdr["magic"] != b"n+1\x00":
        raise FormatError(f"expected single-file magic 'n+1', found {hdr['magic']!r}", "magic")
    return hdr, endian


def _quatern_to_rotation(b, c, d, qfac):
    a = np.sqrt(max(0.0, 1.0 - (b * b + c * c + d * d)))
    rot = np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b],
    ])
    rot[:, 2] *= qfac
    return rot


def _rotation_to_quatern(rot):
    r = rot
    a = r[0, 0] + r[1, 1] + r[2, 2] + 1.0
    if a > 0.5:
        a = 0.5 * np.sqrt(a)
        b = 0.25 * (r[2, 1] - r[1, 2]) / a
        c = 0.25 * (r[0, 2] - r[2, 0]) / a
        d = 0.25 * (r[1, 0] - r[0, 1]) / a
    else:
        xd = 1.0 + r[0, 0] - (r[1, 1] + r[2, 2])
        yd = 1.0 + r[1, 1] - (r[0, 0] + r[2, 2])
        zd = 1.0 + r[2, 2] - (r[0, 0] + r[1, 1])
        if xd > 1.0:
            b = 0.5 * np.sqrt(xd)
            c = 0.25 * (r[0, 1] + r[1, 0]) / b
            d = 0.25 * (r[0, 2] + r[2, 0]) / b
            a = 0.25 * (r[2, 1] - r[1, 2]) / b
        elif yd > 1.0:
            c = 0.5 * np.sqrt(yd)
            b = 0.25 * (r[0, 1] + r[1, 0]) / c
            d = 0.25 * (r[1, 2] + r[2, 1]) / c
            a = 0.25 * (r[0, 2] - r[2, 0]) / c
        else:
            d = 0.5 * np.sqrt(zd)
            b = 0.25 * (r[0, 2] + r[2, 0]) / d
            c = 0.25 * (r[1, 2] + r[2, 1]) / d
            a = 0.25 * (r[1, 0] - r[0, 1]) / d
        if a < 0:
            b, c, d = -b, -c, -d
    return b, c, d


def _geometry(hdr):
    pixdim = hdr["pixdim"]
    if hdr["sform_code"] > 0:
        srow = np.asarray(hdr["srow"], dtype=np.float64).reshape(3, 4)
        linear = srow[:, :3]
        spacing = np.linalg.norm(linear, axis=0)
        if np.any(spacing <= 0):
            raise FormatError("sform has a zero-length column", "srow")
        return tuple(spacing), tuple(srow[:, 3]), linear / spacing
    spacing = np.asarray(pixdim[1:4], dtype=np.float64)
    if np.any(spacing <= 0):
        raise FormatError(f"voxel sizes must be positive, found {tuple(spacing)}", "pixdim")
    if hdr["qform_code"] > 0:
        qfac = -1.0 if pixdim[0] < 0 else 1.0
        rot = _quatern_to_rotation(*(float(q) for q in hdr["quatern"]), qfac)
        return tuple(spacing), tuple(float(q) for q in hdr["qoffset"]), rot
    return tuple(spacing), (0.0, 0.0, 0.0), np.eye(3)


def read_nifti(path):
    """Read a file into ``(float64 voxels, spacing, origin, orientation)``."""
    raw = _read_bytes(path)
    hdr, endian = parse_header(raw)
    dim = hdr["dim"]
    ndim = dim[0]
    shape = list(dim[1:ndim + 1])
    if any(n < 1 for n in shape):
        raise FormatError(f"non-positive extent in {tuple(shape)}", "dim")
    if any(n > 1 for n in shape[3:]):
        raise DimensionalityError(f"only 3D data is supported, found dims {tuple(shape)}", "dim")
    shape = (shape + [1, 1, 1])[:3]

    code = hdr["datatype"]
    if code not in DATATYPES:
        raise UnsupportedDatatypeError(f"datatype code {code} is not supported", "datatype")
    dtype = DATATYPES[code].newbyteorder(endian)
    if hdr["bitpix"] != dtype.itemsize * 8:
        raise FormatError(f"{hdr['bitpix']} does not match datatype {code}", "bitpix")
    offset = int(hdr["vox_offset"])
    if offset < HEADER_SIZE:
        raise FormatError(f"{hdr['vox_offset']} points inside the header", "vox_offset")
    count = int(np.prod(shape))
    nbytes = count * dtype.itemsize
    if len(raw) < offset + nbytes:
        raise FormatError(f"expected {nbytes} bytes of voxel data, found {len(raw) - offset}", "data")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    data = data.reshape(shape, order="F").astype(np.float64)

    slope, inter = float(hdr["scl_slope"]), float(hdr["scl_inter"])
    if slope != 0 and np.isfinite(slope):
        if slope != 1 or inter != 0:
            data = data * slope + inter
    spacing, origin, orientation = _geometry(hdr)
    return data, spacing, origin, orientation


def load_volume(path):
    data, spacing, origin, orientation = read_nifti(path)
    return Volume(data, spacing=spacing, origin=origin, orientation=orientation)


def load_mask(path):
    """Load a mask; any voxel strictly above 0.5 becomes foreground."""
    data, spacing, origin, orientation = read_nifti(path)
    return Mask(data > 0.5, spacing=spacing, origin=origin, orientation=orientation)


def encode_nifti(grid, dtype=None):
    """Serialize a Volume or Mask to NIfTI-1 bytes."""
    if dtype is None:
        dtype = np.uint8 if isinstance(grid, Mask) else np.float64
    dtype = np.dtype(dtype)
    if dtype not in DATATYPE_CODES:
        raise UnsupportedDatatypeError(f"cannot write datatype {dtype}", "datatype")
    values = np.asarray(grid.voxels)
    if dtype.kind in "iu":
        info = np.iinfo(dtype)
        if np.any(values != np.round(values)) or values.min() < info.min or values.max() > info.max:
            raise UnsupportedDatatypeError(f"voxel values are not representable as {dtype}", "datatype")

    hdr = bytearray(VOX_OFFSET)
    le = "<"
    struct.pack_into(le + "i", hdr, 0, HEADER_SIZE)
    struct.pack_into(le + "8h", hdr, 40, 3, *grid.dims, 1, 1, 1, 1)
    struct.pack_into(le + "h", hdr, 70, DATATYPE_CODES[dtype])
    struct.pack_into(le + "h", hdr, 72, dtype.itemsize * 8)

    orient = np.asarray(grid.orientation)
    det = np.linalg.det(orient)
    qfac = -1.0 if det < 0 else 1.0
    struct.pack_into(le + "8f", hdr, 76, qfac, *grid.spacing, 0, 0, 0, 0)
    struct.pack_into(le + "f", hdr, 108, float(VOX_OFFSET))
    struct.pack_into(le + "ff", hdr, 112, 1.0, 0.0)
    struct.pack_into(le + "B", hdr, 123, 2)  # millimetres

    rot = orient.copy()
    rot[:, 2] *= qfac
    if np.allclose(rot.T @ rot, np.eye(3), atol=1e-6):
        struct.pack_into(le + "h", hdr, 252, 1)
        struct.pack_into(le + "3f", hdr, 256, *_rotation_to_quatern(rot))
        struct.pack_into(le + "3f", hdr, 268, *grid.origin)
    struct.pack_into(le + "h", hdr, 254, 1)
    affine = grid.affine
    struct.pack_into(le + "12f", hdr, 280, *affine[:3, :].ravel())
    struct.pack_into("4s", hdr, 344, b"n+1\x00")

    body = np.asarray(values, dtype=dtype.newbyteorder("<")).tobytes(order="F")
    return bytes(hdr) + body


def save_nifti(grid, path, dtype=None):
    """Write ``grid`` to ``path``; a ``.gz`` suffix selects gzip compression."""
    payload = encode_nifti(grid, dtype)
    path = Path(path)
    if path.suffix == ".gz":
        buf = io.BytesIO()
        with gzip.GzipFile(filename="", mode="wb", fileobj=buf, mtime=0) as gz:
            gz.write(payload)
        payload = buf.getvalue()
    path.write_bytes(payload)
    return path
