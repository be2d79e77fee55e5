"""Raster file I/O: binary PPM/PGM, PNG via Pillow, and float rasters.

PPM (P6) and PGM (P5) are written byte-deterministically and are the
formats golden tests rely on. PNG is accepted and emitted for
convenience. Float rasters use a minimal binary format: magic 'UPF1',
u32 width, u32 height, u8 channel count, then row-major little-endian
float32 samples.
"""

import struct

import numpy as np

from .errors import ImageFormatError

FLOAT_MAGIC = b"UPF1"


def _read_pnm_tokens(data, count):
    """Read `count` whitespace-separated header tokens, honoring # comments.

    Returns the tokens and the offset of the byte after the single
    whitespace that terminates the last one.
    """
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ImageFormatError("truncated PNM header")
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end == -1:
                raise ImageFormatError("unterminated PNM comment")
            pos = end + 1
        else:
            end = pos
            while end < len(data) and data[end : end + 1] not in b" \t\r\n#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise ImageFormatError("malformed PNM header")
    return tokens, pos + 1


def _read_pnm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: not a binary PGM/PPM file")
    channels = 3 if data[:2] == b"P6" else 1
    tokens, offset = _read_pnm_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric PNM header") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval < 1 or maxval > 65535:
        raise ImageFormatError(f"{path}: bad maxval {maxval}")
    dtype = np.uint8 if maxval < 256 else ">u2"
    start = 2 + offset
    count = width * height * channels
    try:
        raster = np.frombuffer(data, dtype=dtype, count=count, offset=start)
    except ValueError:
        raise ImageFormatError(f"{path}: truncated pixel data") from None
    raster = raster.astype(np.uint16) if maxval >= 256 else raster.copy()
    if maxval not in (255, 65535) or raster.dtype != np.uint8:
        # Model constants assume 8-bit sRGB; rescale anything else.
        raster = np.clip(
            np.rint(raster.astype(np.float64) * (255.0 / maxval)), 0, 255
        ).astype(np.uint8)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return raster.reshape(shape)


def _write_pnm(path, image):
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError("PNM writer expects uint8 data")
    if image.ndim == 3 and image.shape[2] == 3:
        magic = b"P6"
    elif image.ndim == 2:
        magic = b"P5"
    else:
        raise ValueError(f"cannot write shape {image.shape} as PNM")
    height, width = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (width, height))
        fh.write(np.ascontiguousarray(image).tobytes())


def _read_png(path):
    from PIL import Image

    with Image.open(path) as img:
        if img.mode in ("I;16", "I;16B", "I"):
            arr = np.asarray(img)
            arr = np.clip(np.rint(arr / 257.0), 0, 255).astype(np.uint8)
            return arr
        if img.mode == "L":
            return np.asarray(img).copy()
        return np.asarray(img.convert("RGB")).copy()


def _write_png(path, image):
    from PIL import Image

    Image.fromarray(image).save(path, format="PNG")


def read_image(path):
    """Load an 8-bit image as (H, W, 3) RGB or (H, W) grayscale."""
    text = str(path)
    try:
        if text.lower().endswith((".ppm", ".pgm", ".pnm")):
            return _read_pnm(text)
        if text.lower().endswith(".png"):
            return _read_png(text)
    except OSError:
        raise
    raise ImageFormatError(f"{path}: unsupported image format (use PPM/PGM/PNG)")


def read_rgb(path):
    """Load an image, promoting grayscale to 3 identical channels."""
    arr = read_image(path)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return arr


def read_mask(path):
    """Load a mask raster; nonzero means selected (shadowed)."""
    arr = read_image(path)
    if arr.ndim == 3:
        arr = arr.max(axis=2)
    return arr > 0


def write_image(path, image):
    """Write an 8-bit raster; format chosen by extension."""
    text = str(path)
    if text.lower().endswith((".ppm", ".pgm", ".pnm")):
        _write_pnm(text, image)
    elif text.lower().endswith(".png"):
        _write_png(text, image)
    else:
        raise ValueError(f"{path}: unsupported output format (use PPM/PGM/PNG)")


def write_float_raster(path, raster):
    """Write a float raster (H, W) or (H, W, C) in the UPF1 layout."""
    arr = np.asarray(raster, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] > 255:
        raise ValueError(f"cannot write shape {np.asarray(raster).shape} as UPF1")
    height, width, channels = arr.shape
    with open(path, "wb") as fh:
        fh.write(FLOAT_MAGIC)
        fh.write(struct.pack("<IIB", width, height, channels))
        fh.write(arr.astype("<f4").tobytes())


def read_float_raster(path):
    """Read a UPF1 float raster; single-channel data comes back as (H, W)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != FLOAT_MAGIC:
        raise ImageFormatError(f"{path}: not a UPF1 float raster")
    width, height, channels = struct.unpack_from("<IIB", data, 4)
    count = width * height * channels
    try:
        raster = np.frombuffer(data, dtype="<f4", count=count, offset=13)
    except ValueError:
        raise ImageFormatError(f"{path}: truncated float raster") from None
    raster = raster.astype(np.float32).reshape(height, width, channels)
    return raster[:, :, 0] if channels == 1 else raster
