"""File formats: graymaps, measurement files, coefficient dumps, filter dumps.

Binary payloads are little-endian float64 preceded by one ASCII header line of
space-separated ``key=value`` pairs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

PAYLOAD_DTYPE = np.dtype("<f8")


# --- images -------------------------------------------------------------------


def read_image(path: str | Path) -> tuple[np.ndarray, int]:
    """Load a grayscale image as floats in ``[0, 1]`` plus its integer peak value."""
    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr, peak = np.asarray(im, dtype=np.float64), 65535
        else:
            arr, peak = np.asarray(im.convert("L"), dtype=np.float64), 255
    return arr / peak, peak


def write_image(path: str | Path, img: np.ndarray, bits: int = 8) -> None:
    """Store a ``[0, 1]`` image as an 8- or 16-bit graymap (clipped, rounded)."""
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    peak = 255 if bits == 8 else 65535
    q = np.round(np.clip(np.asarray(img, dtype=float), 0.0, 1.0) * peak)
    arr = q.astype(np.uint8 if bits == 8 else np.uint16)
    Image.fromarray(arr).save(Path(path), format="PPM")


# --- header + payload -----------------------------------------------------------


def _format_header(fields: dict) -> bytes:
    for k, v in fields.items():
        if " " in str(v) or "=" in str(k):
            raise ValueError(f"header field {k}={v!r} cannot contain spaces")
    return (" ".join(f"{k}={v}" for k, v in fields.items()) + "\n").encode("ascii")


def parse_header(line: str) -> dict[str, str]:
    fields = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"malformed header token {token!r}")
        fields[key] = value
    return fields


def write_payload(path: str | Path, fields: dict, data: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(_format_header(fields))
        fh.write(np.ascontiguousarray(data, dtype=PAYLOAD_DTYPE).tobytes())


def read_payload(path: str | Path) -> tuple[dict[str, str], np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii")
        data = np.frombuffer(fh.read(), dtype=PAYLOAD_DTYPE).astype(float)
    return parse_header(header), data


def write_measurements(path, y: np.ndarray, manifest: dict) -> None:
    """Measurement file: ``m= n= k= l= seed= p= noise_sigma= ...`` then ``y``."""
    if int(manifest["m"]) != len(y):
        raise ValueError("manifest m does not match the number of readings")
    write_payload(path, manifest, y)


def read_measurements(path) -> tuple[np.ndarray, dict[str, str]]:
    fields, y = read_payload(path)
    missing = {"m", "n", "k", "l", "seed", "p", "noise_sigma"} - fields.keys()
    if missing:
        raise ValueError(f"measurement header lacks {sorted(missing)}")
    if len(y) != int(fields["m"]):
        raise ValueError(f"header announces m={fields['m']} readings but payload holds {len(y)}")
    return y, fields


def write_coefficients(path, x: np.ndarray, levels: int, rows: int, cols: int, bank: str) -> None:
    write_payload(path, {"levels": levels, "rows": rows, "cols": cols, "bank": bank}, x)


def read_coefficients(path) -> tuple[np.ndarray, dict]:
    fields, x = read_payload(path)
    meta = {"levels": int(fields["levels"]), "rows": int(fields["rows"]),
            "cols": int(fields["cols"]), "bank": fields["bank"]}
    if len(x) != meta["rows"] * meta["cols"]:
        raise ValueError("coefficient payload does not match rows x cols")
    return x, meta


def format_taps(taps) -> str:
    """One tap per line, 17 significant digits."""
    return "".join(f"{float(t):.17g}\n" for t in taps)


# --- key=value config -------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{n}: expected key=value, got {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out
