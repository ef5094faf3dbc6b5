"""Coefficient checkpoints: lossless text files of an even Chebyshev series.

Layout::

    # feigenbaum coefficient checkpoint
    format 1
    n 16
    precision_bits 256
    basis cheb-even-halved
    coefficients
    0x1a2b...p-255
    ...
    end

Each coefficient is ``[-]0x<hex integer>p<exponent>``, i.e. the exact value
``mantissa * 2**exponent``, so a round trip is bit-exact.
"""

from __future__ import annotations

import logging
import os
import re
from pathlib import Path

import gmpy2
from gmpy2 import mpfr, mpz

from .chebyshev import ChebEvenSeries
from .errors import CheckpointError
from .mpnum import round_to

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
BASIS_TAG = "cheb-even-halved"
_HEX_RE = re.compile(r"^([+-]?)0x([0-9a-fA-F]+)p([+-]?\d+)$")


def to_hex(x) -> str:
    if x == 0:
        return "0x0p+0"
    m, e = x.as_mantissa_exp()
    sign = "-" if m < 0 else ""
    return f"{sign}0x{int(abs(m)):x}p{int(e):+d}"


def from_hex(s: str, bits: int) -> mpfr:
    match = _HEX_RE.match(s.strip())
    if not match:
        raise ValueError(f"malformed hex float {s!r}")
    sign, digits, exp = match.groups()
    m = mpz(digits, 16)
    if m.bit_length() > bits:
        raise ValueError(f"mantissa of {s!r} needs more than {bits} bits")
    if sign == "-":
        m = -m
    # exact: scaling by a power of two at the target precision
    with gmpy2.context(precision=bits):
        return gmpy2.mul_2exp(mpfr(m), int(exp))


def save_checkpoint(path, series: ChebEvenSeries, precision_bits: int | None = None) -> None:
    bits = precision_bits or max(c.precision for c in series.coeffs)
    lines = [
        "# feigenbaum coefficient checkpoint",
        f"format {FORMAT_VERSION}",
        f"n {series.n}",
        f"precision_bits {bits}",
        f"basis {BASIS_TAG}",
        "coefficients",
        *(to_hex(round_to(c, bits)) for c in series.coeffs),
        "end",
    ]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> tuple[ChebEvenSeries, int]:
    """Returns the series and its stored precision in bits."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    lines = [ln.strip() for ln in text.splitlines()]
    header: dict[str, str] = {}
    i = 0
    while i < len(lines) and lines[i] != "coefficients":
        ln = lines[i]
        i += 1
        if not ln or ln.startswith("#"):
            continue
        key, _, value = ln.partition(" ")
        header[key] = value.strip()
    if i == len(lines):
        raise CheckpointError(f"{path}: no coefficient section")
    for key in ("format", "n", "precision_bits", "basis"):
        if key not in header:
            raise CheckpointError(f"{path}: header field {key!r} missing")
    if header["format"] != str(FORMAT_VERSION):
        raise CheckpointError(f"{path}: unsupported format version {header['format']}")
    if header["basis"] != BASIS_TAG:
        raise CheckpointError(f"{path}: basis {header['basis']!r} is not {BASIS_TAG!r}")
    try:
        n, bits = int(header["n"]), int(header["precision_bits"])
    except ValueError as exc:
        raise CheckpointError(f"{path}: bad header value: {exc}") from exc
    body = lines[i + 1:]
    coeffs = []
    for k, ln in enumerate(body):
        if ln == "end":
            break
        try:
            coeffs.append(from_hex(ln, bits))
        except ValueError as exc:
            raise CheckpointError(f"{path}, line {i + 2 + k}: {exc}") from exc
    else:
        raise CheckpointError(f"{path}: truncated (no end marker)")
    if len(coeffs) != n:
        raise CheckpointError(f"{path}: header says n={n}, found {len(coeffs)} coefficients")
    return ChebEvenSeries(tuple(coeffs)), bits


class CheckpointDir:
    """One checkpoint per collocation size; keeps the most precise copy."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CheckpointError(f"cannot create checkpoint directory {root}: {exc}") from exc

    def path(self, n: int) -> Path:
        return self.root / f"g_n{n:05d}.ckpt"

    def load(self, n: int, min_bits: int) -> ChebEvenSeries | None:
        p = self.path(n)
        if not p.exists():
            return None
        series, bits = load_checkpoint(p)
        if bits < min_bits:
            log.info("checkpoint %s has %d bits, need %d; recomputing", p, bits, min_bits)
            return None
        return ChebEvenSeries(tuple(round_to(c, min_bits) for c in series.coeffs))

    def save(self, series: ChebEvenSeries, bits: int) -> None:
        p = self.path(series.n)
        if p.exists():
            try:
                _, old_bits = load_checkpoint(p)
                if old_bits >= bits:
                    return
            except CheckpointError:
                pass
        save_checkpoint(p, series, bits)
        log.info("saved checkpoint %s", p)
