import logging

import pytest
from gmpy2 import mpfr

from feigenbaum.checkpoint import CheckpointDir, from_hex, load_checkpoint, save_checkpoint, to_hex
from feigenbaum.chebyshev import ChebEvenSeries
from feigenbaum.errors import CheckpointError
from feigenbaum.gsolver import solve_g
from feigenbaum.mpnum import PrecisionContext


def series(bits=300):
    ctx = PrecisionContext.from_bits(bits)
    with ctx.active():
        return ChebEvenSeries((mpfr(1) / 3, -mpfr(2) / 7, mpfr(0), mpfr("1e-40") / 11))


def test_hex_roundtrip():
    ctx = PrecisionContext.from_bits(300)
    with ctx.active():
        for x in (mpfr(1) / 3, -mpfr(10) ** -50, mpfr(0), mpfr(2) ** 100):
            y = from_hex(to_hex(x), 300)
            assert y == x and y.precision == 300


def test_hex_rejects_oversized_mantissa():
    with pytest.raises(ValueError):
        from_hex("0x" + "f" * 40 + "p0", 64)


def test_file_roundtrip_is_bit_exact(tmp_path):
    s = series()
    save_checkpoint(tmp_path / "c", s)
    back, bits = load_checkpoint(tmp_path / "c")
    assert bits == 300
    assert back.coeffs == s.coeffs
    assert all(c.precision == 300 for c in back.coeffs)


def edit(path, old, new):
    path.write_text(path.read_text().replace(old, new))


@pytest.mark.parametrize("old,new,msg", [
    ("basis cheb-even-halved", "basis monomial", "basis"),
    ("format 1", "format 2", "format version"),
    ("n 4", "n 5", "found 4"),
])
def test_header_mismatch(tmp_path, old, new, msg):
    p = tmp_path / "c"
    save_checkpoint(p, series())
    edit(p, old, new)
    with pytest.raises(CheckpointError, match=msg):
        load_checkpoint(p)


def test_truncated(tmp_path):
    p = tmp_path / "c"
    save_checkpoint(p, series())
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(p)


def test_malformed_line_is_named(tmp_path):
    p = tmp_path / "c"
    save_checkpoint(p, series())
    lines = p.read_text().splitlines()
    lines[7] = "0xZZp3"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(CheckpointError, match="line 8"):
        load_checkpoint(p)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "nope")


def test_dir_precision_policy(tmp_path):
    store = CheckpointDir(tmp_path)
    store.save(series(300), 300)
    assert store.load(4, 400) is None
    low = store.load(4, 200)
    assert low is not None and all(c.precision == 200 for c in low.coeffs)
    # a less precise save does not overwrite
    store.save(series(100), 100)
    assert load_checkpoint(store.path(4))[1] == 300


def test_rung_reuse(tmp_path, caplog):
    store = CheckpointDir(tmp_path)
    solve_g(10, checkpoints=store)
    assert store.path(10).exists()
    with caplog.at_level(logging.INFO, logger="feigenbaum"):
        sol = solve_g(47, checkpoints=store)
    assert [r.n for r in sol.rungs] == [10, 47]
    assert sol.rungs[0].reused and not sol.rungs[1].reused
    assert any("rung n=10: reusing checkpoint" in r.getMessage() for r in caplog.records)
