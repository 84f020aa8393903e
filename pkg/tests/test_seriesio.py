import numpy as np
import pytest

from specdetect import IngestionError, TimeSeries
from specdetect.seriesio import format_table, load_series, read_table, write_series, write_table


def test_two_column(tmp_path):
    f = tmp_path / "a.txt"
    t = 60.0 * np.arange(1, 9)
    np.savetxt(f, np.c_[t, np.sin(t)], header="units=m/s")
    s = load_series(f)
    assert s.dt == pytest.approx(60.0) and s.n == 8
    np.testing.assert_allclose(s.samples, np.sin(t))


def test_value_only_with_header(tmp_path):
    f = tmp_path / "b.txt"
    f.write_text("# dt=20\n# units=m/s\n" + "\n".join(str(v) for v in range(6)) + "\n")
    s = load_series(f)
    assert s.dt == 20.0
    np.testing.assert_array_equal(s.samples, np.arange(6.0))


def test_comma_separated(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("# dt: 2\n2,1.5\n4,2.5\n6,3.5\n8,4.5\n")
    assert load_series(f).dt == 2.0


def test_jitter_names_row(tmp_path):
    f = tmp_path / "j.txt"
    t = 60.0 * np.arange(1, 9)
    t[5] += 60.0 * 1e-4
    f.write_text("# header\n" + "".join(f"{float(a)!r} {b}\n" for a, b in zip(t, range(8))))
    with pytest.raises(IngestionError, match=r"j\.txt:7"):
        load_series(f)


def test_small_jitter_accepted(tmp_path):
    f = tmp_path / "ok.txt"
    t = 60.0 * np.arange(1, 9) * (1 + 1e-9 * np.r_[0, 1, -1, 0, 1, 0, 0, 0])
    f.write_text("".join(f"{float(a)!r} 1.0\n" for a in t))
    assert load_series(f).n == 8


@pytest.mark.parametrize("bad", ["nan", "inf", "-inf"])
def test_non_finite(tmp_path, bad):
    f = tmp_path / "n.txt"
    f.write_text(f"# dt=1\n1\n2\n{bad}\n4\n")
    with pytest.raises(IngestionError, match=":4"):
        load_series(f)


@pytest.mark.parametrize("text", [
    "1\n2\n3\n4\n",              # no dt
    "# dt=1\n1 2 3\n",           # three columns
    "# dt=1\n1\n2 3\n",          # ragged
    "# dt=1\n1\nabc\n",          # unparsable
    "# dt=1\n",                  # empty
    "# dt=1\n1\n2\n3\n",         # odd length
    "# dt=5\n1 0\n2 0\n3 0\n4 0\n",  # header disagrees with time column
])
def test_malformed(tmp_path, text):
    f = tmp_path / "m.txt"
    f.write_text(text)
    with pytest.raises(IngestionError):
        load_series(f)


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        load_series(tmp_path / "nope.txt")


@pytest.mark.parametrize("with_time", [True, False])
def test_series_roundtrip(tmp_path, with_time, rng):
    s = TimeSeries(rng.standard_normal(16), 37.5)
    f = tmp_path / "r.txt"
    write_series(f, s, units="m/s", with_time=with_time)
    back = load_series(f)
    np.testing.assert_array_equal(back.samples, s.samples)
    assert back.dt == pytest.approx(s.dt, rel=1e-12)


def test_table_roundtrip(tmp_path):
    rows = [("t_tilde", 5, 0.1, None, "H1"), ("fisher", 100, 1 / 3, 2.5e-300, "H0")]
    f = write_table(tmp_path / "t.csv", ("test", "L", "x", "y", "d"), rows, {"seed": 3})
    meta, back = read_table(f)
    assert meta == {"seed": "3"}
    assert back[0] == {"test": "t_tilde", "L": 5, "x": 0.1, "y": None, "d": "H1"}
    assert back[1]["x"] == 1 / 3 and back[1]["y"] == 2.5e-300


def test_table_format_stable():
    text = format_table(("a", "b"), [(1, 0.1), (True, np.float64(2.0))], {"k": "v"})
    assert text == "# k=v\na,b\n1,0.1\ntrue,2.0\n"
