import pytest

from vsl.absorption.utils import StreamingMovingAverageByCount, make_dirs, ordered_map, write_text_synced


def test_moving_average_window():
    ma = StreamingMovingAverageByCount(3)
    assert [ma.append(v) for v in [1.0, 2.0, 3.0, 4.0]] == pytest.approx([1.0, 1.5, 2.0, 3.0])
    with pytest.raises(ValueError):
        StreamingMovingAverageByCount(0)


def test_ordered_map_keeps_order():
    def work(i):
        return i * i

    assert ordered_map(work, range(20), threads=4) == [i * i for i in range(20)]
    assert ordered_map(work, range(5)) == [0, 1, 4, 9, 16]


def test_make_dirs_over_file(tmp_path):
    write_text_synced(tmp_path / "a" / "f.txt", "x")
    assert (tmp_path / "a" / "f.txt").read_text() == "x"
    with pytest.raises(OSError):
        make_dirs(tmp_path / "a" / "f.txt")
