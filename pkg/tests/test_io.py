import numpy as np
import pytest

from quasimod import io
from quasimod.matrices import LatticeMatrix
from quasimod.weights import Lattice, make_lattice


def test_matrix_csv_round_trip(tmp_path, rng):
    lat = make_lattice((0.5, 2.0), ((-1, 1), (0, 2)))
    A = LatticeMatrix(lat, rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))
    io.write_matrix_csv(tmp_path / "a.csv", A)
    B = io.read_matrix_csv(tmp_path / "a.csv")
    assert B.lattice == lat
    np.testing.assert_array_equal(B.entries, A.entries)


def test_cyclic_matrix_npz_round_trip(tmp_path, rng):
    lat = Lattice.cyclic((1.0,), (6,))
    A = LatticeMatrix(lat, rng.standard_normal((6, 6)))
    io.save_matrix_npz(tmp_path / "a.npz", A)
    B = io.load_matrix_npz(tmp_path / "a.npz")
    assert B.lattice.period == (6,)
    np.testing.assert_array_equal(B.entries, A.entries)


def test_matrix_csv_without_header_uses_unit_lattice(tmp_path):
    (tmp_path / "m.csv").write_text("1,0,2,0\n3,0,4,1\n")
    A = io.read_matrix_csv(tmp_path / "m.csv")
    assert A.lattice.size == 2
    assert A.entries[1, 1] == 4 + 1j


def test_matrix_csv_rejects_odd_columns(tmp_path):
    (tmp_path / "m.csv").write_text("# theta=[1]\n# box=[[0,0]]\n1,2,3\n")
    with pytest.raises(ValueError):
        io.read_matrix_csv(tmp_path / "m.csv")


def test_grid_and_symbol_round_trip(tmp_path, rng):
    f = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    io.write_grid_csv(tmp_path / "f.csv", f)
    np.testing.assert_array_equal(io.read_grid_csv(tmp_path / "f.csv"), f)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    io.write_symbol_csv(tmp_path / "a.csv", a)
    np.testing.assert_array_equal(io.read_symbol_csv(tmp_path / "a.csv"), a)
    io.save_array_npz(tmp_path / "a.npz", a)
    np.testing.assert_array_equal(io.load_array_npz(tmp_path / "a.npz"), a)
