"""Identities and unit handling of the generalized response matrix."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ictasim.frankenstein import (
    FrankensteinMatrix,
    PortKind,
    SingularConversionError,
    export_frankenstein,
    from_frankenstein,
    junction_row,
    klmn,
    to_frankenstein,
)


def reflection(z_load, z0):
    return (z_load - z0) / (z_load + z0)


def test_klmn_bias_port_values():
    k, l, m, n = klmn([PortKind.voltage_bias()], z0=50.0)
    assert_allclose([k[0], l[0], m[0], n[0]], [0.02, -0.02, 1.0, 1.0])
    k, l, m, n = klmn([PortKind.current_bias()], z0=50.0)
    assert_allclose([k[0], l[0], m[0], n[0]], [1.0, 1.0, 0.02, -0.02])


def test_klmn_wave_port_values():
    # Matched wave port degenerates to the scattering identity.
    k, l, m, n = klmn([PortKind.wave(50.0)], z0=50.0)
    assert_allclose([k[0], l[0], m[0], n[0]], [0.0, 1.0, 1.0, 0.0])
    k, l, m, n = klmn([PortKind.wave(100.0)], z0=50.0)
    assert_allclose([k[0], l[0], m[0], n[0]], [-0.5, 1.5, 1.5, -0.5])


def test_klmn_rejects_bad_reference():
    with pytest.raises(ValueError):
        klmn([PortKind.wave(50.0)], z0=0.0)
    with pytest.raises(ValueError):
        klmn([PortKind.wave(50.0)], z0=np.inf)


def test_port_kind_validation():
    with pytest.raises(ValueError):
        PortKind("thevenin")
    with pytest.raises(ValueError):
        PortKind.wave(-5.0)
    with pytest.raises(ValueError):
        PortKind("voltage-bias", impedance=50.0)


def test_port_kind_units():
    assert PortKind.wave(50.0).input_unit == "V"
    assert PortKind.wave(50.0).output_unit == "V"
    assert PortKind.voltage_bias().input_unit == "V"
    assert PortKind.voltage_bias().output_unit == "A"
    assert PortKind.current_bias().input_unit == "A"
    assert PortKind.current_bias().output_unit == "V"


def one_port_f(z_load, kind, z0=50.0):
    s = np.array([[[reflection(z_load, z0)]]])
    return to_frankenstein(s, [kind], z0=z0).values[0, 0, 0]


def test_voltage_bias_one_port_is_admittance():
    for z_load in (50.0, 10.0 + 3j, 200.0 - 80j, 0.5 + 100j):
        f = one_port_f(z_load, PortKind.voltage_bias())
        assert_allclose(f, 1.0 / z_load, rtol=1e-12)


def test_current_bias_one_port_is_impedance():
    for z_load in (50.0, 10.0 + 3j, 200.0 - 80j, 0.5 + 100j):
        f = one_port_f(z_load, PortKind.current_bias())
        assert_allclose(f, z_load, rtol=1e-12)


def test_wave_one_port_is_renormalized_reflection():
    for z_load in (50.0, 10.0 + 3j, 200.0 - 80j):
        for z_port in (25.0, 50.0, 93.0):
            f = one_port_f(z_load, PortKind.wave(z_port))
            assert_allclose(f, reflection(z_load, z_port), rtol=1e-12, atol=1e-15)


def test_through_line_to_current_bias_port():
    # Ideal through with the far port driven by a current source: the source
    # sees the matched port impedance, an incident wave doubles at the
    # effectively open far end, and the near port sees full reflection.
    z0 = 50.0
    s = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    kinds = [PortKind.wave(z0), PortKind.current_bias()]
    f = to_frankenstein(s, kinds, z0=z0).values[0]
    assert_allclose(f, [[1.0, z0], [2.0, z0]], atol=1e-12)


def test_round_trip_random_networks():
    rng = np.random.default_rng(7)
    choices = [PortKind.wave(50.0), PortKind.wave(80.0), PortKind.voltage_bias(), PortKind.current_bias()]
    for _ in range(25):
        n = rng.integers(1, 5)
        kinds = [choices[i] for i in rng.integers(0, len(choices), n)]
        s = 0.4 * (rng.standard_normal((3, n, n)) + 1j * rng.standard_normal((3, n, n)))
        f = to_frankenstein(s, kinds, z0=60.0)
        assert_allclose(from_frankenstein(f), s, rtol=1e-10, atol=1e-12)


def test_reference_impedance_independence():
    # The same physical network, expressed against two different scattering
    # references, must convert to the identical response matrix.
    rng = np.random.default_rng(11)
    kinds = [PortKind.wave(60.0), PortKind.current_bias(), PortKind.voltage_bias()]
    for _ in range(10):
        c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        z_net = c + c.T + 6.0 * np.eye(3)
        eye = np.eye(3)
        f_per_ref = []
        for z0 in (50.0, 75.0):
            s = np.linalg.solve((z_net + z0 * eye).T, (z_net - z0 * eye).T).T
            f_per_ref.append(to_frankenstein(s[np.newaxis], kinds, z0=z0).values)
        assert_allclose(f_per_ref[0], f_per_ref[1], rtol=1e-10, atol=1e-12)


def test_singular_conversion_names_frequency():
    # Voltage-biasing an ideal short is ill-posed: (M + N S) drops rank.
    s = np.array([[[-1.0]], [[0.0]]], dtype=complex)
    with pytest.raises(SingularConversionError) as err:
        to_frankenstein(s, [PortKind.voltage_bias()], frequencies=np.array([5e9, 6e9]))
    assert "5e+09 Hz" in str(err.value)
    assert_allclose(err.value.frequencies, [5e9])


def test_matrix_metadata_and_units():
    kinds = (PortKind.wave(50.0), PortKind.current_bias(), PortKind.voltage_bias())
    values = np.zeros((2, 3, 3), dtype=complex)
    f = FrankensteinMatrix(values, kinds, z0=50.0, port_names=("signal", "junction", "dc"))
    assert f.n_ports == 3
    assert f.port_index("junction") == 1
    with pytest.raises(KeyError):
        f.port_index("missing")
    assert f.input_units() == ("V", "A", "V")
    assert f.output_units() == ("V", "V", "A")
    assert f.entry_unit(1, 1) == "V/A"
    assert f.entry_unit(1, 0) == "V/V"
    assert f.entry_unit(2, 1) == "A/A"


def test_matrix_validation_errors():
    kinds = (PortKind.wave(50.0), PortKind.current_bias())
    with pytest.raises(ValueError):
        FrankensteinMatrix(np.zeros((2, 3, 3)), kinds, z0=50.0)
    with pytest.raises(ValueError):
        FrankensteinMatrix(np.zeros((2, 2, 2)), kinds, z0=50.0, port_names=("a", "a"))
    with pytest.raises(ValueError):
        FrankensteinMatrix(np.zeros((2, 2, 2)), kinds, z0=50.0, frequencies=np.zeros(3))


def _toy_matrix():
    rng = np.random.default_rng(3)
    values = rng.standard_normal((3, 3, 3)) + 1j * rng.standard_normal((3, 3, 3))
    kinds = (PortKind.wave(50.0), PortKind.current_bias(), PortKind.voltage_bias())
    return FrankensteinMatrix(
        values,
        kinds,
        z0=50.0,
        frequencies=np.array([0.0, 1e6, 2e6]),
        port_names=("signal", "junction", "dc"),
    )


def test_junction_row_extraction():
    f = _toy_matrix()
    row = junction_row(f)
    assert row.junction_index == 1
    assert_allclose(row.f_jj, f.values[:, 1, 1])
    # Junction column is zeroed so the drive contraction skips the unknown.
    assert np.all(row.source_columns[:, 1] == 0.0)
    assert_allclose(row.source_columns[1:, 0], f.values[1:, 1, 0])
    # DC stiffening: the bias column vanishes at f = 0 only.
    assert row.source_columns[0, 2] == 0.0
    assert_allclose(row.source_columns[1:, 2], f.values[1:, 1, 2])
    assert_allclose(row.source_columns[0, 0], f.values[0, 1, 0])


def test_junction_row_port_selection_errors():
    f = _toy_matrix()
    with pytest.raises(ValueError):
        junction_row(f, port="signal")
    two_current = FrankensteinMatrix(
        f.values,
        (PortKind.current_bias(), PortKind.current_bias(), PortKind.voltage_bias()),
        z0=50.0,
        frequencies=f.frequencies,
    )
    with pytest.raises(ValueError):
        junction_row(two_current)
    no_freqs = FrankensteinMatrix(f.values, f.kinds, z0=50.0)
    with pytest.raises(ValueError):
        junction_row(no_freqs)


def test_export_round_trip(tmp_path):
    f = _toy_matrix()
    path = tmp_path / "response.csv"
    export_frankenstein(f, path)
    header = path.read_text().splitlines()[0].split(",")
    assert header[0] == "frequency_hz"
    assert "re_junction_junction" in header
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert_allclose(data[:, 0], f.frequencies)
    rebuilt = data[:, 1::2] + 1j * data[:, 2::2]
    assert_allclose(rebuilt.reshape(f.values.shape), f.values, rtol=1e-10)
