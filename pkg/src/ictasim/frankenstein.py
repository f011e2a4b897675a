"""Linear response matrices for networks with mixed port boundary conditions.

A passive multiport is usually described by its voltage scattering matrix S,
referenced to a common impedance Z0.  When some ports are instead held by
ideal sources, the natural response object generalizes S: each port is either

* a wave port (input and output are propagating voltage waves at the port
  impedance),
* a voltage-bias port (input is the applied voltage, output is the current
  drawn by the circuit), or
* a current-bias port (input is the injected current, output is the voltage
  developed at the port).

The generalized matrix, conventionally called the Frankenstein matrix F,
relates these mixed inputs and outputs through a^out = F a^in.  It is obtained
from S by F = (K + L S)(M + N S)^-1 with diagonal matrices K, L, M, N whose
entries depend only on the port kind and the reference impedance.  Entries of
F carry non-uniform units (e.g. V/A on a current-bias diagonal); unit tags are
tracked so that wiring mistakes surface in tests rather than in results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .circuit import FrequencyGrid

WAVE = "wave"
VOLTAGE_BIAS = "voltage-bias"
CURRENT_BIAS = "current-bias"

_KINDS = (WAVE, VOLTAGE_BIAS, CURRENT_BIAS)

# Condition number of (M + N S) above which the conversion is refused.
COND_LIMIT = 1e12


class SingularConversionError(ValueError):
    """Raised when (M + N S) is numerically singular at some frequency."""

    def __init__(self, message: str, frequencies=None):
        super().__init__(message)
        self.frequencies = frequencies


@dataclass(frozen=True)
class PortKind:
    """Boundary condition of one port.

    Parameters
    ----------
    kind : str
        One of "wave", "voltage-bias", "current-bias".
    impedance : float, optional
        Port impedance in ohm.  Required for wave ports, meaningless for
        bias ports.
    """

    kind: str
    impedance: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown port kind {self.kind!r}")
        if self.kind == WAVE:
            if self.impedance is None or not np.isfinite(self.impedance) or self.impedance <= 0:
                raise ValueError("wave port requires a finite positive impedance")
        elif self.impedance is not None:
            raise ValueError(f"{self.kind} port takes no impedance")

    @classmethod
    def wave(cls, impedance: float = 50.0) -> "PortKind":
        return cls(WAVE, float(impedance))

    @classmethod
    def voltage_bias(cls) -> "PortKind":
        return cls(VOLTAGE_BIAS)

    @classmethod
    def current_bias(cls) -> "PortKind":
        return cls(CURRENT_BIAS)

    @property
    def is_wave(self) -> bool:
        return self.kind == WAVE

    @property
    def input_unit(self) -> str:
        return "A" if self.kind == CURRENT_BIAS else "V"

    @property
    def output_unit(self) -> str:
        return "A" if self.kind == VOLTAGE_BIAS else "V"


def klmn(kinds: Sequence[PortKind], z0: float = 50.0):
    """Diagonals of the conversion matrices K, L, M, N.

    Parameters
    ----------
    kinds : sequence of PortKind
        Boundary condition per port.
    z0 : float
        Reference impedance of the scattering matrix in ohm.

    Returns
    -------
    k, l, m, n : ndarray
        Length-n_ports float arrays holding the diagonal entries.
    """
    if z0 <= 0 or not np.isfinite(z0):
        raise ValueError("reference impedance must be positive and finite")
    n_ports = len(kinds)
    k = np.empty(n_ports)
    l = np.empty(n_ports)
    m = np.empty(n_ports)
    n = np.empty(n_ports)
    for i, pk in enumerate(kinds):
        if pk.kind == VOLTAGE_BIAS:
            k[i], l[i], m[i], n[i] = 1.0 / z0, -1.0 / z0, 1.0, 1.0
        elif pk.kind == CURRENT_BIAS:
            k[i], l[i], m[i], n[i] = 1.0, 1.0, 1.0 / z0, -1.0 / z0
        else:
            z = pk.impedance / z0
            k[i] = n[i] = 0.5 * (1.0 - z)
            l[i] = m[i] = 0.5 * (1.0 + z)
    return k, l, m, n


@dataclass(frozen=True)
class FrankensteinMatrix:
    """Per-frequency generalized response matrix with port metadata.

    Attributes
    ----------
    values : ndarray
        Complex array of shape (n_freq, n_ports, n_ports).
    kinds : tuple of PortKind
        Boundary condition per port, in matrix order.
    z0 : float
        Reference impedance the source scattering matrix used.
    frequencies : ndarray or None
        Frequency in Hz per leading index, when known.
    grid : FrequencyGrid or None
        Uniform grid handle when the matrix was sampled on one.
    port_names : tuple of str
        Unique name per port.
    """

    values: np.ndarray
    kinds: tuple[PortKind, ...]
    z0: float
    frequencies: np.ndarray | None = None
    grid: "FrequencyGrid | None" = None
    port_names: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 2:
            values = values[np.newaxis]
        if values.ndim != 3 or values.shape[-1] != values.shape[-2]:
            raise ValueError("values must have shape (n_freq, n_ports, n_ports)")
        if values.shape[-1] != len(self.kinds):
            raise ValueError("port kind count does not match matrix size")
        object.__setattr__(self, "values", values)
        names = self.port_names or tuple(f"p{i}" for i in range(len(self.kinds)))
        if len(names) != len(self.kinds) or len(set(names)) != len(names):
            raise ValueError("port names must be unique, one per port")
        object.__setattr__(self, "port_names", tuple(names))
        if self.frequencies is not None:
            freqs = np.asarray(self.frequencies, dtype=float)
            if freqs.shape != (values.shape[0],):
                raise ValueError("frequency axis does not match matrix count")
            object.__setattr__(self, "frequencies", freqs)

    @property
    def n_ports(self) -> int:
        return len(self.kinds)

    def port_index(self, name: str) -> int:
        try:
            return self.port_names.index(name)
        except ValueError:
            raise KeyError(f"no port named {name!r}") from None

    def input_units(self) -> tuple[str, ...]:
        return tuple(pk.input_unit for pk in self.kinds)

    def output_units(self) -> tuple[str, ...]:
        return tuple(pk.output_unit for pk in self.kinds)

    def entry_unit(self, row: int, col: int) -> str:
        """Unit tag of F[row, col], e.g. 'V/A' for a current-bias diagonal."""
        return f"{self.kinds[row].output_unit}/{self.kinds[col].input_unit}"


def to_frankenstein(
    s: np.ndarray,
    kinds: Sequence[PortKind],
    z0: float = 50.0,
    frequencies: np.ndarray | None = None,
    grid: "FrequencyGrid | None" = None,
    port_names: Sequence[str] | None = None,
    cond_limit: float = COND_LIMIT,
) -> FrankensteinMatrix:
    """Convert a scattering matrix to the generalized response matrix.

    Parameters
    ----------
    s : ndarray
        Scattering matrix, shape (n_ports, n_ports) or
        (n_freq, n_ports, n_ports), referenced to z0.
    kinds : sequence of PortKind
        Boundary condition per port.
    z0 : float
        Reference impedance of s in ohm.
    frequencies : ndarray, optional
        Frequency axis, used in error messages and for bias stiffening.
    grid : FrequencyGrid, optional
        Grid handle forwarded to the result.
    port_names : sequence of str, optional
        Names forwarded to the result.
    cond_limit : float
        Condition number of (M + N S) above which the conversion raises
        SingularConversionError naming the offending frequency.

    Returns
    -------
    FrankensteinMatrix
    """
    s = np.asarray(s, dtype=complex)
    squeeze = s.ndim == 2
    if squeeze:
        s = s[np.newaxis]
    if s.ndim != 3 or s.shape[-1] != s.shape[-2] or s.shape[-1] != len(kinds):
        raise ValueError("scattering matrix shape does not match port kinds")
    k, l, m, n = klmn(kinds, z0)
    eye = np.eye(len(kinds))
    # K, L, M, N are diagonal: left multiplication scales rows.
    left = k[:, None] * eye + l[:, None] * s
    right = m[:, None] * eye + n[:, None] * s
    cond = np.linalg.cond(right)
    bad = np.nonzero(~(cond < cond_limit))[0]
    if bad.size:
        if frequencies is not None:
            where = ", ".join(f"{frequencies[i]:g} Hz" for i in bad[:5])
        else:
            where = ", ".join(f"index {i}" for i in bad[:5])
        more = "" if bad.size <= 5 else f" (+{bad.size - 5} more)"
        raise SingularConversionError(
            f"(M + N S) is singular beyond condition {cond_limit:g} at {where}{more}",
            frequencies=None if frequencies is None else frequencies[bad],
        )
    # F right = left  =>  F = left right^-1, via the transposed solve.
    values = np.linalg.solve(np.swapaxes(right, -1, -2), np.swapaxes(left, -1, -2))
    values = np.swapaxes(values, -1, -2)
    return FrankensteinMatrix(
        values=values,
        kinds=tuple(kinds),
        z0=float(z0),
        frequencies=frequencies,
        grid=grid,
        port_names=tuple(port_names) if port_names is not None else (),
    )


def from_frankenstein(f: FrankensteinMatrix) -> np.ndarray:
    """Recover the scattering matrix from a generalized response matrix.

    Solves (L - F N) S = F M - K for S, the inverse of `to_frankenstein`.
    Returns an (n_freq, n_ports, n_ports) complex array referenced to f.z0.
    """
    k, l, m, n = klmn(f.kinds, f.z0)
    eye = np.eye(f.n_ports)
    # L diagonal minus F scaled per column by N.
    lhs = l[:, None] * eye - f.values * n[None, None, :]
    rhs = f.values * m[None, None, :] - k[:, None] * eye
    return np.linalg.solve(lhs, rhs)


@dataclass(frozen=True)
class JunctionRow:
    """The single-row view of F needed by the nonlinear solver.

    `f_jj` is the junction-port diagonal (an impedance per frequency) and
    `source_columns` holds the remaining row entries with the junction column
    zeroed, so that the linear drive is a plain contraction with the incident
    amplitudes.  The DC stiffening (junction row, voltage-bias columns forced
    to 0 at f = 0) is already applied.
    """

    junction_index: int
    f_jj: np.ndarray
    source_columns: np.ndarray
    kinds: tuple[PortKind, ...]
    port_names: tuple[str, ...]
    frequencies: np.ndarray
    grid: "FrequencyGrid | None" = None


def junction_row(f: FrankensteinMatrix, port: str | int | None = None) -> JunctionRow:
    """Extract the junction-port row of F for the fixed-point iteration.

    Parameters
    ----------
    f : FrankensteinMatrix
    port : str or int, optional
        Junction port name or index.  Defaults to the unique current-bias
        port; ambiguous or missing classification raises ValueError.

    Returns
    -------
    JunctionRow
        With the voltage-bias columns of the row forced to exactly 0 at
        f = 0, so the bias stays stiff (the Josephson frequency must not
        react to the DC current drawn).
    """
    if f.frequencies is None:
        raise ValueError("junction row requires a frequency axis on F")
    if port is None:
        current_ports = [i for i, pk in enumerate(f.kinds) if pk.kind == CURRENT_BIAS]
        if len(current_ports) != 1:
            raise ValueError(
                f"expected exactly one current-bias port, found {len(current_ports)}"
            )
        j = current_ports[0]
    else:
        j = f.port_index(port) if isinstance(port, str) else int(port)
    if f.kinds[j].kind != CURRENT_BIAS:
        raise ValueError(f"port {f.port_names[j]!r} is not classified current-bias")
    row = f.values[:, j, :].copy()
    f_jj = row[:, j].copy()
    row[:, j] = 0.0
    at_dc = np.nonzero(f.frequencies == 0.0)[0]
    for i, pk in enumerate(f.kinds):
        if pk.kind == VOLTAGE_BIAS:
            row[at_dc, i] = 0.0
    return JunctionRow(
        junction_index=j,
        f_jj=f_jj,
        source_columns=row,
        kinds=f.kinds,
        port_names=f.port_names,
        frequencies=f.frequencies,
        grid=f.grid,
    )


def export_frankenstein(f: FrankensteinMatrix, path) -> None:
    """Write F to a columnar text file: frequency plus Re/Im per entry."""
    if f.frequencies is None:
        raise ValueError("export requires a frequency axis on F")
    names = f.port_names
    columns = [f.frequencies]
    header = ["frequency_hz"]
    for i in range(f.n_ports):
        for j in range(f.n_ports):
            columns.append(f.values[:, i, j].real)
            columns.append(f.values[:, i, j].imag)
            header.append(f"re_{names[i]}_{names[j]}")
            header.append(f"im_{names[i]}_{names[j]}")
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt="%.11e", delimiter=",", header=",".join(header), comments="")
