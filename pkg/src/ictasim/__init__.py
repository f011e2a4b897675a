"""Semiclassical simulator for DC-voltage-biased Josephson parametric amplifiers."""

__version__ = "0.1.0"

from ictasim.circuit import (
    DEFAULT_GRID,
    Element,
    FrequencyGrid,
    IctaParams,
    Netlist,
    build_icta,
    emission_fom,
    frankenstein_matrix,
    load_netlist,
    s_matrix,
    save_netlist,
    z_jj,
)
from ictasim.design import (
    BandReport,
    DesignTargets,
    FluxBias,
    band_check,
    canonical_icta,
    ic_of_flux,
)
from ictasim.frankenstein import (
    FrankensteinMatrix,
    PortKind,
    SingularConversionError,
    from_frankenstein,
    junction_row,
    to_frankenstein,
)
from ictasim.solver import (
    BiasPoint,
    DivergenceError,
    PowerBalance,
    SolutionState,
    Stimulus,
    Tone,
    bias_voltage,
    dbm_to_watts,
    gain,
    josephson_frequency,
    power_balance,
    solve,
    watts_to_dbm,
)
from ictasim.sweeps import (
    CompressionCurve,
    EmissionResult,
    FitFailedError,
    GainMap,
    GainProfile,
    NotFittableError,
    RappFit,
    SolverOptions,
    compression_sweep,
    gain_map_fdc,
    gain_map_ic,
    gain_profile,
    p1db,
    photon_rate,
    plateau_metrics,
    pump_emission,
    rapp_fit,
    rapp_gain_db,
    raw_p1db,
)

__all__ = [
    "DEFAULT_GRID",
    "BandReport",
    "BiasPoint",
    "CompressionCurve",
    "DesignTargets",
    "DivergenceError",
    "Element",
    "EmissionResult",
    "FitFailedError",
    "FluxBias",
    "FrankensteinMatrix",
    "FrequencyGrid",
    "GainMap",
    "GainProfile",
    "IctaParams",
    "Netlist",
    "NotFittableError",
    "PortKind",
    "PowerBalance",
    "RappFit",
    "SingularConversionError",
    "SolutionState",
    "SolverOptions",
    "Stimulus",
    "Tone",
    "band_check",
    "bias_voltage",
    "build_icta",
    "canonical_icta",
    "compression_sweep",
    "dbm_to_watts",
    "emission_fom",
    "frankenstein_matrix",
    "from_frankenstein",
    "gain",
    "gain_map_fdc",
    "gain_map_ic",
    "gain_profile",
    "ic_of_flux",
    "josephson_frequency",
    "junction_row",
    "load_netlist",
    "p1db",
    "photon_rate",
    "plateau_metrics",
    "power_balance",
    "pump_emission",
    "rapp_fit",
    "rapp_gain_db",
    "raw_p1db",
    "s_matrix",
    "save_netlist",
    "solve",
    "to_frankenstein",
    "watts_to_dbm",
    "z_jj",
    "__version__",
]
