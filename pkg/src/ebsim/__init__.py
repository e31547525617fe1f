"""Simulator for a quantum-dot spin entanglement beam splitter in a double-sided cavity."""
from .scattering import (
    CavityParams,
    ScatterAmplitudes,
    SpectrumTable,
    cold_amplitudes,
    coupled_amplitudes,
    critical_photon_number,
    scatter_amplitudes,
    sweep_spectra,
)
from .channel import (
    DephasingParams,
    EBSChannel,
    FidelityReport,
    PortOutcome,
    amplitude_fidelities,
    apply_dephasing,
    apply_hole_mixing,
    build_channel,
    ideal_channel,
    scatter,
)
from .protocols import (
    ProtocolResult,
    photon_to_spin_transfer,
    qnd_spin_readout,
    remote_spin_entanglement,
    spin_to_photon_transfer,
    two_photon_bell,
)

__version__ = "0.1.0"
