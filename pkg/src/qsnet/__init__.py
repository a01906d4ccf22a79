"""Linear quantum stochastic networks on rings with translation-invariant
coupling: stability, covariance spectra, costs and entanglement."""

__version__ = "0.1.0"

from .model import NetworkSpec, NodeBlocks, build_blocks, load_network, validate_spec  # noqa: E402
from .spectral import stability_sweep, steady_spectrum, symbol  # noqa: E402
from .lmi import find_certificate, verify_certificate  # noqa: E402
from .performance import WeightingSequence, finite_cost, thermodynamic_cost  # noqa: E402
from .entanglement import entanglement_profile, log_negativity, separability_verdict  # noqa: E402
from .ensemble import EnsembleConfig, run_ensemble  # noqa: E402

__all__ = [
    "NetworkSpec", "NodeBlocks", "build_blocks", "load_network", "validate_spec",
    "stability_sweep", "steady_spectrum", "symbol",
    "find_certificate", "verify_certificate",
    "WeightingSequence", "finite_cost", "thermodynamic_cost",
    "entanglement_profile", "log_negativity", "separability_verdict",
    "EnsembleConfig", "run_ensemble",
]
