"""Distributed platoon control under deterministic and probabilistic quantization."""

from .config import ScenarioConfig, load_config
from .errors import (
    ConfigurationError,
    DivergenceError,
    NumericalError,
    PlatoonError,
    ProtocolError,
    SynthesisError,
)
from .quantizer import QuantizerKind, QuantizerSpec
from .sim import SimConfig, SimTrace, run, run_ensemble
from .synthesis import GainSet, synthesize, uub_bound
from .topology import CommTopology, TopologyKind, build_standard, validate
from .vehicle import FormationSpec, HeadProfile, VehicleParams, linear_model

__version__ = "0.1.0"
