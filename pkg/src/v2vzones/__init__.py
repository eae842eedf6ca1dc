"""Zone-based dynamic radio-resource allocation for V2V links on a street grid."""

__version__ = "0.1.0"

from .config import SimConfig, parse_config
from .engine import MetricsLog, Simulation, summarize

__all__ = ["SimConfig", "parse_config", "MetricsLog", "Simulation", "summarize",
           "__version__"]
