"""seasnip: multi-fidelity extreme ship-response estimation.

Generates irregular seaways, runs a paired low/high-fidelity pitch-heave
surrogate, trains a snippet-based LSTM to correct the low-fidelity output
near large pitch events, and evaluates extreme-value statistics of the
corrected predictions.
"""

__version__ = "0.1.0"

from .seaway import SeaStateConfig, SpectrumDiscretization, TimeSeries
from .hydro import HullConfig, MotionRecord

__all__ = [
    "__version__",
    "SeaStateConfig",
    "SpectrumDiscretization",
    "TimeSeries",
    "HullConfig",
    "MotionRecord",
]
