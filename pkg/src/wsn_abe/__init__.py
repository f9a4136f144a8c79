"""ECC / key-policy ABE user access control for WSNs, with an attack harness."""
from .ecc import P160, TOY17, CurveParams, Point
from .errors import SchemeError
from .harness import SimConfig, Transcript, eavesdrop_view, run_scenario

__all__ = ["P160", "TOY17", "CurveParams", "Point", "SchemeError", "SimConfig", "Transcript",
           "eavesdrop_view", "run_scenario"]
__version__ = "0.1.0"
