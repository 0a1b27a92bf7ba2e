"""Circuit-simulation engine: netlist parsing, MNA with Newton-Raphson,
DC operating point and sweep, and fixed-step transient with failure
halving."""

from .analysis import (AnalysisSpec, SimResult, TransientError, dc_sweep,
                       operating_point, run_analysis, transient)
from .circuit import (Capacitor, Circuit, CircuitError, FloatGateElement,
                      ISource, Mosfet, PulseSpec, Resistor, RramElement,
                      VSource)
from .mna import ConvergenceError, SystemLayout, Tolerances
from .netlist import (NetlistError, ParseResult, parse_netlist,
                      parse_number, serialize_netlist)

__all__ = [
    "AnalysisSpec", "SimResult", "TransientError", "dc_sweep",
    "operating_point", "run_analysis", "transient",
    "Capacitor", "Circuit", "CircuitError", "FloatGateElement", "ISource",
    "Mosfet", "PulseSpec", "Resistor", "RramElement", "VSource",
    "ConvergenceError", "SystemLayout", "Tolerances",
    "NetlistError", "ParseResult", "parse_netlist", "parse_number",
    "serialize_netlist",
]
