"""Neuromorphic harness: differential-RRAM crossbars, write-verify
programming, hardware-in-the-loop training, and the device-constrained
macromodel trainer."""

from .crossbar import (AndResult, CrossbarSpec, DeviceReport, ProgramReport,
                       TrainConfig, build_crossbar, get_states,
                       program_weights, read_outputs, set_states,
                       synapse_devices, train_and_gate,
                       train_and_gate_software, write_verify_device)
from .macromodel import (MacromodelConfig, TrainReport, quantize_levels,
                         synapse_audit, train_macromodel)
from .mnist import IdxFormatError, MnistData, find_mnist, load_idx_file, \
    load_mnist_idx

__all__ = [
    "AndResult", "CrossbarSpec", "DeviceReport", "ProgramReport",
    "TrainConfig", "build_crossbar", "get_states", "program_weights",
    "read_outputs", "set_states", "synapse_devices", "train_and_gate",
    "train_and_gate_software", "write_verify_device",
    "MacromodelConfig", "TrainReport", "quantize_levels", "synapse_audit",
    "train_macromodel",
    "IdxFormatError", "MnistData", "find_mnist", "load_idx_file",
    "load_mnist_idx",
]
