"""Cycle-accurate simulation of dynamic shared memories backed by host buffers."""
from .config import SystemConfig, load_config, parse_config
from .interconnect import Crossbar
from .kernel import RunResult, Simulator, Stats, run
from .oracle import ReferenceOracle
from .pe import ProcessingElement, WorkloadProgram, parse_workload
from .pointer_table import PointerTable, TableEntry
from .protocol import (
    ElemType,
    Opcode,
    Request,
    Response,
    Status,
    decode_request,
    encode_request,
)
from .translator import BackingStore, Endianness
from .wrapper import DelayConfig, Wrapper

__version__ = "0.1.0"
