"""System configuration files.

Line-oriented ``key = value`` pairs in two sections::

    [system]
    pes = 4
    memories = 1
    capacity_bytes = 65536      # one value for all modules, or a comma list
    endianness = little         # little | big, same rules as capacity_bytes
    max_cycles = 1000000
    seed = 0

    [delays]
    alloc_base = 0
    read_base = 0
    write_base = 0
    free_base = 0
    read_arr_base = 0
    write_arr_base = 0
    reserve_base = 0
    release_base = 0
    per_word = 0

Unknown sections or keys and out-of-range values are errors that cite the
offending line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .protocol import Opcode
from .translator import Endianness
from .wrapper import DEFAULT_CAPACITY, DelayConfig

DEFAULT_MAX_CYCLES = 1_000_000

_DELAY_KEYS = {f"{op.name.lower()}_base": op for op in Opcode}


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


@dataclass
class SystemConfig:
    n_pes: int = 1
    n_mems: int = 1
    capacity_bytes: tuple[int, ...] = (DEFAULT_CAPACITY,)
    endianness: tuple[Endianness, ...] = (Endianness.LITTLE,)
    delays: DelayConfig = field(default_factory=DelayConfig)
    max_cycles: int = DEFAULT_MAX_CYCLES
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.capacity_bytes, int):
            self.capacity_bytes = (self.capacity_bytes,)
        if isinstance(self.endianness, Endianness):
            self.endianness = (self.endianness,)
        self.capacity_bytes = _broadcast(tuple(self.capacity_bytes), self.n_mems, "capacity_bytes")
        self.endianness = _broadcast(tuple(self.endianness), self.n_mems, "endianness")
        if self.n_pes < 1 or self.n_mems < 1 or self.max_cycles < 1:
            raise ConfigError("pes, memories and max_cycles must be >= 1")
        if self.n_pes > 256 or self.n_mems > 256:
            raise ConfigError("at most 256 pes and 256 memories fit the request header")
        if any(c < 1 for c in self.capacity_bytes):
            raise ConfigError("capacity_bytes must be >= 1")


def _broadcast(values, n, name):
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise ConfigError(f"{name} lists {len(values)} values for {n} memories")
    return values


def parse_config(text: str) -> SystemConfig:
    section = None
    sys_kv: dict[str, tuple[str, int]] = {}
    delays: dict[Opcode, int] = {}
    per_word = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in ("system", "delays"):
                raise ConfigError(f"unknown section {line}", lineno)
            section = line[1:-1].strip()
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside a section", lineno)
        if section == "system":
            if key not in ("pes", "memories", "capacity_bytes", "endianness", "max_cycles", "seed"):
                raise ConfigError(f"unknown key {key!r} in [system]", lineno)
            sys_kv[key] = (value, lineno)
        else:
            if key == "per_word":
                per_word = _nonneg(value, lineno)
            elif key in _DELAY_KEYS:
                delays[_DELAY_KEYS[key]] = _nonneg(value, lineno)
            else:
                raise ConfigError(f"unknown key {key!r} in [delays]", lineno)

    kwargs = {}
    for key, attr in (("pes", "n_pes"), ("memories", "n_mems"), ("max_cycles", "max_cycles")):
        if key in sys_kv:
            value, lineno = sys_kv[key]
            kwargs[attr] = _positive(value, lineno)
    if "seed" in sys_kv:
        kwargs["seed"] = _nonneg(*sys_kv["seed"])
    if "capacity_bytes" in sys_kv:
        value, lineno = sys_kv["capacity_bytes"]
        kwargs["capacity_bytes"] = tuple(_positive(v, lineno) for v in value.split(","))
    if "endianness" in sys_kv:
        value, lineno = sys_kv["endianness"]
        kwargs["endianness"] = tuple(_endian(v, lineno) for v in value.split(","))
    kwargs["delays"] = DelayConfig(delays, per_word)
    n_mems = kwargs.get("n_mems", 1)
    for key in ("capacity_bytes", "endianness"):
        if key in kwargs and len(kwargs[key]) not in (1, n_mems):
            raise ConfigError(
                f"{key} lists {len(kwargs[key])} values for {n_mems} memories", sys_kv[key][1]
            )
    for key, attr in (("pes", "n_pes"), ("memories", "n_mems")):
        if kwargs.get(attr, 1) > 256:
            raise ConfigError(f"{key} must be <= 256", sys_kv[key][1])
    return SystemConfig(**kwargs)


def _int(value, lineno):
    try:
        return int(value.strip(), 0)
    except ValueError:
        raise ConfigError(f"expected an integer, got {value.strip()!r}", lineno) from None


def _positive(value, lineno):
    v = _int(value, lineno)
    if v < 1:
        raise ConfigError(f"value must be >= 1, got {v}", lineno)
    return v


def _nonneg(value, lineno):
    v = _int(value, lineno)
    if v < 0:
        raise ConfigError(f"value must be >= 0, got {v}", lineno)
    return v


def _endian(value, lineno):
    try:
        return Endianness(value.strip().lower())
    except ValueError:
        raise ConfigError(f"endianness must be little or big, got {value.strip()!r}", lineno) from None


def load_config(path) -> SystemConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: SystemConfig) -> str:
    def joined(values, fmt=str):
        if len(set(values)) == 1:
            return fmt(values[0])
        return ", ".join(fmt(v) for v in values)

    lines = [
        "[system]",
        f"pes = {cfg.n_pes}",
        f"memories = {cfg.n_mems}",
        f"capacity_bytes = {joined(cfg.capacity_bytes)}",
        f"endianness = {joined(cfg.endianness, lambda e: e.value)}",
        f"max_cycles = {cfg.max_cycles}",
        f"seed = {cfg.seed}",
        "",
        "[delays]",
    ]
    lines += [f"{key} = {cfg.delays.base[op]}" for key, op in _DELAY_KEYS.items()]
    lines.append(f"per_word = {cfg.delays.per_word}")
    return "\n".join(lines) + "\n"


def save_config(cfg: SystemConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))
