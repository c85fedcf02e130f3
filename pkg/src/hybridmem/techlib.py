"""Memory technology parameter sets.

All values are held in SI units (seconds, joules, watts). The config file
uses ns / nJ / mW; conversion goes through :mod:`decimal` so a library
written out and read back is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal
from types import MappingProxyType
from typing import Mapping

REQUIRED_TECHS = ("edram", "sttram")

# config field -> (attribute, decimal scale from file units to SI)
CONFIG_FIELDS = {
    "read_latency_ns": ("read_latency", Decimal("1e-9")),
    "write_latency_ns": ("write_latency", Decimal("1e-9")),
    "read_energy_nj": ("read_energy", Decimal("1e-9")),
    "write_energy_nj": ("write_energy", Decimal("1e-9")),
    "static_power_mw": ("static_power", Decimal("1e-3")),
    "endurance": ("line_endurance", Decimal(1)),
    "reference_capacity_bytes": ("reference_capacity", None),
}


@dataclass(frozen=True)
class TechnologyParams:
    name: str
    read_latency: float
    write_latency: float
    read_energy: float
    write_energy: float
    static_power: float  # at the 80 C worst case
    line_endurance: float
    reference_capacity: int

    def violations(self) -> list[str]:
        out = []
        for attr in ("read_latency", "write_latency", "read_energy",
                     "write_energy", "static_power"):
            if not getattr(self, attr) > 0:
                out.append(f"{self.name}: {attr} must be > 0")
        if not self.line_endurance >= 1:
            out.append(f"{self.name}: line_endurance must be >= 1")
        if self.reference_capacity < 1:
            out.append(f"{self.name}: reference_capacity must be >= 1")
        return out


@dataclass(frozen=True)
class TechLibrary:
    technologies: Mapping[str, TechnologyParams]
    leakage_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "technologies",
                           MappingProxyType(dict(self.technologies)))

    def __getitem__(self, name: str) -> TechnologyParams:
        return self.technologies[name]

    def static_energy(self, name: str) -> float:
        return static_energy_per_bank(self.technologies[name], self.leakage_scale)

    def bank_static_power(self, name: str) -> float:
        return self.technologies[name].static_power * self.leakage_scale

    def with_tech(self, tech: TechnologyParams) -> TechLibrary:
        techs = dict(self.technologies)
        techs[tech.name] = tech
        return replace(self, technologies=techs)


def default_library() -> TechLibrary:
    """The 65 nm parameter sets with per-line write endurance limits.

    Capacities are those the parameters were characterized at; they are
    interpreted per bank unless ``leakage_scale`` says otherwise.
    """
    techs = [
        TechnologyParams("sram", 2.252e-9, 2.264e-9, 0.895e-9, 0.797e-9,
                         131.1e-3, 1e16, 128 * 1024),
        TechnologyParams("sttram", 2.318e-9, 11.024e-9, 0.858e-9, 4.997e-9,
                         16e-3, 4e12, 512 * 1024),
        TechnologyParams("edram", 4.053e-9, 4.015e-9, 0.790e-9, 0.788e-9,
                         120e-3, 1e16, 512 * 1024),
        TechnologyParams("pcram", 4.636e-9, 23.180e-9, 1.732e-9, 3.475e-9,
                         31e-3, 1e9, 2 * 1024 * 1024),
    ]
    return TechLibrary({t.name: t for t in techs}, leakage_scale=1.0)


def static_energy_per_bank(tech: TechnologyParams, leakage_scale: float = 1.0) -> float:
    """Leakage energy charged to one bank: static power over one read+write."""
    return (tech.read_latency + tech.write_latency) * tech.static_power * leakage_scale


def validate(lib: TechLibrary) -> list[str]:
    """Return every violated invariant; an empty list means the library is ok."""
    out = []
    for name in REQUIRED_TECHS:
        if name not in lib.technologies:
            out.append(f"{name}: required technology absent")
    for tech in lib.technologies.values():
        out.extend(tech.violations())
    if not lib.leakage_scale > 0:
        out.append("leakage_scale must be > 0")
    return out


def _to_si(text: str, scale: Decimal) -> float:
    return float(Decimal(text) * scale)


def _from_si(value: float, scale: Decimal) -> str:
    # repr is the shortest string that round-trips; dividing by a power of
    # ten is exact in decimal, so parsing back reproduces the same float
    d = Decimal(repr(value)) / scale
    return _plain(d)


def _plain(d: Decimal) -> str:
    s = format(d.normalize(), "f")
    return s


def library_to_config(lib: TechLibrary) -> list[str]:
    """Render the library as ``key = value`` config lines."""
    lines = [f"lib.leakage_scale = {repr(lib.leakage_scale)}"]
    for name in sorted(lib.technologies):
        tech = lib.technologies[name]
        for key, (attr, scale) in CONFIG_FIELDS.items():
            value = getattr(tech, attr)
            text = str(value) if scale is None else _from_si(value, scale)
            lines.append(f"tech.{name}.{key} = {text}")
    return lines


def library_from_config(entries: Mapping[str, str],
                        base: TechLibrary | None = None) -> TechLibrary:
    """Apply ``tech.*`` and ``lib.*`` entries on top of ``base``.

    A technology not present in ``base`` must define every field. Raises
    ``ValueError`` for unknown fields or unparsable values.
    """
    base = base if base is not None else default_library()
    pending: dict[str, dict[str, object]] = {}
    leakage_scale = base.leakage_scale
    for key, text in entries.items():
        if key == "lib.leakage_scale":
            leakage_scale = _parse_real(key, text)
            continue
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "tech" or parts[2] not in CONFIG_FIELDS:
            raise ValueError(f"unknown key '{key}'")
        attr, scale = CONFIG_FIELDS[parts[2]]
        if scale is None:
            value: object = _parse_int(key, text)
        else:
            try:
                value = _to_si(text, scale)
            except ArithmeticError:
                raise ValueError(f"{key}: not a number: {text!r}") from None
        pending.setdefault(parts[1], {})[attr] = value

    techs = dict(base.technologies)
    for name, fields in pending.items():
        if name in techs:
            techs[name] = replace(techs[name], **fields)
        else:
            missing = [a for a, _ in CONFIG_FIELDS.values() if a not in fields]
            if missing:
                raise ValueError(f"tech.{name}: new technology missing {', '.join(missing)}")
            techs[name] = TechnologyParams(name=name, **fields)
    return TechLibrary(techs, leakage_scale=leakage_scale)


def _parse_real(key: str, text: str) -> float:
    try:
        return float(Decimal(text))
    except ArithmeticError:
        raise ValueError(f"{key}: not a number: {text!r}") from None


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{key}: not an integer: {text!r}") from None
