"""Convenience-unit parsing for scenario files.

Scenario values may be plain numbers (already SI) or strings such as
``"50 Mbps"``, ``"1.2288 MB"`` or ``"168 ms"``.  Everything is normalised to
SI at load time: seconds, joules, watts, bytes, bits/s, metres, hertz.
"""

from __future__ import annotations

import re

_SCALE = {
    # time
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "min": 60.0, "h": 3600.0, "d": 86400.0,
    # rate, bits/s
    "bps": 1.0, "kbps": 1e3, "Mbps": 1e6, "Gbps": 1e9, "Tbps": 1e12,
    # data size, bytes (decimal prefixes)
    "B": 1.0, "kB": 1e3, "KB": 1e3, "MB": 1e6, "GB": 1e9, "TB": 1e12,
    # distance
    "m": 1.0, "km": 1e3,
    # power
    "W": 1.0, "mW": 1e-3, "kW": 1e3,
    # energy
    "J": 1.0, "kJ": 1e3, "MJ": 1e6,
    # frequency
    "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
}

# expected dimension per unit, used to catch "5 MB" where a delay is expected
_DIM = {}
for _u in ("s", "ms", "us", "ns", "min", "h", "d"):
    _DIM[_u] = "time"
for _u in ("bps", "kbps", "Mbps", "Gbps", "Tbps"):
    _DIM[_u] = "rate"
for _u in ("B", "kB", "KB", "MB", "GB", "TB"):
    _DIM[_u] = "size"
for _u in ("m", "km"):
    _DIM[_u] = "length"
for _u in ("W", "mW", "kW"):
    _DIM[_u] = "power"
for _u in ("J", "kJ", "MJ"):
    _DIM[_u] = "energy"
for _u in ("Hz", "kHz", "MHz", "GHz"):
    _DIM[_u] = "frequency"

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)?\s*$")


def parse_quantity(value, dimension: str | None = None) -> float:
    """Return ``value`` in SI units.

    Raises ``ValueError`` for unparseable strings, unknown units, or a unit
    whose dimension differs from ``dimension``.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a quantity, got {value!r}")
    match = _QUANTITY.match(value)
    if match is None:
        raise ValueError(f"cannot parse quantity {value!r}")
    number, unit = match.groups()
    if unit is None:
        return float(number)
    if unit not in _SCALE:
        raise ValueError(f"unknown unit {unit!r} in {value!r}")
    if dimension is not None and _DIM[unit] != dimension:
        raise ValueError(f"{value!r} is a {_DIM[unit]}, expected a {dimension}")
    return float(number) * _SCALE[unit]
