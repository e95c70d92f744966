"""
Pipe area and flow-derived wave speed.

The wave speed here is bulk flow velocity, c = Q / A, the quantity the leak
formula is calibrated with. It is not an acoustic propagation speed.
Pressure is carried as a label only and never enters the arithmetic.
"""

import math
from dataclasses import dataclass

LITRES_PER_M3 = 1000.0
SECONDS_PER_MINUTE = 60.0
DEFAULT_PIPE_DIAMETER_M = 0.0334


@dataclass(frozen=True)
class PipeSpec:
    inner_diameter_m: float = DEFAULT_PIPE_DIAMETER_M

    def __post_init__(self):
        if not (math.isfinite(self.inner_diameter_m) and self.inner_diameter_m > 0):
            raise ValueError(f"inner_diameter_m must be positive, got {self.inner_diameter_m}")


@dataclass(frozen=True)
class FlowMeasurement:
    flow_lpm: float
    pressure_kgfcm2: float = 0.0

    def __post_init__(self):
        for name in ("flow_lpm", "pressure_kgfcm2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {value}")


def pipe_area(spec: PipeSpec) -> float:
    """Cross-section area pi * (D/2)^2 in m^2"""
    return math.pi * (spec.inner_diameter_m / 2.0) ** 2


def flow_to_m3s(flow_lpm: float) -> float:
    """Litres per minute to cubic metres per second"""
    if flow_lpm < 0:
        raise ValueError(f"flow must be non-negative, got {flow_lpm}")
    return flow_lpm / SECONDS_PER_MINUTE / LITRES_PER_M3


def wave_speed(flow: FlowMeasurement, spec: PipeSpec) -> float:
    """c = Q / A in m/s"""
    return flow_to_m3s(flow.flow_lpm) / pipe_area(spec)


def flow_for_speed(wave_speed_mps: float, spec: PipeSpec) -> float:
    """Flow in lpm that produces the given wave speed"""
    if wave_speed_mps < 0:
        raise ValueError(f"wave speed must be non-negative, got {wave_speed_mps}")
    return wave_speed_mps * pipe_area(spec) * LITRES_PER_M3 * SECONDS_PER_MINUTE
