"""
Closed-form radio model: resource-block budget, Shannon data rate and the
roundtrip communication latency of a task.
"""

import math

from app.errors import InvalidArgumentError, InvalidConfigError
from app.models import RadioAllocation, RadioConfig, Task

# Guards floor() against 99.99999999999999-style quotients
_RB_EPSILON = 1e-9


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise InvalidArgumentError("power must be positive to express in dBm")
    return 10.0 * math.log10(watts) + 30.0


def rb_max(radio: RadioConfig) -> int:
    """Number of resource blocks that fit in the guard-band-reduced bandwidth"""
    return int(
        math.floor(radio.effective_bandwidth_hz / radio.rb_bandwidth_hz + _RB_EPSILON)
    )


def spectral_efficiency(radio: RadioConfig) -> float:
    """log2(1 + p0 * g / n) in bit/s/Hz"""
    snr = radio.tx_power_w * radio.channel_gain / radio.noise_power_w
    efficiency = math.log2(1.0 + snr)
    if not math.isfinite(efficiency) or efficiency <= 0:
        raise InvalidConfigError(
            f"radio config yields a non-finite spectral efficiency (snr={snr})"
        )
    return efficiency


def data_rate(alloc: RadioAllocation, radio: RadioConfig) -> float:
    if alloc.rb_count > rb_max(radio):
        raise InvalidArgumentError(
            f"allocation of {alloc.rb_count} RBs exceeds the cap of {rb_max(radio)}"
        )
    try:
        rate = alloc.bandwidth_hz * math.log2(
            1.0 + radio.tx_power_w * radio.channel_gain / radio.noise_power_w
        )
    except (ZeroDivisionError, OverflowError, ValueError) as e:
        raise InvalidConfigError(f"cannot evaluate data rate: {e}")
    if not math.isfinite(rate) or rate <= 0:
        raise InvalidConfigError(f"data rate is not a positive finite number: {rate}")
    return rate


def comm_latency(task: Task, rate: float) -> float:
    """Roundtrip (uplink + downlink) latency of the whole task"""
    if not rate > 0 or not math.isfinite(rate):
        raise InvalidArgumentError(f"rate must be a positive finite number, got {rate}")
    return 2.0 * task.size_bits / rate
