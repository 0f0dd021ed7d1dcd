import os
import tempfile

# Settings are read at import time, so point them at scratch space first
os.environ.setdefault("AUDIT_LOG_FILE", os.path.join(tempfile.mkdtemp(), "audit.log"))
os.environ.setdefault("MAX_WORKERS", "1")

import pytest  # noqa: E402

from app.models import (  # noqa: E402
    ProcessingModel,
    RadioConfig,
    ServerSpec,
    Task,
)


@pytest.fixture
def radio():
    return RadioConfig()


@pytest.fixture
def model():
    return ProcessingModel()


@pytest.fixture
def one_server():
    return [ServerSpec(id=1)]


@pytest.fixture
def two_servers():
    return [ServerSpec(id=1), ServerSpec(id=2)]


@pytest.fixture
def unit_radio():
    """p0 * g / n = 1 and 100 RBs of 180 kHz, so 100 RBs carry 18 Mbit/s"""
    return RadioConfig(tx_power_w=1.0, channel_gain=1.0, noise_power_w=1.0)


def make_task(task_id, size_bits, arrival_s, deadline_s, ue_id=0):
    return Task(
        id=task_id,
        ue_id=ue_id,
        size_bits=size_bits,
        arrival_s=arrival_s,
        deadline_s=deadline_s,
    )


@pytest.fixture
def small_tasks():
    """Four tasks on two UEs, close enough together to queue"""
    return [
        make_task(0, 2e6, 0.0, 1.5, ue_id=0),
        make_task(1, 8e6, 0.05, 1.2, ue_id=1),
        make_task(2, 0.5e6, 0.1, 0.9, ue_id=0),
        make_task(3, 2e6, 0.2, 1.0, ue_id=1),
    ]
