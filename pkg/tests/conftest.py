import pytest

from hiermap import PartitionConfig, partition
from hiermap.instances import path_graph


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Force jit compilation once so individual tests measure steady state."""
    partition(path_graph(16), 2, 0.03, 1, PartitionConfig.from_preset("fast"), 1)
