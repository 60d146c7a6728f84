"""Strong k-connectivity of tournaments and partitions into k-connected parts."""

from .errors import PreconditionError, StageFailure, TournamentError, VertexOutOfRange
from .generators import random_k_connected, random_tournament, rotational_tournament
from .profile import DESK, PAPER, ConstantsProfile, load_profile
from .tournament import (
    Tournament,
    build,
    connectivity,
    induced,
    is_k_connected,
    local_connectivity,
    min_cut,
    parse_trn,
    read_trn,
    verify_partition,
    write_trn,
)
from .complete import PartitionCertificate, extend_partition, partition_tournament

__all__ = [
    "ConstantsProfile",
    "DESK",
    "PAPER",
    "PartitionCertificate",
    "PreconditionError",
    "StageFailure",
    "Tournament",
    "TournamentError",
    "VertexOutOfRange",
    "build",
    "connectivity",
    "extend_partition",
    "induced",
    "is_k_connected",
    "load_profile",
    "local_connectivity",
    "min_cut",
    "parse_trn",
    "partition_tournament",
    "random_k_connected",
    "random_tournament",
    "read_trn",
    "rotational_tournament",
    "verify_partition",
    "write_trn",
]
__version__ = "0.1.0"
