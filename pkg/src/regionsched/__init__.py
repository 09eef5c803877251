"""Region algorithm for online throughput scheduling with deadlines."""

from .core import (
    AlgoParams,
    Instance,
    Job,
    Model,
    check_condition1,
    default_params,
    make_job,
    parse_instance,
)
from .oracle import OracleResult, edf_feasible, max_throughput_subset
from .scheduler import RegionScheduler, Trace, run, spt_pick, verify_commitments
from .timeline import M, Timeline, finalize_tree

__all__ = [
    "AlgoParams",
    "Instance",
    "Job",
    "M",
    "Model",
    "OracleResult",
    "RegionScheduler",
    "Timeline",
    "Trace",
    "check_condition1",
    "default_params",
    "edf_feasible",
    "finalize_tree",
    "make_job",
    "max_throughput_subset",
    "parse_instance",
    "run",
    "spt_pick",
    "verify_commitments",
]
