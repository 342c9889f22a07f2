"""Double-dummy trick tables: exhaustive solver and dataset ingestion."""

from .records import (
    DdsRecord,
    DdsTable,
    load_dds_dataset,
    record_from_json,
    record_to_json,
    store_dds_dataset,
)
from .solver import (
    MAX_SOLVER_RANKS,
    backend_name,
    find_table_mismatches,
    full_table,
    solve_double_dummy,
    tabulate,
)

__all__ = [
    "DdsRecord",
    "DdsTable",
    "MAX_SOLVER_RANKS",
    "backend_name",
    "find_table_mismatches",
    "full_table",
    "load_dds_dataset",
    "record_from_json",
    "record_to_json",
    "solve_double_dummy",
    "store_dds_dataset",
    "tabulate",
]
