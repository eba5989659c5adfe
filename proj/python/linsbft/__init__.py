"""BFT consensus simulator: deterministic per-validator state machines driven
by a seeded discrete-event network with fault injection.

The heavy lifting lives in the compiled ``_linsbft`` extension; this package
re-exports it and adds a couple of pure-Python conveniences.
"""

from _linsbft import (
    ComplexityPoint,
    ComplexityReport,
    HeightStats,
    LivenessVerdict,
    RunReport,
    RunResult,
    Scenario,
    ViewChangeStats,
    block_hash_hex,
    dur_ticks,
    genesis_hash_hex,
    measure_complexity,
    minimize_counterexample,
    run_file,
    run_scenario,
    run_text,
    scan_trace,
    select_collector,
    select_collector_weighted,
    timeout_collect,
    timeout_propose,
    tx_encode,
    view_change_stats,
)

__all__ = [
    "ComplexityPoint",
    "ComplexityReport",
    "HeightStats",
    "LivenessVerdict",
    "RunReport",
    "RunResult",
    "Scenario",
    "ViewChangeStats",
    "block_hash_hex",
    "check_trace_file",
    "dur_ticks",
    "genesis_hash_hex",
    "measure_complexity",
    "minimize_counterexample",
    "run_file",
    "run_scenario",
    "run_text",
    "scan_trace",
    "select_collector",
    "select_collector_weighted",
    "timeout_collect",
    "timeout_propose",
    "tx_encode",
    "view_change_stats",
]


def check_trace_file(path):
    """Scan a trace file for conflicting finalizations.

    Returns (ok, detail), mirroring the ``check`` CLI subcommand.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return scan_trace(fh.read())
