"""Vehicular CSMA/CA channel emulator."""

from ._core import (
    BsmRecord,
    ConfigError,
    EmptyQueueError,
    EngineConfig,
    JitterMode,
    MetricsWindow,
    MobilityTrace,
    PacketQueue,
    ParseError,
    RealtimeOverrun,
    RunResult,
    RunSummary,
    TransmissionRecord,
    compute_aifs,
    ecef_to_geodetic,
    enu_to_ecef,
    enu_to_geodetic,
    generate_disc_mobility,
    generate_grid_mobility,
    geodetic_to_ecef,
    geodetic_to_enu,
    grid_footprint,
    load_trace_dir,
    parse_ns2_trace,
    path_loss_db,
    read_telemetry_csv,
    resolve_reception,
    rssi_dbm,
    run,
    run_realtime,
    sinr_db,
    split_per_node,
)

__all__ = [name for name in dir() if not name.startswith("_")]
