from .sweep import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    emit,
    generate_messages,
    read_csv,
    records_to_csv,
    run_sweep,
)
from .usps import run_usps, usps_decode, usps_encode, usps_load
from .willshaw import WillshawMemory
