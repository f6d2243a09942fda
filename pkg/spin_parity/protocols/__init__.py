"""Bell and GHZ protocols built on the device model."""
from spin_parity.protocols.bell import (
    TABLE1_COLUMNS,
    TABLE1_SIGNATURES,
    BellQndRecord,
    bell_device,
    bell_generate,
    bell_qnd,
    classify_detectors,
    classify_signature,
    check_bell_layout,
    classify_single_detector,
    detector_table,
    rotate_bell,
    run_bell_sequence,
)
from spin_parity.protocols.ghz import (
    CheckRecord,
    GhzRunRecord,
    GrowthPlan,
    GrowthStrategy,
    check_chain_layout,
    ghz3_device,
    ghz3_prepare,
    ghz_merge,
    ghz_normal_form,
    ghz_prepare,
    success_probability,
)

__all__ = [
    "TABLE1_COLUMNS", "TABLE1_SIGNATURES", "BellQndRecord", "bell_device", "bell_generate", "bell_qnd",
    "check_bell_layout", "classify_detectors", "classify_signature", "classify_single_detector",
    "detector_table", "rotate_bell", "run_bell_sequence",
    "CheckRecord", "GhzRunRecord", "GrowthPlan", "GrowthStrategy", "check_chain_layout", "ghz3_device",
    "ghz3_prepare", "ghz_merge", "ghz_normal_form", "ghz_prepare", "success_probability",
]
