"""Beamformed massive-MIMO link simulator with adversarial CSI/pilot attacks
and statistical attack detectors."""

from .attacks import (
    ATTACK_CATALOG,
    AttackCatalogEntry,
    AttackConfig,
    AttackSchedule,
    apply_schedule,
    contaminate_pilot,
    forge_report,
    spoof_csi_phase,
)
from .beamforming import (
    Codebook,
    Codeword,
    LinkBudget,
    achievable_rate,
    dft_codebook,
    realized_snr,
    select_beam,
)
from .channel import (
    ChannelState,
    FadingProcess,
    Path,
    PathSet,
    fading_step,
    generate_channel,
    random_pathset,
    sample_rayleigh_block,
    steering_vector,
)
from .csi import (
    CsiErrorModel,
    CsiReport,
    ReceivedSignal,
    csi_error_samples,
    estimate_csi,
    transmit_pilot,
    unit_pilot,
)
from .detection import (
    CusumState,
    KsTestResult,
    RocPoint,
    calibrate_threshold,
    cusum_update,
    evaluate_detection,
    ks_critical_value,
    ks_statistic,
    ks_test,
    min_samples_for_miss,
    monitored_statistic,
)
from .estimators import CusumDetector, KsSpoofDetector
from .scenario import (
    MetricsLog,
    MetricsRow,
    ScenarioConfig,
    Vehicle,
    run,
    step,
    summarize,
    vehicle_position,
)

__version__ = "0.1.0"
