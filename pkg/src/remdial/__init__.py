"""Host-edge-cloud runtime for trigger-guided reminiscence dialogue sessions.

The package splits along the deployment seams:

* :mod:`remdial.model` - validated session and profile data types
* :mod:`remdial.wire` - the host-edge message protocol
* :mod:`remdial.host` - the turn orchestrator and its HTTP surface
* :mod:`remdial.edge` - the robot-side polling client and device contracts
* :mod:`remdial.portal` - the caregiver portal (profiles, media, summaries)
* :mod:`remdial.store` - on-disk session datasets
* :mod:`remdial.analytics` - offline engagement and latency analysis
* :mod:`remdial.sim` - deterministic scripted simulation
"""

from .model import (
    LatencyTrace,
    MemoryTrigger,
    OrderingViolation,
    RobotSetup,
    SchemaError,
    SessionRecord,
    SixMsDomain,
    TurnRecord,
    TurnTimestamps,
    UserProfile,
    canonical_dumps,
    derive_latency,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "LatencyTrace",
    "MemoryTrigger",
    "OrderingViolation",
    "RobotSetup",
    "SchemaError",
    "SessionRecord",
    "SixMsDomain",
    "TurnRecord",
    "TurnTimestamps",
    "UserProfile",
    "__version__",
    "canonical_dumps",
    "derive_latency",
    "validate_profile",
]
