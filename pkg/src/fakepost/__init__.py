"""Design, analysis and simulation of the fake-post participation game."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DesignTarget,
    ParticipantFractions,
    PopulationProfile,
    PostType,
    SystemParams,
    participant_fractions,
    validate_system,
)
from .design import DesignKnobs, MechanismDesign, NotDesignable, choose_design  # noqa: E402
from .equilibrium import ne_set  # noqa: E402

__all__ = [
    "DesignKnobs",
    "DesignTarget",
    "MechanismDesign",
    "NotDesignable",
    "ParticipantFractions",
    "PopulationProfile",
    "PostType",
    "SystemParams",
    "choose_design",
    "ne_set",
    "participant_fractions",
    "validate_system",
]
