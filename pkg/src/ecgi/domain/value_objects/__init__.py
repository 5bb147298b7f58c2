"""Domain value objects."""

from .value_objects import (
    NodeIndex,
    CaseId,
    RunId,
    SettingTag,
    MethodTag,
    Activation,
    ScarMode,
    LambdaMode,
    ZInitMode,
    APParams,
    PacingConfig,
    ScarConfig,
    ScarRegion,
    PacingTemplate,
    CorpusSpec,
    SVAEConfig,
    EMConfig,
    GreensiteConfig,
    FixedEPConfig,
    ScarRule,
)

__all__ = [
    "NodeIndex",
    "CaseId",
    "RunId",
    "SettingTag",
    "MethodTag",
    "Activation",
    "ScarMode",
    "LambdaMode",
    "ZInitMode",
    "APParams",
    "PacingConfig",
    "ScarConfig",
    "ScarRegion",
    "PacingTemplate",
    "CorpusSpec",
    "SVAEConfig",
    "EMConfig",
    "GreensiteConfig",
    "FixedEPConfig",
    "ScarRule",
]
