"""DTO → domain conversions shared by the application services."""

from pathlib import Path
from typing import Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from ...domain import (
    APParams,
    CorpusSpec,
    EMConfig,
    FixedEPConfig,
    GreensiteConfig,
    LambdaMode,
    PacingTemplate,
    ScarMode,
    ScarRegion,
    ScarRule,
    SVAEConfig,
    ZInitMode,
)
from ..dtos import (
    APParamsConfig,
    CorpusSpecFile,
    EMConfigFile,
    FixedEPConfigFile,
    GreensiteConfigFile,
    PacingTemplateConfig,
    ScarRuleConfig,
    VAEConfigFile,
)
from ..exceptions import ApplicationException

ConfigT = TypeVar("ConfigT", bound=BaseModel)


def read_config(model: Type[ConfigT], path: Optional[Union[str, Path]]) -> ConfigT:
    """Parse a JSON config file; no path yields the model defaults."""
    if path is None:
        return model()
    path = Path(path)
    if not path.is_file():
        raise ApplicationException(f"config file not found: {path}")
    try:
        return model.model_validate_json(path.read_text())
    except ValidationError as e:
        raise ApplicationException(f"invalid config {path}: {e}") from e


def to_ap_params(dto: APParamsConfig) -> APParams:
    return APParams(**dto.model_dump())


def to_pacing_template(dto: PacingTemplateConfig) -> PacingTemplate:
    return PacingTemplate(**dto.model_dump())


def to_corpus_spec(dto: CorpusSpecFile, origins, regions) -> CorpusSpec:
    return CorpusSpec(
        origin_nodes=tuple(origins),
        scar_regions=tuple(regions),
        ap_params=to_ap_params(dto.ap_params),
        pacing=to_pacing_template(dto.pacing),
        seed=dto.seed,
    )


def to_scar_regions(dto: CorpusSpecFile):
    return tuple(ScarRegion(r.center, r.radius) for r in dto.scar_regions)


def to_svae_config(dto: VAEConfigFile, n_nodes: int) -> SVAEConfig:
    return SVAEConfig(n_nodes=n_nodes, **dto.model_dump())


def to_em_config(dto: EMConfigFile) -> EMConfig:
    fields = dto.model_dump(exclude={"beta", "beta_max", "z_init"})
    return EMConfig(**fields, z_init=ZInitMode(dto.z_init))


def to_greensite_config(dto: GreensiteConfigFile) -> GreensiteConfig:
    return GreensiteConfig(
        energy_fraction=dto.energy_fraction,
        lambda_mode=LambdaMode(dto.lambda_mode),
        lambda_fixed=dto.lambda_fixed,
        n_lambdas=dto.n_lambdas,
    )


def to_fixed_ep_config(dto: FixedEPConfigFile) -> FixedEPConfig:
    return FixedEPConfig(
        origin_nodes=tuple(dto.origin_nodes),
        sigma2=dto.sigma2,
        ap_params=to_ap_params(dto.ap_params),
        pacing=to_pacing_template(dto.pacing),
    )


def to_scar_rule(dto: ScarRuleConfig, mode: ScarMode) -> ScarRule:
    return ScarRule(mode=mode, **dto.model_dump())
