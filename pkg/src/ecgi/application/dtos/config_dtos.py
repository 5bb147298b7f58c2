"""Configuration-file DTOs.

Every JSON file a user hands to the command line (``spec.json``,
``vae.json``, ``em.json``, experiment configs) is one of these models. They
validate ranges at the boundary; application services turn them into the
frozen domain value objects, which repeat the invariants that matter to the
numerics.
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class APParamsConfig(BaseModel):
    """Aliev-Panfilov constants and integration settings."""

    k: float = Field(8.0, gt=0)
    a: float = Field(0.15, gt=0, lt=1)
    eps0: float = Field(0.002, gt=0)
    mu1: float = Field(0.2, ge=0)
    mu2: float = Field(0.3, ge=0)
    diffusion: float = Field(0.25, ge=0)
    dt: float = Field(0.05, gt=0)
    n_steps: int = Field(1600, ge=1)
    record_stride: int = Field(20, ge=1)


class PacingTemplateConfig(BaseModel):
    stim_start: float = Field(0.0, ge=0)
    stim_duration: float = Field(2.0, gt=0)
    stim_amplitude: float = Field(0.6, gt=0)
    pace_radius: float = Field(1.0, ge=0)


class ScarRegionConfig(BaseModel):
    """A scar ball; ``center`` null means the scar-free configuration."""

    center: Optional[int] = Field(None, ge=0)
    radius: float = Field(0.0, ge=0)


class CorpusSpecFile(BaseModel):
    """Contents of ``spec.json`` for ``corpus generate``.

    Either list origins and scar regions explicitly or leave them empty and
    let ``n_origins``/``n_scars`` pick admissible ones on the mesh.
    """

    origin_nodes: List[int] = Field(default_factory=list)
    scar_regions: List[ScarRegionConfig] = Field(default_factory=list)
    n_origins: int = Field(10, ge=1)
    n_scars: int = Field(4, ge=1)
    scar_radius: float = Field(1.0, ge=0)
    ap_params: APParamsConfig = Field(default_factory=APParamsConfig)
    pacing: PacingTemplateConfig = Field(default_factory=PacingTemplateConfig)
    seed: int = 0
    val_fraction: float = Field(0.2, gt=0, lt=1)

    @field_validator("origin_nodes")
    @classmethod
    def validate_origins(cls, v: List[int]) -> List[int]:
        if any(node < 0 for node in v):
            raise ValueError("origin nodes must be non-negative")
        return v


class VAEConfigFile(BaseModel):
    """Contents of ``vae.json``; the node count comes from the corpus."""

    latent_dim: int = Field(12, ge=1)
    encoder_hidden: Tuple[int, int] = (64, 32)
    decoder_hidden: Tuple[int, int] = (32, 64)
    learning_rate: float = Field(3e-3, gt=0)
    epochs: int = Field(300, ge=1)
    batch_size: int = Field(8, ge=1)
    seed: int = 0
    kl_weight: float = Field(1.0, ge=0)
    kl_warmup_fraction: float = Field(0.25, ge=0, le=1)
    val_fraction: float = Field(0.2, ge=0, lt=1)
    lr_final_fraction: float = Field(0.1, gt=0, le=1)
    decoder_variance_init: float = Field(0.05, gt=0)
    variance_warmup_fraction: float = Field(0.2, ge=0, lt=1)


class EMConfigFile(BaseModel):
    """Contents of ``em.json``."""

    max_em_iters: int = Field(50, ge=1)
    m_step_grad_steps: int = Field(5, ge=1)
    m_step_lr: float = Field(1e-2, gt=0)
    backtracking_factor: float = Field(0.5, gt=0, lt=1)
    max_backtracks: int = Field(30, ge=1)
    rel_tol: float = Field(1e-4, gt=0)
    z_init: str = Field("prior-mean", pattern=r"^(prior-mean|best-anchor)$")
    beta: Optional[float] = Field(None, gt=0)
    beta_max: float = Field(1e8, gt=0)


class GreensiteConfigFile(BaseModel):
    energy_fraction: float = Field(0.95, gt=0, le=1)
    lambda_mode: str = Field("l-curve", pattern=r"^(l-curve|fixed)$")
    lambda_fixed: float = Field(0.0, ge=0)
    n_lambdas: int = Field(20, ge=3)


class FixedEPConfigFile(BaseModel):
    """Fixed-model baseline; empty ``origin_nodes`` paces the minimum-z face."""

    origin_nodes: List[int] = Field(default_factory=list)
    sigma2: float = Field(0.1, gt=0)
    ap_params: APParamsConfig = Field(default_factory=APParamsConfig)
    pacing: PacingTemplateConfig = Field(default_factory=PacingTemplateConfig)
    beta: Optional[float] = Field(None, gt=0)


class ScarRuleConfig(BaseModel):
    delay_fraction: float = Field(0.3, gt=0, lt=1)
    apd_fraction: float = Field(0.7, gt=0, lt=1)
    amplitude_fraction: float = Field(0.3, gt=0, lt=1)


class ExperimentConfig(BaseModel):
    """Everything ``eval run`` needs besides the case directory.

    Artifact paths are only required by the methods that use them: the
    proposed method needs ``weights`` and ``zprior``; every method needs the
    geometry ``bundle``.
    """

    bundle: Optional[str] = None
    weights: Optional[str] = None
    zprior: Optional[str] = None
    em: EMConfigFile = Field(default_factory=EMConfigFile)
    greensite: GreensiteConfigFile = Field(default_factory=GreensiteConfigFile)
    fixed_ep: FixedEPConfigFile = Field(default_factory=FixedEPConfigFile)
    scar_rule: ScarRuleConfig = Field(default_factory=ScarRuleConfig)
    n_jobs: int = Field(1, ge=1)
    plots: bool = True
    plot_nodes: List[int] = Field(default_factory=list)
