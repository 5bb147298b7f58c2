"""Value objects for the ECG imaging domain."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NewType, Optional, Tuple


NodeIndex = NewType("NodeIndex", int)
CaseId = NewType("CaseId", str)
RunId = NewType("RunId", str)


class SettingTag(Enum):
    UNSEEN_SCAR = "unseen-scar"
    UNSEEN_ORIGIN = "unseen-origin"
    UNSEEN_BOTH = "unseen-both"


class MethodTag(Enum):
    PROPOSED = "proposed"
    GREENSITE = "greensite"
    FIXED_EP = "fixed-ep"


class Activation(Enum):
    IDENTITY = "identity"
    EXP_CLAMPED = "exp-clamped"


class ScarMode(Enum):
    PHYSIOLOGICAL = "physiological"
    AMPLITUDE = "amplitude"


class LambdaMode(Enum):
    L_CURVE = "l-curve"
    FIXED = "fixed"


class ZInitMode(Enum):
    PRIOR_MEAN = "prior-mean"
    BEST_ANCHOR = "best-anchor"


@dataclass(frozen=True)
class APParams:
    """Aliev-Panfilov reaction constants and explicit-Euler integration settings."""

    k: float = 8.0
    a: float = 0.15
    eps0: float = 0.002
    mu1: float = 0.2
    mu2: float = 0.3
    diffusion: float = 0.25
    dt: float = 0.05
    n_steps: int = 1600
    record_stride: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.diffusion < 0:
            raise ValueError("diffusion must be non-negative")
        if not 0 < self.a < 1:
            raise ValueError("a must lie in (0, 1)")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.n_steps < self.record_stride:
            raise ValueError("n_steps must cover at least one recorded column")

    @property
    def n_columns(self) -> int:
        return self.n_steps // self.record_stride

    @property
    def dt_effective(self) -> float:
        return self.dt * self.record_stride


@dataclass(frozen=True)
class PacingConfig:
    origin_nodes: Tuple[int, ...]
    stim_start: float = 0.0
    stim_duration: float = 2.0
    stim_amplitude: float = 0.6

    def __post_init__(self):
        if not self.origin_nodes:
            raise ValueError("origin_nodes must not be empty")
        if min(self.origin_nodes) < 0:
            raise ValueError("origin node indices must be non-negative")
        if self.stim_start < 0:
            raise ValueError("stim_start must be non-negative")
        if not self.stim_duration > 0:
            raise ValueError("stim_duration must be positive")
        if not self.stim_amplitude > 0:
            raise ValueError("stim_amplitude must be positive")


@dataclass(frozen=True)
class ScarConfig:
    scar_nodes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.scar_nodes and min(self.scar_nodes) < 0:
            raise ValueError("scar node indices must be non-negative")

    @property
    def is_empty(self) -> bool:
        return not self.scar_nodes


@dataclass(frozen=True)
class ScarRegion:
    """Scar parameterized by a center node and a radius (mm); no center means no scar."""

    center: Optional[int] = None
    radius: float = 0.0

    def __post_init__(self):
        if self.center is not None and self.center < 0:
            raise ValueError("scar center must be a node index")
        if self.radius < 0:
            raise ValueError("scar radius must be non-negative")

    @property
    def is_empty(self) -> bool:
        return self.center is None


@dataclass(frozen=True)
class PacingTemplate:
    """Stimulus shared by every origin of a corpus; the site is the ball of pace_radius."""

    stim_start: float = 0.0
    stim_duration: float = 2.0
    stim_amplitude: float = 0.6
    pace_radius: float = 1.0

    def __post_init__(self):
        if self.pace_radius < 0:
            raise ValueError("pace_radius must be non-negative")
        if not self.stim_duration > 0 or not self.stim_amplitude > 0:
            raise ValueError("stimulus duration and amplitude must be positive")


@dataclass(frozen=True)
class CorpusSpec:
    origin_nodes: Tuple[int, ...]
    scar_regions: Tuple[ScarRegion, ...]
    ap_params: APParams = field(default_factory=APParams)
    pacing: PacingTemplate = field(default_factory=PacingTemplate)
    seed: int = 0

    def __post_init__(self):
        if not self.origin_nodes:
            raise ValueError("origin_nodes must not be empty")
        if not self.scar_regions:
            raise ValueError("scar_regions must not be empty")

    def pairs(self) -> Tuple[Tuple[int, ScarRegion], ...]:
        """Origin × scar product in origin-major order."""
        return tuple(
            (origin, region)
            for origin in self.origin_nodes
            for region in self.scar_regions
        )


@dataclass(frozen=True)
class SVAEConfig:
    n_nodes: int
    latent_dim: int = 12
    encoder_hidden: Tuple[int, int] = (64, 32)
    decoder_hidden: Tuple[int, int] = (32, 64)
    learning_rate: float = 3e-3
    epochs: int = 300
    batch_size: int = 8
    seed: int = 0
    kl_weight: float = 1.0
    kl_warmup_fraction: float = 0.25
    val_fraction: float = 0.2
    lr_final_fraction: float = 0.1
    decoder_variance_init: float = 0.05
    variance_warmup_fraction: float = 0.2

    def __post_init__(self):
        if self.n_nodes < 1 or self.latent_dim < 1:
            raise ValueError("n_nodes and latent_dim must be positive")
        if self.latent_dim >= self.n_nodes:
            raise ValueError("latent_dim must be smaller than n_nodes")
        if min(self.encoder_hidden) < 1 or min(self.decoder_hidden) < 1:
            raise ValueError("hidden dimensions must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.kl_weight < 0:
            raise ValueError("kl_weight must be non-negative")
        if not 0 <= self.kl_warmup_fraction <= 1:
            raise ValueError("kl_warmup_fraction must lie in [0, 1]")
        if not 0 <= self.val_fraction < 1:
            raise ValueError("val_fraction must lie in [0, 1)")
        if not 0 < self.lr_final_fraction <= 1:
            raise ValueError("lr_final_fraction must lie in (0, 1]")
        if not self.decoder_variance_init > 0:
            raise ValueError("decoder_variance_init must be positive")
        if not 0 <= self.variance_warmup_fraction < 1:
            raise ValueError("variance_warmup_fraction must lie in [0, 1)")

    def kl_weight_at(self, epoch: int) -> float:
        """KL weight for a 1-based epoch under linear warm-up."""
        if self.kl_warmup_fraction == 0:
            return self.kl_weight
        warmup = max(1, round(self.kl_warmup_fraction * self.epochs))
        return self.kl_weight * min(1.0, epoch / warmup)

    def learning_rate_at(self, epoch: int) -> float:
        """Cosine decay from learning_rate at epoch 1 to lr_final_fraction of it at the last epoch."""
        if self.epochs == 1:
            return self.learning_rate
        floor = self.learning_rate * self.lr_final_fraction
        progress = (epoch - 1) / (self.epochs - 1)
        return floor + 0.5 * (self.learning_rate - floor) * (1.0 + math.cos(math.pi * progress))

    def decoder_variance_trainable(self, epoch: int) -> bool:
        """The decoder variance head stays at its initial value for the first epochs."""
        return epoch > round(self.variance_warmup_fraction * self.epochs)


@dataclass(frozen=True)
class EMConfig:
    max_em_iters: int = 50
    m_step_grad_steps: int = 5
    m_step_lr: float = 1e-2
    backtracking_factor: float = 0.5
    max_backtracks: int = 30
    rel_tol: float = 1e-4
    z_init: ZInitMode = ZInitMode.PRIOR_MEAN

    def __post_init__(self):
        if self.max_em_iters < 1 or self.m_step_grad_steps < 1:
            raise ValueError("iteration counts must be positive")
        if not self.m_step_lr > 0:
            raise ValueError("m_step_lr must be positive")
        if not 0 < self.backtracking_factor < 1:
            raise ValueError("backtracking_factor must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class GreensiteConfig:
    energy_fraction: float = 0.95
    lambda_mode: LambdaMode = LambdaMode.L_CURVE
    lambda_fixed: float = 0.0
    n_lambdas: int = 20

    def __post_init__(self):
        if not 0 < self.energy_fraction <= 1:
            raise ValueError("energy_fraction must lie in (0, 1]")
        if self.lambda_fixed < 0:
            raise ValueError("lambda must be non-negative")
        if self.n_lambdas < 3:
            raise ValueError("the L-curve needs at least 3 grid points")


@dataclass(frozen=True)
class FixedEPConfig:
    """Fixed physiological prior; empty origin_nodes selects the minimum-z face."""

    origin_nodes: Tuple[int, ...] = ()
    sigma2: float = 0.1
    ap_params: APParams = field(default_factory=APParams)
    pacing: PacingTemplate = field(default_factory=PacingTemplate)

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class ScarRule:
    mode: ScarMode = ScarMode.PHYSIOLOGICAL
    delay_fraction: float = 0.3
    apd_fraction: float = 0.7
    amplitude_fraction: float = 0.3

    def __post_init__(self):
        for name in ("delay_fraction", "apd_fraction", "amplitude_fraction"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
