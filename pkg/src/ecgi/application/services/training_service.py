"""Generative-model application service: training, Z prior and sampling."""

import hashlib
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ...domain import Corpus, DomainException, SVAEConfig
from ...domain.services import (
    estimate_z_prior,
    plausibility_fraction,
    sample_sequences,
    split,
    train,
)
from ...infrastructure import ContainerArtifactRepository, FileCorpusRepository
from ...infrastructure.plotting import plot_samples, plot_training_curve
from ...infrastructure.repositories.corpus_repository import MANIFEST
from ..dtos import EpochResponse, SampleResponse, TrainingResponse, VAEConfigFile, ZPriorResponse
from ..exceptions import ApplicationException
from .mappers import to_svae_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _partition(corpus: Corpus, config: SVAEConfig) -> Tuple[Corpus, Optional[Corpus]]:
    if config.val_fraction == 0 or len(corpus) < 2:
        return corpus, None
    return split(corpus, config.val_fraction, config.seed)


class TrainingApplicationService:
    """Trains the sequential VAE on a corpus directory and works with its outputs.

    The train/validation partition is re-derived from the weights' config
    (``val_fraction`` and ``seed``), so the Z prior is estimated on exactly
    the sequences the weights were trained on.
    """

    def __init__(self, artifacts: ContainerArtifactRepository, corpora: FileCorpusRepository):
        self.artifacts = artifacts
        self.corpora = corpora

    def train(
        self,
        corpus_dir: PathLike,
        request: VAEConfigFile,
        out: PathLike,
        plot_dir: Optional[PathLike] = None,
    ) -> TrainingResponse:
        try:
            corpus = self.corpora.load(corpus_dir)
            config = to_svae_config(request, corpus.entries[0].tmp.node_count)
            train_set, validation = _partition(corpus, config)
            weights, log = train(train_set, config, validation)
        except (DomainException, ValueError, IndexError) as e:
            raise ApplicationException(str(e))

        corpus_hash = hashlib.sha256((Path(corpus_dir) / MANIFEST).read_bytes()).hexdigest()
        weights.metadata.update(
            {
                "corpus_manifest_sha256": corpus_hash,
                "columns": corpus.entries[0].tmp.column_count,
                "train_elbo": log.train_elbo,
                "val_elbo": [record.val_elbo for record in log.epochs],
            }
        )
        self.artifacts.save_weights(out, weights)
        if plot_dir is not None:
            plot_training_curve(
                Path(plot_dir) / "training_curve.png",
                log.train_elbo,
                [record.val_elbo for record in log.epochs],
            )
        return TrainingResponse(
            path=str(out),
            train_count=len(train_set),
            val_count=0 if validation is None else len(validation),
            corpus_hash=corpus_hash,
            epochs=[EpochResponse(**asdict(record)) for record in log.epochs],
        )

    def estimate_prior(self, weights_path: PathLike, corpus_dir: PathLike, out: PathLike) -> ZPriorResponse:
        try:
            weights = self.artifacts.load_weights(weights_path)
            train_set, _ = _partition(self.corpora.load(corpus_dir), weights.config)
            zprior = estimate_z_prior(weights, train_set)
        except DomainException as e:
            raise ApplicationException(str(e))

        self.artifacts.save_zprior(out, zprior)
        return ZPriorResponse(
            path=str(out),
            latent_dim=zprior.latent_dim,
            column_count=zprior.column_count,
            mean_variance=float(zprior.C.mean()),
        )

    def sample(
        self,
        weights_path: PathLike,
        count: int,
        prior_path: Optional[PathLike] = None,
        seed: int = 0,
        plot_dir: Optional[PathLike] = None,
        columns: Optional[int] = None,
    ) -> SampleResponse:
        """Decode latent draws; without a prior file the draws come from N(0, I)."""
        try:
            weights = self.artifacts.load_weights(weights_path)
            prior = self.artifacts.load_zprior(prior_path) if prior_path is not None else None
            if prior is None and columns is None:
                columns = weights.metadata.get("columns")
            samples = sample_sequences(weights, count, np.random.default_rng(seed), prior, columns)
        except DomainException as e:
            raise ApplicationException(str(e))

        source = "zprior" if prior is not None else "isotropic"
        fraction = plausibility_fraction(samples)
        logger.info("%d %s samples: %.1f%% of entries plausible", count, source, 100 * fraction)
        plot = None
        if plot_dir is not None:
            n = samples.shape[1]
            nodes = sorted({0, n // 2, n - 1})
            plot = str(plot_samples(Path(plot_dir) / f"samples_{source}.png", samples, nodes))
        return SampleResponse(count=count, source=source, plausible_fraction=fraction, plot=plot)
