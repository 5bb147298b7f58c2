"""Corpus directories: one container per sequence plus ``manifest.json``."""

import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError

from ...domain import (
    APParams,
    Corpus,
    CorpusEntry,
    CorpusSpec,
    FormatException,
    PacingTemplate,
    ScarRegion,
)
from .artifact_repository import ContainerArtifactRepository

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


class ManifestEntry(BaseModel):
    file: str
    index: int
    origin: int
    scar_center: Optional[int] = None
    scar_radius: float = 0.0
    scar_nodes: List[int] = []


class CorpusManifest(BaseModel):
    spec: dict
    count: int
    entries: List[ManifestEntry]
    train_count: Optional[int] = None
    val_count: Optional[int] = None


def spec_to_dict(spec: CorpusSpec) -> dict:
    return asdict(spec)


def spec_from_dict(data: dict) -> CorpusSpec:
    return CorpusSpec(
        origin_nodes=tuple(data["origin_nodes"]),
        scar_regions=tuple(ScarRegion(**r) for r in data["scar_regions"]),
        ap_params=APParams(**data["ap_params"]),
        pacing=PacingTemplate(**data["pacing"]),
        seed=data["seed"],
    )


class FileCorpusRepository:
    """Reads and writes corpus directories."""

    def __init__(self, artifacts: Optional[ContainerArtifactRepository] = None):
        self.artifacts = artifacts or ContainerArtifactRepository()

    def save(
        self,
        directory: Union[str, Path],
        corpus: Corpus,
        split_counts: Optional[Tuple[int, int]] = None,
    ) -> None:
        """Write every sequence and the manifest; output bytes depend only on the corpus."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for entry in corpus:
            name = f"seq_{entry.index:04d}.ntc"
            self.artifacts.save_tmp(directory / name, entry.tmp)
            entries.append(
                ManifestEntry(
                    file=name,
                    index=entry.index,
                    origin=entry.origin,
                    scar_center=entry.region.center,
                    scar_radius=entry.region.radius,
                    scar_nodes=list(entry.scar_nodes),
                )
            )
        manifest = CorpusManifest(
            spec=spec_to_dict(corpus.spec),
            count=len(entries),
            entries=entries,
            train_count=split_counts[0] if split_counts else None,
            val_count=split_counts[1] if split_counts else None,
        )
        text = json.dumps(manifest.model_dump(), indent=2, sort_keys=True)
        (directory / MANIFEST).write_text(text + "\n")
        logger.info("wrote %d sequences to %s", len(entries), directory)

    def load_manifest(self, directory: Union[str, Path]) -> CorpusManifest:
        path = Path(directory) / MANIFEST
        if not path.is_file():
            raise FormatException(f"no corpus manifest at {path}")
        try:
            return CorpusManifest.model_validate_json(path.read_text())
        except ValidationError as e:
            raise FormatException(f"invalid corpus manifest {path}: {e}") from e

    def load_manifest_spec(self, directory: Union[str, Path]) -> CorpusSpec:
        """The generating spec of a corpus, without reading any sequence."""
        return self._spec(self.load_manifest(directory))

    def load(self, directory: Union[str, Path]) -> Corpus:
        directory = Path(directory)
        manifest = self.load_manifest(directory)
        spec = self._spec(manifest)
        entries = tuple(
            CorpusEntry(
                index=item.index,
                origin=item.origin,
                region=ScarRegion(item.scar_center, item.scar_radius),
                scar_nodes=tuple(item.scar_nodes),
                tmp=self.artifacts.load_tmp(directory / item.file),
            )
            for item in manifest.entries
        )
        if len(entries) != manifest.count:
            raise FormatException(f"manifest lists {len(entries)} files but declares {manifest.count}")
        return Corpus(spec=spec, entries=entries)

    def _spec(self, manifest: CorpusManifest) -> CorpusSpec:
        try:
            return spec_from_dict(manifest.spec)
        except (KeyError, TypeError, ValueError) as e:
            raise FormatException(f"corpus manifest has an invalid spec: {e}") from e
