"""Repository protocols for the domain layer."""

from pathlib import Path
from typing import List, Optional, Protocol, Tuple

from ..entities import (
    Corpus,
    ECGSequence,
    HeartMesh,
    LeadField,
    MetricsRecord,
    TestCase,
    TMPSequence,
    VAEWeights,
    ZPrior,
)
from ..value_objects import RunId


class ArtifactRepository(Protocol):
    """Protocol for persisted numerical artifacts."""

    def save_geometry(self, path: Path, mesh: HeartMesh, lead_field: LeadField, metadata: dict) -> None:
        """Save a mesh together with its lead field."""
        ...

    def load_mesh(self, path: Path) -> HeartMesh:
        """Load a mesh."""
        ...

    def load_lead_field(self, path: Path, node_count: Optional[int] = None) -> LeadField:
        """Load a lead field, optionally checking its node count."""
        ...

    def save_tmp(self, path: Path, tmp: TMPSequence) -> None:
        ...

    def load_tmp(self, path: Path) -> TMPSequence:
        ...

    def load_ecg(self, path: Path) -> ECGSequence:
        ...

    def save_weights(self, path: Path, weights: VAEWeights) -> None:
        ...

    def load_weights(self, path: Path) -> VAEWeights:
        ...

    def save_zprior(self, path: Path, zprior: ZPrior) -> None:
        ...

    def load_zprior(self, path: Path) -> ZPrior:
        ...

    def save_test_case(self, path: Path, case: TestCase) -> None:
        ...

    def load_test_case(self, path: Path) -> TestCase:
        ...


class CorpusRepository(Protocol):
    """Protocol for corpus directories."""

    def save(self, directory: Path, corpus: Corpus, split_counts: Optional[Tuple[int, int]] = None) -> None:
        """Save every sequence plus a manifest."""
        ...

    def load(self, directory: Path) -> Corpus:
        """Load a corpus in manifest order."""
        ...


class MetricsRepository(Protocol):
    """Protocol for experiment result storage."""

    def save_run(self, run_id: RunId, setting: str, methods: List[str], config: dict) -> None:
        """Register an experiment run."""
        ...

    def add_records(self, run_id: RunId, records: List[MetricsRecord]) -> None:
        """Store the per-case records of a run."""
        ...

    def find_records(self, run_id: RunId) -> List[MetricsRecord]:
        """Find all records of a run."""
        ...

    def list_runs(self) -> List[dict]:
        """List registered runs."""
        ...
