"""Corpus application service."""

import logging
from pathlib import Path
from typing import List, Optional, Union

from ...domain import DomainException, ScarRegion, SettingTag, TestCase
from ...domain.services import (
    default_corpus_spec,
    generate_corpus,
    make_test_cases,
    plan_held_out,
    split,
)
from ...infrastructure import ContainerArtifactRepository, FileCorpusRepository
from ..dtos import CaseSetResponse, CorpusResponse, CorpusSpecFile
from ..exceptions import ApplicationException
from .mappers import to_ap_params, to_corpus_spec, to_pacing_template, to_scar_regions

logger = logging.getLogger(__name__)

CASE_INDEX = "cases.json"


class CorpusApplicationService:
    """Generates training corpora and held-out test-case sets.

    Training sequences go to a corpus directory (one container per sequence
    plus ``manifest.json``); test cases go to a case directory with one
    container per case and a ``cases.json`` index.
    """

    def __init__(self, artifacts: ContainerArtifactRepository, corpora: FileCorpusRepository):
        self.artifacts = artifacts
        self.corpora = corpora

    def generate(
        self,
        mesh_path: Union[str, Path],
        request: CorpusSpecFile,
        out: Union[str, Path],
        n_jobs: int = 1,
    ) -> CorpusResponse:
        try:
            mesh = self.artifacts.load_mesh(mesh_path)
            if request.origin_nodes:
                regions = to_scar_regions(request) or (ScarRegion(),)
                spec = to_corpus_spec(request, request.origin_nodes, regions)
            else:
                spec = default_corpus_spec(
                    mesh,
                    n_origins=request.n_origins,
                    n_scars=request.n_scars,
                    scar_radius=request.scar_radius,
                    ap_params=to_ap_params(request.ap_params),
                    pacing=to_pacing_template(request.pacing),
                    seed=request.seed,
                )
            corpus = generate_corpus(mesh, spec, n_jobs=n_jobs)
            train, validation = split(corpus, request.val_fraction, request.seed)
        except (DomainException, ValueError, TypeError) as e:
            raise ApplicationException(str(e))

        self.corpora.save(out, corpus, (len(train), len(validation)))
        return CorpusResponse(
            directory=str(out),
            count=len(corpus),
            train_count=len(train),
            val_count=len(validation),
        )

    def make_cases(
        self,
        bundle_path: Union[str, Path],
        corpus_dir: Union[str, Path],
        setting: str,
        out: Union[str, Path],
        snr_db: float = 20.0,
        n_origins: int = 5,
        n_scars: int = 2,
        scar_radius: Optional[float] = None,
        seed: int = 1,
        n_jobs: int = 1,
    ) -> CaseSetResponse:
        """Plan held-out pairs for a setting against a training corpus and save the cases."""
        try:
            tag = SettingTag(setting)
        except ValueError:
            raise ApplicationException(
                f"unknown setting {setting!r}; expected one of {[t.value for t in SettingTag]}"
            )
        try:
            mesh = self.artifacts.load_mesh(bundle_path)
            lead_field = self.artifacts.load_lead_field(bundle_path, mesh.node_count)
            training = self.corpora.load_manifest_spec(corpus_dir)
            held_out = plan_held_out(mesh, training, tag, n_origins, n_scars, scar_radius, seed)
            cases = make_test_cases(mesh, lead_field, held_out, snr_db, tag, training, n_jobs=n_jobs)
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

        out = Path(out)
        for case in cases:
            self.artifacts.save_test_case(out / f"{case.case_id}.ntc", case)
        response = CaseSetResponse(
            directory=str(out),
            setting=tag.value,
            snr_db=snr_db,
            case_ids=[case.case_id for case in cases],
        )
        (out / CASE_INDEX).write_text(response.model_dump_json(indent=2) + "\n")
        return response

    def load_cases(self, directory: Union[str, Path]) -> List[TestCase]:
        """Load every case container of a case directory in file-name order."""
        directory = Path(directory)
        paths = sorted(directory.glob("*.ntc"))
        if not paths:
            raise ApplicationException(f"no test cases in {directory}")
        try:
            return [self.artifacts.load_test_case(path) for path in paths]
        except DomainException as e:
            raise ApplicationException(str(e))
