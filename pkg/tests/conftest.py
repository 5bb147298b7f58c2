"""Test configuration and shared fixtures.

Everything here is sized for unit tests: a 4×4×2 lattice, a 12-lead field,
20-column simulations and a VAE with a handful of hidden units.
"""

import numpy as np
import pytest

from ecgi.domain import (
    APParams,
    CorpusSpec,
    ECGSequence,
    MethodTag,
    MetricsRecord,
    PacingTemplate,
    ScarRegion,
    SettingTag,
    SVAEConfig,
    TestCase,
    ZPrior,
)
from ecgi.domain.services import (
    build_lattice_mesh,
    fibonacci_sphere_leads,
    generate_corpus,
    init_weights,
    pacing_for_origin,
    scar_config_for_region,
    simulate,
    synthesize_lead_field,
)
from ecgi.infrastructure import (
    ContainerArtifactRepository,
    Database,
    FileCorpusRepository,
)

SHORT_COLUMNS = 20


@pytest.fixture
def mesh():
    """4×4×2 lattice, 32 nodes, unit spacing."""
    return build_lattice_mesh((4, 4, 2))


@pytest.fixture
def lead_field(mesh):
    """12 leads on a sphere around the lattice."""
    return synthesize_lead_field(mesh, fibonacci_sphere_leads(mesh, 12))


@pytest.fixture
def short_params():
    """20 recorded columns, one time unit apart."""
    return APParams(n_steps=400, record_stride=20)


@pytest.fixture
def training_spec(short_params):
    """Two origins at opposite corners of the bottom layer, with and without a scar."""
    return CorpusSpec(
        origin_nodes=(0, 15),
        scar_regions=(ScarRegion(), ScarRegion(21, 0.0)),
        ap_params=short_params,
        seed=0,
    )


@pytest.fixture
def small_corpus(mesh, training_spec):
    return generate_corpus(mesh, training_spec)


@pytest.fixture
def paced_tmp(mesh, short_params):
    """Scar-free activation from node 0."""
    return simulate(mesh, short_params, pacing_for_origin(mesh, 0, PacingTemplate()))


@pytest.fixture
def case_factory(mesh, lead_field, short_params):
    """Builds noiseless cases on the shared mesh."""

    def factory(origin, scar_center=None, case_id="case-000", setting=SettingTag.UNSEEN_SCAR):
        scar = scar_config_for_region(mesh, ScarRegion(scar_center, 0.0))
        pacing = pacing_for_origin(mesh, origin, PacingTemplate())
        tmp = simulate(mesh, short_params, pacing, scar)
        return TestCase(
            case_id=case_id,
            tmp_true=tmp,
            ecg=ECGSequence(lead_field.project(tmp.U)),
            origin_true=origin,
            scar_true=scar.scar_nodes,
            snr_db=float("inf"),
            setting_tag=setting,
        )

    return factory


@pytest.fixture
def test_cases(case_factory):
    """Three unseen-scar cases with different origins and scars."""
    return [
        case_factory(0, 26, "unseen-scar-000"),
        case_factory(15, 18, "unseen-scar-001"),
        case_factory(3, 28, "unseen-scar-002"),
    ]


@pytest.fixture
def tiny_config(mesh):
    return SVAEConfig(
        n_nodes=mesh.node_count,
        latent_dim=3,
        encoder_hidden=(5, 4),
        decoder_hidden=(4, 5),
        epochs=2,
        batch_size=2,
        seed=0,
    )


@pytest.fixture
def tiny_weights(tiny_config):
    return init_weights(tiny_config)


@pytest.fixture
def zprior(tiny_config):
    rng = np.random.default_rng(7)
    shape = (tiny_config.latent_dim, SHORT_COLUMNS)
    return ZPrior(Z_bar=rng.normal(0.0, 0.5, size=shape), C=np.full(shape, 0.5))


@pytest.fixture
def artifacts():
    return ContainerArtifactRepository()


@pytest.fixture
def corpora(artifacts):
    return FileCorpusRepository(artifacts)


@pytest.fixture
def corpus_dir(tmp_path, corpora, small_corpus):
    """small_corpus saved with a 3/1 split."""
    directory = tmp_path / "corpus"
    corpora.save(directory, small_corpus, (3, 1))
    return directory


@pytest.fixture
def geometry_bundle(tmp_path, artifacts, mesh, lead_field):
    """Mesh and lead field saved together, as ``geometry build`` does."""
    path = tmp_path / "bundle.ntc"
    artifacts.save_geometry(path, mesh, lead_field, {"dims": [4, 4, 2]})
    return path


@pytest.fixture
def database(tmp_path):
    """File-backed SQLite store so sessions on other threads see the same tables."""
    db = Database(f"sqlite:///{tmp_path / 'results.db'}")
    db.create_tables()
    return db


@pytest.fixture
def sample_records():
    """Two methods on three unseen-scar cases, one greensite failure."""
    setting = SettingTag.UNSEEN_SCAR
    return [
        MetricsRecord("c0", MethodTag.PROPOSED, setting, 0.2, 0.75, 1.0),
        MetricsRecord("c0", MethodTag.GREENSITE, setting, 1.0, 0.25, 2.0),
        MetricsRecord("c1", MethodTag.PROPOSED, setting, 0.3, 0.5, 0.0),
        MetricsRecord("c1", MethodTag.GREENSITE, setting, 0.9, 0.0, 3.0),
        MetricsRecord("c2", MethodTag.PROPOSED, setting, 0.4, 0.7, None),
        MetricsRecord(
            "c2", MethodTag.GREENSITE, setting, None, None, None, failure="SolverException: x"
        ),
    ]
