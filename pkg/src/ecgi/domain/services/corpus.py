"""Training corpora, held-out test cases and their splits."""

import logging
from typing import FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..entities import (
    Corpus,
    CorpusEntry,
    ECGSequence,
    HeartMesh,
    LeadField,
    TestCase,
    TMPSequence,
)
from ..exceptions import ConfigurationException, InvalidArgumentException
from ..value_objects import (
    APParams,
    CaseId,
    CorpusSpec,
    PacingTemplate,
    ScarRegion,
    SettingTag,
)
from .simulation import pacing_for_origin, scar_config_for_region, simulate

logger = logging.getLogger(__name__)


def _simulate_pair(mesh: HeartMesh, spec: CorpusSpec, index: int, origin: int, region: ScarRegion):
    try:
        pacing = pacing_for_origin(mesh, origin, spec.pacing)
        scar = scar_config_for_region(mesh, region)
        tmp = simulate(mesh, spec.ap_params, pacing, scar)
    except ConfigurationException as e:
        raise ConfigurationException(
            f"pair {index} (origin {origin}, scar center {region.center}, radius {region.radius}): {e}"
        ) from e
    return CorpusEntry(index, origin, region, scar.scar_nodes, tmp)


def generate_corpus(mesh: HeartMesh, spec: CorpusSpec, n_jobs: int = 1) -> Corpus:
    """Simulate every origin × scar pair of the spec, in product order."""
    pairs = spec.pairs()
    logger.info(
        "generating corpus: %d origins × %d scar configurations = %d sequences",
        len(spec.origin_nodes), len(spec.scar_regions), len(pairs),
    )
    entries = Parallel(n_jobs=n_jobs)(
        delayed(_simulate_pair)(mesh, spec, index, origin, region)
        for index, (origin, region) in enumerate(pairs)
    )
    return Corpus(spec=spec, entries=tuple(entries))


def split(corpus: Corpus, val_fraction: float, seed: int) -> Tuple[Corpus, Corpus]:
    """Seeded partition into (train, validation)."""
    n = len(corpus)
    if not 0 < val_fraction < 1:
        raise InvalidArgumentException(f"val_fraction must lie in (0, 1), got {val_fraction}")
    if n < 2:
        raise InvalidArgumentException("splitting needs at least two sequences")
    n_val = min(max(int(round(n * val_fraction)), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    validation = sorted(int(i) for i in order[:n_val])
    train = sorted(int(i) for i in order[n_val:])
    return corpus.subset(train), corpus.subset(validation)


def _region_nodes(mesh: HeartMesh, region: ScarRegion) -> FrozenSet[int]:
    if region.is_empty:
        return frozenset()
    return frozenset(mesh.nodes_within(region.center, region.radius))


def _patch(mesh: HeartMesh, origin: int, template: PacingTemplate) -> FrozenSet[int]:
    return frozenset(mesh.nodes_within(origin, template.pace_radius))


def _pick_evenly(candidates: Sequence[int], count: int) -> Tuple[int, ...]:
    if count > len(candidates):
        raise ConfigurationException(
            f"only {len(candidates)} admissible nodes for {count} requested"
        )
    positions = np.round(np.linspace(0, len(candidates) - 1, count)).astype(int)
    return tuple(int(candidates[i]) for i in positions)


def _spread_scar_centers(
    mesh: HeartMesh,
    count: int,
    radius: float,
    rng: np.random.Generator,
    forbidden: Set[int] = frozenset(),
    excluded_regions: Set[FrozenSet[int]] = frozenset(),
) -> Tuple[int, ...]:
    """Greedy seeded choice of scar centers at least 2·radius + 2 apart."""
    min_gap = 2.0 * radius + 2.0
    chosen: List[int] = []
    for node in rng.permutation(mesh.node_count):
        node = int(node)
        nodes = frozenset(mesh.nodes_within(node, radius))
        if nodes & forbidden or nodes in excluded_regions:
            continue
        if any(np.linalg.norm(mesh.node_coords[node] - mesh.node_coords[c]) < min_gap for c in chosen):
            continue
        chosen.append(node)
        if len(chosen) == count:
            return tuple(chosen)
    raise ConfigurationException(f"could not place {count} separated scars of radius {radius}")


def _admissible_origins(
    mesh: HeartMesh,
    scars: Sequence[FrozenSet[int]],
    template: PacingTemplate,
    exclude: Set[int] = frozenset(),
) -> List[int]:
    blocked = frozenset().union(*scars) if scars else frozenset()
    return [
        node for node in range(mesh.node_count)
        if node not in exclude and not (_patch(mesh, node, template) & blocked)
    ]


def default_corpus_spec(
    mesh: HeartMesh,
    n_origins: int = 10,
    n_scars: int = 4,
    scar_radius: float = 1.0,
    ap_params: APParams = APParams(),
    pacing: PacingTemplate = PacingTemplate(),
    seed: int = 0,
) -> CorpusSpec:
    """A product spec (no-scar plus n_scars regions) whose pairs are all admissible."""
    rng = np.random.default_rng(seed)
    centers = _spread_scar_centers(mesh, n_scars, scar_radius, rng) if n_scars else ()
    regions = (ScarRegion(),) + tuple(ScarRegion(c, scar_radius) for c in centers)
    scars = [_region_nodes(mesh, r) for r in regions[1:]]
    origins = _pick_evenly(_admissible_origins(mesh, scars, pacing), n_origins)
    return CorpusSpec(origins, regions, ap_params, pacing, seed)


def validate_setting(
    mesh: HeartMesh, held_out: CorpusSpec, training: CorpusSpec, setting: SettingTag
):
    """Enforce the exclusion rules of a held-out setting."""
    train_scars = {_region_nodes(mesh, r) for r in training.scar_regions} - {frozenset()}
    train_origins = set(training.origin_nodes)
    check_scars = setting in (SettingTag.UNSEEN_SCAR, SettingTag.UNSEEN_BOTH)
    check_origins = setting in (SettingTag.UNSEEN_ORIGIN, SettingTag.UNSEEN_BOTH)

    if check_scars:
        for region in held_out.scar_regions:
            nodes = _region_nodes(mesh, region)
            if not nodes:
                raise ConfigurationException(f"{setting.value} cases need a scar in every case")
            if nodes in train_scars:
                raise ConfigurationException(
                    f"{setting.value}: scar at node {region.center} appears in training"
                )
    if check_origins:
        seen = sorted(set(held_out.origin_nodes) & train_origins)
        if seen:
            raise ConfigurationException(
                f"{setting.value}: origin node(s) {seen} appear in training"
            )


def plan_held_out(
    mesh: HeartMesh,
    training: CorpusSpec,
    setting: SettingTag,
    n_origins: int = 5,
    n_scars: int = 2,
    scar_radius: Optional[float] = None,
    seed: int = 1,
) -> CorpusSpec:
    """Held-out spec for a setting; every pair is admissible and the exclusion rules hold."""
    rng = np.random.default_rng(seed)
    pacing = training.pacing
    train_regions = [r for r in training.scar_regions if not r.is_empty]
    radius = scar_radius if scar_radius is not None else (
        train_regions[0].radius if train_regions else 1.0
    )
    train_scars = {_region_nodes(mesh, r) for r in train_regions}

    if setting is SettingTag.UNSEEN_ORIGIN:
        regions = tuple(training.scar_regions[:n_scars])
        scars = [_region_nodes(mesh, r) for r in regions]
        candidates = _admissible_origins(mesh, scars, pacing, exclude=set(training.origin_nodes))
        origins = _pick_evenly(candidates, n_origins)
    elif setting is SettingTag.UNSEEN_SCAR:
        origins = tuple(training.origin_nodes[:n_origins])
        forbidden = frozenset().union(*(_patch(mesh, o, pacing) for o in origins))
        centers = _spread_scar_centers(mesh, n_scars, radius, rng, forbidden, train_scars)
        regions = tuple(ScarRegion(c, radius) for c in centers)
    else:
        centers = _spread_scar_centers(mesh, n_scars, radius, rng, frozenset(), train_scars)
        regions = tuple(ScarRegion(c, radius) for c in centers)
        scars = [_region_nodes(mesh, r) for r in regions]
        candidates = _admissible_origins(mesh, scars, pacing, exclude=set(training.origin_nodes))
        origins = _pick_evenly(candidates, n_origins)

    spec = CorpusSpec(origins, regions, training.ap_params, pacing, seed)
    validate_setting(mesh, spec, training, setting)
    return spec


def add_noise(Y_clean: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """White Gaussian noise at snr_db relative to the mean squared clean signal."""
    if np.isposinf(snr_db):
        return Y_clean.copy()
    signal_power = float(np.mean(Y_clean**2))
    noise_power = signal_power * 10.0 ** (-snr_db / 10.0)
    return Y_clean + rng.normal(0.0, np.sqrt(noise_power), size=Y_clean.shape)


def make_test_cases(
    mesh: HeartMesh,
    lead_field: LeadField,
    held_out: CorpusSpec,
    snr_db: float,
    setting: SettingTag,
    training: CorpusSpec,
    n_jobs: int = 1,
) -> List[TestCase]:
    """Simulate held-out pairs, project through H and add noise at snr_db.

    Case i draws its noise from default_rng([held_out.seed, i]).
    """
    if lead_field.node_count != mesh.node_count:
        raise ConfigurationException("lead field and mesh disagree on the node count")
    if np.isnan(snr_db):
        raise InvalidArgumentException("snr_db must be a number")
    validate_setting(mesh, held_out, training, setting)

    simulated = generate_corpus(mesh, held_out, n_jobs=n_jobs)
    cases = []
    for entry in simulated:
        clean = lead_field.project(entry.tmp.U)
        rng = np.random.default_rng([held_out.seed, entry.index])
        Y = add_noise(clean, snr_db, rng)
        cases.append(
            TestCase(
                case_id=CaseId(f"{setting.value}-{entry.index:03d}"),
                tmp_true=TMPSequence(entry.tmp.U, entry.tmp.dt_effective, entry.tmp.metadata),
                ecg=ECGSequence(Y, snr_db=snr_db),
                origin_true=entry.origin,
                scar_true=entry.scar_nodes,
                snr_db=snr_db,
                setting_tag=setting,
            )
        )
    logger.info("%d %s test cases at %.1f dB", len(cases), setting.value, snr_db)
    return cases
