"""Experiment harness application service.

Runs every requested method on every test case of one held-out setting,
scores each reconstruction, and writes the run's report:

* ``results.jsonl``: one MetricsRecord per line, case-major, methods in
  request order;
* ``summary.json``: per (setting, method) mean ± std plus paired
  comparisons against the proposed method;
* ``plots/``: TMP traces and scar maps per case, objective traces for the
  proposed method.

A failing (case, method) pair becomes a record with a failure message; the
run carries on.
"""

import logging
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Union

import numpy as np
from joblib import Parallel, delayed

from ...domain import (
    DomainException,
    EMConfig,
    FixedEPConfig,
    GreensiteConfig,
    HeartMesh,
    LeadField,
    MeasurementModel,
    MethodTag,
    MetricsRecord,
    MetricsRepository,
    PacingConfig,
    RunId,
    ScarMode,
    ScarRule,
    SettingTag,
    TestCase,
    TMPSequence,
    VAEWeights,
    ZPrior,
)
from ...domain.services import (
    GroupSummary,
    PairedComparison,
    aggregate,
    detect_scar,
    dice,
    em_infer,
    estimate_beta,
    fixed_ep_reconstruct,
    greensite_reconstruct,
    nrmse,
    origin_error,
    paired_statistics,
    simulate,
)
from ...domain.services.baselines import minimum_z_face
from ...infrastructure import ContainerArtifactRepository, FileCorpusRepository
from ...infrastructure.plotting import plot_objective_trace, plot_scar_map, plot_tmp_traces
from ..dtos import (
    ExperimentConfig,
    ExperimentRunResponse,
    ExperimentSummary,
    GroupSummaryDTO,
    MetricsRecordDTO,
    MetricSummaryDTO,
    PairedComparisonDTO,
)
from ..exceptions import ApplicationException
from .corpus_service import CorpusApplicationService
from .mappers import to_em_config, to_fixed_ep_config, to_greensite_config, to_scar_rule

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
RESULTS = "results.jsonl"
SUMMARY = "summary.json"
PLOTS = "plots"


@dataclass(frozen=True)
class MethodContext:
    """Everything a worker needs to run any method on any case."""

    mesh: HeartMesh
    lead_field: LeadField
    rules: Dict[MethodTag, ScarRule]
    em: EMConfig = field(default_factory=EMConfig)
    beta: Optional[float] = None
    beta_max: float = 1e8
    greensite: GreensiteConfig = field(default_factory=GreensiteConfig)
    fixed_ep: FixedEPConfig = field(default_factory=FixedEPConfig)
    fixed_ep_beta: Optional[float] = None
    weights: Optional[VAEWeights] = None
    zprior: Optional[ZPrior] = None
    model_tmp: Optional[TMPSequence] = None


@dataclass
class CaseOutcome:
    record: MetricsRecord
    estimate: Optional[np.ndarray] = None
    detected: Set[int] = field(default_factory=set)
    objective_trace: List[float] = field(default_factory=list)


def _reconstruct(method: MethodTag, case: TestCase, ctx: MethodContext):
    dt = case.tmp_true.dt_effective
    if method is MethodTag.PROPOSED:
        if ctx.weights is None or ctx.zprior is None:
            raise ApplicationException("the proposed method needs trained weights and a Z prior")
        beta = estimate_beta(case.ecg, ctx.lead_field, ctx.beta, ctx.beta_max)
        result = em_infer(MeasurementModel(ctx.lead_field, beta), case.ecg, ctx.weights, ctx.zprior, ctx.em)
        return TMPSequence(result.posterior.U_hat, dt), result.objective_trace
    if method is MethodTag.GREENSITE:
        return greensite_reconstruct(ctx.lead_field, case.ecg, ctx.greensite, dt).tmp, []
    beta = estimate_beta(case.ecg, ctx.lead_field, ctx.fixed_ep_beta, ctx.beta_max)
    estimate = fixed_ep_reconstruct(ctx.lead_field, case.ecg, ctx.mesh, beta, ctx.fixed_ep, ctx.model_tmp)
    return estimate.tmp, []


def evaluate_case(method: MethodTag, case: TestCase, ctx: MethodContext) -> CaseOutcome:
    """Reconstruct one case with one method and score it; failures become records.

    Dice is left out for scar-free cases.
    """
    try:
        estimate, trace = _reconstruct(method, case, ctx)
        detected = detect_scar(estimate, ctx.rules[method])
        record = MetricsRecord(
            case_id=case.case_id,
            method=method,
            setting=case.setting_tag,
            nrmse=nrmse(estimate, case.tmp_true),
            dice=dice(detected, case.scar_true) if case.scar_true else None,
            origin_error_mm=origin_error(estimate, case.origin_true, ctx.mesh),
        )
        return CaseOutcome(record, estimate.U, detected, list(trace))
    except (DomainException, ApplicationException, ValueError, np.linalg.LinAlgError) as e:
        logger.warning("%s on %s failed: %s", method.value, case.case_id, e)
        logger.debug("failure details", exc_info=True)
        return _failed(method, case, e)
    except Exception as e:
        logger.exception("%s on %s failed unexpectedly", method.value, case.case_id)
        return _failed(method, case, e)


def _failed(method: MethodTag, case: TestCase, error: Exception) -> CaseOutcome:
    return CaseOutcome(
        MetricsRecord(
            case_id=case.case_id,
            method=method,
            setting=case.setting_tag,
            nrmse=None,
            dice=None,
            origin_error_mm=None,
            failure=f"{type(error).__name__}: {error}",
        )
    )


def to_record_dto(record: MetricsRecord) -> MetricsRecordDTO:
    return MetricsRecordDTO(
        case_id=record.case_id,
        method=record.method.value,
        setting=record.setting.value,
        nrmse=record.nrmse,
        dice=record.dice,
        origin_error_mm=record.origin_error_mm,
        failure=record.failure,
    )


def from_record_dto(dto: MetricsRecordDTO) -> MetricsRecord:
    return MetricsRecord(
        case_id=dto.case_id,
        method=MethodTag(dto.method),
        setting=SettingTag(dto.setting),
        nrmse=dto.nrmse,
        dice=dto.dice,
        origin_error_mm=dto.origin_error_mm,
        failure=dto.failure,
    )


def read_results(path: PathLike) -> List[MetricsRecord]:
    """Parse a ``results.jsonl`` table back into records."""
    lines = Path(path).read_text().splitlines()
    return [from_record_dto(MetricsRecordDTO.model_validate_json(line)) for line in lines if line.strip()]


def _summary_dto(group: GroupSummary) -> GroupSummaryDTO:
    def metric(summary):
        return MetricSummaryDTO(
            count=summary.count, mean=summary.mean, std=summary.std, undefined=summary.undefined
        )

    return GroupSummaryDTO(
        setting=group.setting.value,
        method=group.method.value,
        cases=group.cases,
        failures=group.failures,
        nrmse=metric(group.nrmse),
        dice=metric(group.dice),
        origin_error_mm=metric(group.origin_error_mm),
    )


def _paired_dto(comparison: PairedComparison) -> PairedComparisonDTO:
    return PairedComparisonDTO(
        setting=comparison.setting.value,
        metric=comparison.metric,
        reference=comparison.reference.value,
        other=comparison.other.value,
        pairs=comparison.pairs,
        mean_difference=comparison.mean_difference,
        t_statistic=comparison.t_statistic,
        p_value=comparison.p_value,
    )


def summarize(
    run_id: str, setting: SettingTag, methods: Sequence[MethodTag], records: List[MetricsRecord]
) -> ExperimentSummary:
    return ExperimentSummary(
        run_id=run_id,
        setting=setting.value,
        methods=[m.value for m in methods],
        record_count=len(records),
        failures=sum(1 for r in records if r.failed),
        groups=[_summary_dto(g) for g in aggregate(records)],
        paired=[_paired_dto(p) for p in paired_statistics(records)],
    )


def _parse_methods(methods: Sequence[str]) -> List[MethodTag]:
    try:
        tags = [MethodTag(m.strip()) for m in methods if m.strip()]
    except ValueError as e:
        raise ApplicationException(
            f"{e}; expected methods from {[t.value for t in MethodTag]}"
        )
    if not tags:
        raise ApplicationException("at least one method is required")
    if len(set(tags)) != len(tags):
        raise ApplicationException("methods must not repeat")
    return tags


def _plot_nodes(case: TestCase, mesh: HeartMesh, configured: Sequence[int]) -> List[int]:
    if configured:
        return [n for n in configured if 0 <= n < mesh.node_count]
    nodes = [case.origin_true]
    if case.scar_true:
        nodes.append(case.scar_true[0])
    nodes.append(int(np.argmax(mesh.distances_from(case.origin_true))))
    return list(dict.fromkeys(nodes))


class ExperimentApplicationService:
    """Runs experiment suites and answers queries about stored runs.

    Runs are stored through the metrics repository when one is supplied; the
    results table and summary files are written either way.
    """

    def __init__(
        self,
        artifacts: ContainerArtifactRepository,
        metrics_repo: Optional[MetricsRepository] = None,
        corpus_service: Optional[CorpusApplicationService] = None,
    ):
        self.artifacts = artifacts
        self.metrics_repo = metrics_repo
        self.corpus_service = corpus_service

    def run_experiment(
        self,
        setting: str,
        methods: Sequence[str],
        cases: Sequence[TestCase],
        out: PathLike,
        config: Optional[ExperimentConfig] = None,
        mesh: Optional[HeartMesh] = None,
        lead_field: Optional[LeadField] = None,
        weights: Optional[VAEWeights] = None,
        zprior: Optional[ZPrior] = None,
        run_id: Optional[str] = None,
    ) -> ExperimentSummary:
        """Evaluate methods × cases and write the report.

        Artifacts not passed in are loaded from the paths in ``config``.
        """
        config = config or ExperimentConfig()
        try:
            tag = SettingTag(setting)
        except ValueError:
            raise ApplicationException(
                f"unknown setting {setting!r}; expected one of {[t.value for t in SettingTag]}"
            )
        method_tags = _parse_methods(methods)
        if not cases:
            raise ApplicationException("no test cases to evaluate")
        mismatched = [c.case_id for c in cases if c.setting_tag is not tag]
        if mismatched:
            raise ApplicationException(f"cases {mismatched} do not belong to setting {tag.value}")

        ctx = self._context(method_tags, config, mesh, lead_field, weights, zprior)
        run_id = run_id or str(uuid.uuid4())
        logger.info(
            "run %s: %d cases × %s on %s", run_id, len(cases),
            ",".join(m.value for m in method_tags), tag.value,
        )

        outcomes: List[CaseOutcome] = Parallel(n_jobs=config.n_jobs)(
            delayed(evaluate_case)(method, case, ctx) for case in cases for method in method_tags
        )
        records = [outcome.record for outcome in outcomes]
        summary = summarize(run_id, tag, method_tags, records)

        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / RESULTS, "w") as f:
            for record in records:
                f.write(to_record_dto(record).model_dump_json() + "\n")
        (out / SUMMARY).write_text(summary.model_dump_json(indent=2) + "\n")
        if config.plots:
            self._write_plots(out / PLOTS, cases, method_tags, outcomes, ctx, config)

        if self.metrics_repo is not None:
            self.metrics_repo.save_run(
                RunId(run_id),
                tag.value,
                [m.value for m in method_tags],
                config.model_dump(),
            )
            self.metrics_repo.add_records(RunId(run_id), records)
        if summary.failures:
            logger.warning("run %s finished with %d failed record(s)", run_id, summary.failures)
        return summary

    def run_from_directory(
        self,
        setting: str,
        methods: Sequence[str],
        cases_dir: PathLike,
        out: PathLike,
        config: Optional[ExperimentConfig] = None,
        run_id: Optional[str] = None,
    ) -> ExperimentSummary:
        corpus_service = self.corpus_service or CorpusApplicationService(
            self.artifacts, FileCorpusRepository(self.artifacts)
        )
        cases = corpus_service.load_cases(cases_dir)
        return self.run_experiment(setting, methods, cases, out, config, run_id=run_id)

    def list_runs(self) -> List[ExperimentRunResponse]:
        return [ExperimentRunResponse(**self._run_fields(run)) for run in self._repo().list_runs()]

    def get_records(self, run_id: str) -> List[MetricsRecordDTO]:
        self._require_run(run_id)
        return [to_record_dto(r) for r in self._repo().find_records(RunId(run_id))]

    def get_summary(self, run_id: str) -> ExperimentSummary:
        """Re-aggregate a stored run from its records."""
        run = self._require_run(run_id)
        records = self._repo().find_records(RunId(run_id))
        methods = [MethodTag(m) for m in run["methods"]]
        return summarize(run["run_id"], SettingTag(run["setting"]), methods, records)

    def _repo(self) -> MetricsRepository:
        if self.metrics_repo is None:
            raise ApplicationException("no results store configured")
        return self.metrics_repo

    def _require_run(self, run_id: str) -> dict:
        try:
            uuid.UUID(str(run_id))
        except ValueError:
            raise ApplicationException("Experiment run not found")
        run = self._repo().find_run(RunId(run_id))
        if run is None:
            raise ApplicationException("Experiment run not found")
        return run

    @staticmethod
    def _run_fields(run: dict) -> dict:
        return {
            "run_id": run["run_id"],
            "setting": run["setting"],
            "methods": run["methods"],
            "record_count": run["record_count"],
            "created_at": run["created_at"],
        }

    def _context(
        self,
        methods: List[MethodTag],
        config: ExperimentConfig,
        mesh: Optional[HeartMesh],
        lead_field: Optional[LeadField],
        weights: Optional[VAEWeights],
        zprior: Optional[ZPrior],
    ) -> MethodContext:
        try:
            if mesh is None or lead_field is None:
                if config.bundle is None:
                    raise ApplicationException("a geometry bundle is required")
                mesh = mesh or self.artifacts.load_mesh(config.bundle)
                lead_field = lead_field or self.artifacts.load_lead_field(config.bundle, mesh.node_count)
            if MethodTag.PROPOSED in methods:
                if weights is None:
                    if config.weights is None:
                        raise ApplicationException("the proposed method needs trained weights")
                    weights = self.artifacts.load_weights(config.weights)
                if zprior is None:
                    if config.zprior is None:
                        raise ApplicationException("the proposed method needs a Z prior")
                    zprior = self.artifacts.load_zprior(config.zprior)
            physiological = to_scar_rule(config.scar_rule, ScarMode.PHYSIOLOGICAL)
            fixed_ep = to_fixed_ep_config(config.fixed_ep)
            ctx = MethodContext(
                mesh=mesh,
                lead_field=lead_field,
                rules={
                    MethodTag.PROPOSED: physiological,
                    MethodTag.FIXED_EP: physiological,
                    MethodTag.GREENSITE: to_scar_rule(config.scar_rule, ScarMode.AMPLITUDE),
                },
                em=to_em_config(config.em),
                beta=config.em.beta,
                beta_max=config.em.beta_max,
                greensite=to_greensite_config(config.greensite),
                fixed_ep=fixed_ep,
                fixed_ep_beta=config.fixed_ep.beta,
                weights=weights,
                zprior=zprior,
            )
        except (DomainException, ValueError) as e:
            raise ApplicationException(str(e))

        if MethodTag.FIXED_EP in methods:
            ctx = self._with_fixed_model(ctx)
        return ctx

    def _with_fixed_model(self, ctx: MethodContext) -> MethodContext:
        """Simulate the fixed-EP model once; if that fails every fixed-EP case reports it."""
        config = ctx.fixed_ep
        try:
            pacing = PacingConfig(
                origin_nodes=tuple(config.origin_nodes or minimum_z_face(ctx.mesh)),
                stim_start=config.pacing.stim_start,
                stim_duration=config.pacing.stim_duration,
                stim_amplitude=config.pacing.stim_amplitude,
            )
            model_tmp = simulate(ctx.mesh, config.ap_params, pacing)
        except (DomainException, ValueError) as e:
            logger.warning("fixed-EP model simulation failed: %s", e)
            return ctx
        return replace(ctx, model_tmp=model_tmp)

    def _write_plots(
        self,
        directory: Path,
        cases: Sequence[TestCase],
        methods: List[MethodTag],
        outcomes: List[CaseOutcome],
        ctx: MethodContext,
        config: ExperimentConfig,
    ) -> None:
        per_case = len(methods)
        for position, case in enumerate(cases):
            chunk = outcomes[position * per_case:(position + 1) * per_case]
            estimates = {o.record.method.value: o.estimate for o in chunk if o.estimate is not None}
            if not estimates:
                continue
            plot_tmp_traces(
                directory / f"{case.case_id}_traces.png",
                case.tmp_true.U,
                estimates,
                _plot_nodes(case, ctx.mesh, config.plot_nodes),
                case.tmp_true.dt_effective,
                title=case.case_id,
            )
            plot_scar_map(
                directory / f"{case.case_id}_scar.png",
                ctx.mesh.node_coords,
                case.scar_true,
                {o.record.method.value: o.detected for o in chunk if o.estimate is not None},
                title=case.case_id,
            )
            for outcome in chunk:
                if outcome.objective_trace:
                    plot_objective_trace(
                        directory / f"{case.case_id}_objective.png",
                        outcome.objective_trace,
                        title=case.case_id,
                    )
