"""Reconstruction quality metrics and their aggregation."""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy import stats

from ..entities import HeartMesh, MetricsRecord, TMPSequence
from ..exceptions import InvalidArgumentException
from ..value_objects import MethodTag, ScarMode, ScarRule, SettingTag
from .simulation import activation_times, apd

logger = logging.getLogger(__name__)

TMPLike = Union[TMPSequence, np.ndarray]


def _tmp(U: TMPLike, dt_effective: float = 1.0) -> TMPSequence:
    return U if isinstance(U, TMPSequence) else TMPSequence(np.asarray(U), dt_effective)


def nrmse(U_hat: TMPLike, U_true: TMPLike) -> float:
    """‖Û − U‖_F / ‖U‖_F."""
    estimate = _tmp(U_hat).U
    truth = _tmp(U_true).U
    if estimate.shape != truth.shape:
        raise InvalidArgumentException(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    norm = np.linalg.norm(truth)
    if norm == 0:
        raise InvalidArgumentException("nrmse is undefined for an all-zero reference")
    return float(np.linalg.norm(estimate - truth) / norm)


def detect_scar(U_hat: TMPLike, rule: ScarRule = ScarRule()) -> Set[int]:
    """Scar nodes by the physiological or the amplitude criterion."""
    tmp = _tmp(U_hat)
    if rule.mode is ScarMode.AMPLITUDE:
        peaks = np.abs(tmp.U).max(axis=1)
        threshold = rule.amplitude_fraction * float(np.median(peaks))
        return {int(i) for i in np.flatnonzero(peaks < threshold)}

    times = activation_times(tmp)
    durations = apd(tmp)
    never = ~np.isfinite(times)
    delayed = times > rule.delay_fraction * tmp.duration
    activated = ~never
    shortened = np.zeros_like(never)
    if activated.any():
        healthy_median = float(np.median(durations[activated]))
        shortened = activated & (durations < rule.apd_fraction * healthy_median)
    return {int(i) for i in np.flatnonzero(never | delayed | shortened)}


def dice(S1: Iterable[int], S2: Iterable[int]) -> float:
    first, second = set(S1), set(S2)
    if not first and not second:
        return 1.0
    return 2.0 * len(first & second) / (len(first) + len(second))


def reconstructed_origin(U_hat: TMPLike) -> Optional[int]:
    """Earliest-activating node, smallest index on ties; None if nothing activates."""
    times = activation_times(_tmp(U_hat))
    if not np.isfinite(times).any():
        return None
    return int(np.argmin(times))


def origin_error(U_hat: TMPLike, origin_true: int, mesh: HeartMesh) -> Optional[float]:
    """Distance (mm) between the reconstructed and true origins; None when undefined."""
    origin = reconstructed_origin(U_hat)
    if origin is None:
        return None
    return float(np.linalg.norm(mesh.node_coords[origin] - mesh.node_coords[origin_true]))


@dataclass(frozen=True)
class MetricSummary:
    count: int
    mean: Optional[float]
    std: Optional[float]
    undefined: int = 0


@dataclass(frozen=True)
class GroupSummary:
    setting: SettingTag
    method: MethodTag
    cases: int
    failures: int
    nrmse: MetricSummary
    dice: MetricSummary
    origin_error_mm: MetricSummary


def _summarize(values: Sequence[Optional[float]]) -> MetricSummary:
    defined = [v for v in values if v is not None]
    undefined = len(values) - len(defined)
    if not defined:
        return MetricSummary(0, None, None, undefined)
    array = np.asarray(defined, dtype=np.float64)
    return MetricSummary(len(defined), float(array.mean()), float(array.std()), undefined)


def aggregate(records: Iterable[MetricsRecord]) -> List[GroupSummary]:
    """Mean ± population std per (setting, method), in first-seen order.

    Failed cases count as failures and contribute no metric values.
    """
    groups: Dict[Tuple[SettingTag, MethodTag], List[MetricsRecord]] = defaultdict(list)
    for record in records:
        groups[(record.setting, record.method)].append(record)

    summaries = []
    for (setting, method), members in groups.items():
        ok = [r for r in members if not r.failed]
        summaries.append(
            GroupSummary(
                setting=setting,
                method=method,
                cases=len(members),
                failures=len(members) - len(ok),
                nrmse=_summarize([r.nrmse for r in ok]),
                dice=_summarize([r.dice for r in ok]),
                origin_error_mm=_summarize([r.origin_error_mm for r in ok]),
            )
        )
    return summaries


@dataclass(frozen=True)
class PairedComparison:
    setting: SettingTag
    metric: str
    reference: MethodTag
    other: MethodTag
    pairs: int
    mean_difference: Optional[float]
    t_statistic: Optional[float]
    p_value: Optional[float]


METRIC_FIELDS = ("nrmse", "dice", "origin_error_mm")


def paired_statistics(
    records: Iterable[MetricsRecord], reference: MethodTag = MethodTag.PROPOSED
) -> List[PairedComparison]:
    """Paired t-tests of reference vs every other method over shared cases.

    Differences are reference − other. Fewer than two pairs, or zero-variance
    differences, report no statistic.
    """
    by_key: Dict[Tuple[SettingTag, MethodTag], Dict[str, MetricsRecord]] = defaultdict(dict)
    for record in records:
        if not record.failed:
            by_key[(record.setting, record.method)][record.case_id] = record

    comparisons = []
    settings = sorted({setting for setting, _ in by_key}, key=lambda s: s.value)
    for setting in settings:
        ref_cases = by_key.get((setting, reference), {})
        others = sorted(
            {method for s, method in by_key if s is setting and method is not reference},
            key=lambda m: m.value,
        )
        for other in others:
            other_cases = by_key[(setting, other)]
            for metric in METRIC_FIELDS:
                pairs = [
                    (getattr(ref_cases[c], metric), getattr(other_cases[c], metric))
                    for c in sorted(set(ref_cases) & set(other_cases))
                ]
                pairs = [(a, b) for a, b in pairs if a is not None and b is not None]
                comparisons.append(_compare(setting, metric, reference, other, pairs))
    return comparisons


def _compare(setting, metric, reference, other, pairs) -> PairedComparison:
    if not pairs:
        return PairedComparison(setting, metric, reference, other, 0, None, None, None)
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    differences = a - b
    mean_difference = float(differences.mean())
    if len(pairs) < 2 or np.all(differences == differences[0]):
        return PairedComparison(setting, metric, reference, other, len(pairs), mean_difference, None, None)
    result = stats.ttest_rel(a, b)
    return PairedComparison(
        setting, metric, reference, other, len(pairs), mean_difference,
        float(result.statistic), float(result.pvalue),
    )
