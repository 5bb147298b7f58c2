"""Aliev-Panfilov reaction-diffusion on a heart mesh, explicit Euler."""

import logging
import math
from dataclasses import asdict
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from ..entities import HeartMesh, TMPSequence
from ..exceptions import ConfigurationException
from ..value_objects import APParams, PacingConfig, PacingTemplate, ScarConfig, ScarRegion

logger = logging.getLogger(__name__)

ACTIVATION_THRESHOLD = 0.5


def pacing_for_origin(mesh: HeartMesh, origin: int, template: PacingTemplate) -> PacingConfig:
    """Stimulate every node within the template's pace radius of origin."""
    if not 0 <= origin < mesh.node_count:
        raise ConfigurationException(f"origin node {origin} is not a mesh node")
    return PacingConfig(
        origin_nodes=mesh.nodes_within(origin, template.pace_radius),
        stim_start=template.stim_start,
        stim_duration=template.stim_duration,
        stim_amplitude=template.stim_amplitude,
    )


def scar_config_for_region(mesh: HeartMesh, region: ScarRegion) -> ScarConfig:
    if region.is_empty:
        return ScarConfig()
    if not 0 <= region.center < mesh.node_count:
        raise ConfigurationException(f"scar center {region.center} is not a mesh node")
    return ScarConfig(scar_nodes=mesh.nodes_within(region.center, region.radius))


def stability_limit(mesh: HeartMesh, params: APParams) -> float:
    """Largest explicit-Euler step the diffusion term tolerates."""
    stiffness = params.diffusion * mesh.max_diagonal
    return math.inf if stiffness == 0 else 1.0 / (2.0 * stiffness)


def _stimulus_steps(pacing: PacingConfig, dt: float):
    first = math.ceil(pacing.stim_start / dt - 1e-9)
    stop = math.ceil((pacing.stim_start + pacing.stim_duration) / dt - 1e-9)
    return first, stop


def _scarred_laplacian(laplacian: sparse.csr_matrix, scar: np.ndarray) -> sparse.csr_matrix:
    """Drop every edge incident to a scar node and restore zero row sums."""
    mask = np.ones(laplacian.shape[0])
    mask[scar] = 0.0
    keep = sparse.diags(mask)
    off_diagonal = laplacian - sparse.diags(laplacian.diagonal())
    coupled = keep @ off_diagonal @ keep
    degree = np.asarray(coupled.sum(axis=1)).ravel()
    return (coupled - sparse.diags(degree)).tocsr()


def _validate_nodes(nodes: Sequence[int], n: int, what: str):
    bad = [i for i in nodes if not 0 <= i < n]
    if bad:
        raise ConfigurationException(f"{what} node {bad[0]} is outside the mesh (n={n})")


def simulate(
    mesh: HeartMesh,
    params: APParams,
    pacing: PacingConfig,
    scar: ScarConfig = ScarConfig(),
) -> TMPSequence:
    """Integrate the monodomain Aliev-Panfilov model and record every stride-th state.

    Column c holds the state after (c + 1)·record_stride Euler steps.
    """
    n = mesh.node_count
    _validate_nodes(pacing.origin_nodes, n, "origin")
    _validate_nodes(scar.scar_nodes, n, "scar")

    overlap = set(pacing.origin_nodes) & set(scar.scar_nodes)
    if overlap:
        raise ConfigurationException(
            f"pacing site overlaps the scar at node(s) {sorted(overlap)[:5]}"
        )

    limit = stability_limit(mesh, params)
    if params.dt >= limit:
        raise ConfigurationException(
            f"dt={params.dt} violates the explicit-Euler bound {limit:.6g} "
            f"(diffusion={params.diffusion}, max|L_ii|={mesh.max_diagonal:.6g})"
        )

    logger.debug(
        "simulate: %d nodes, %d steps, origins=%s, %d scar nodes",
        n, params.n_steps, pacing.origin_nodes[:4], len(scar.scar_nodes),
    )

    scar_idx = np.asarray(scar.scar_nodes, dtype=np.int64)
    laplacian = mesh.laplacian if scar.is_empty else _scarred_laplacian(mesh.laplacian, scar_idx)
    live = np.ones(n)
    live[scar_idx] = 0.0

    stim = np.zeros(n)
    stim[list(pacing.origin_nodes)] = pacing.stim_amplitude
    stim_first, stim_stop = _stimulus_steps(pacing, params.dt)

    k, a, eps0, mu1, mu2 = params.k, params.a, params.eps0, params.mu1, params.mu2
    dt, diffusion, stride = params.dt, params.diffusion, params.record_stride

    u = np.zeros(n)
    v = np.zeros(n)
    record = np.empty((n, params.n_columns))
    for step in range(params.n_steps):
        du = diffusion * (laplacian @ u) + live * (-k * u * (u - a) * (u - 1.0) - u * v)
        if stim_first <= step < stim_stop:
            du = du + stim
        gate = eps0 + mu1 * v / (u + mu2)
        dv = live * gate * (-v - k * u * (u - a - 1.0))
        u = u + dt * du
        v = v + dt * dv
        if scar_idx.size:
            u[scar_idx] = 0.0
            v[scar_idx] = 0.0
        if (step + 1) % stride == 0:
            column = (step + 1) // stride - 1
            if column < record.shape[1]:
                record[:, column] = u

    if not np.all(np.isfinite(record)):
        raise ConfigurationException("simulation diverged; reduce dt or the stimulus amplitude")

    metadata = {
        "ap_params": asdict(params),
        "pacing": asdict(pacing),
        "scar_nodes": list(scar.scar_nodes),
    }
    return TMPSequence(record, dt_effective=params.dt_effective, metadata=metadata)


def activation_times(tmp: TMPSequence) -> np.ndarray:
    """Time of the steepest upstroke per node; inf where u never exceeds 0.5."""
    U = tmp.U
    peaks = U.max(axis=1)
    if U.shape[1] < 2:
        times = np.zeros(U.shape[0])
    else:
        times = (np.argmax(np.diff(U, axis=1), axis=1) + 1) * tmp.dt_effective
    return np.where(peaks > ACTIVATION_THRESHOLD, times.astype(np.float64), np.inf)


def _crossing(previous: float, current: float) -> float:
    return (previous - ACTIVATION_THRESHOLD) / (previous - current)


def apd(tmp: TMPSequence) -> np.ndarray:
    """Action-potential duration at the 0.5 level, linearly interpolated.

    Nodes that never activate get 0; nodes still depolarized at the end of the
    window run to the last recorded column.
    """
    U = tmp.U
    n, T = U.shape
    durations = np.zeros(n)
    above = U >= ACTIVATION_THRESHOLD
    for node in range(n):
        if U[node].max() <= ACTIVATION_THRESHOLD:
            continue
        row = U[node]
        up = int(np.argmax(above[node]))
        if up == 0:
            t_up = 0.0
        else:
            t_up = (up - 1) + (ACTIVATION_THRESHOLD - row[up - 1]) / (row[up] - row[up - 1])
        below_after = np.flatnonzero(~above[node, up:])
        if below_after.size == 0:
            t_down = float(T - 1)
        else:
            down = up + int(below_after[0])
            t_down = (down - 1) + _crossing(row[down - 1], row[down])
        durations[node] = (t_down - t_up) * tmp.dt_effective
    return durations


def reference_cell_trajectory(
    params: APParams, pacing: PacingConfig, times: np.ndarray
) -> np.ndarray:
    """u(t) of one isolated cell under the stimulus, integrated with an adaptive solver."""
    times = np.asarray(times, dtype=np.float64)
    k, a, eps0, mu1, mu2 = params.k, params.a, params.eps0, params.mu1, params.mu2

    def rhs(current, t, y):
        u, v = y
        du = -k * u * (u - a) * (u - 1.0) - u * v + current
        dv = (eps0 + mu1 * v / (u + mu2)) * (-v - k * u * (u - a - 1.0))
        return [du, dv]

    start = pacing.stim_start
    stop = pacing.stim_start + pacing.stim_duration
    end = float(times.max()) if times.size else 0.0
    segments = [(0.0, start, 0.0), (start, stop, pacing.stim_amplitude), (stop, max(end, stop), 0.0)]

    state = [0.0, 0.0]
    out = np.zeros_like(times)
    for t0, t1, current in segments:
        if t1 <= t0:
            continue
        solution = solve_ivp(
            lambda t, y, current=current: rhs(current, t, y),
            (t0, t1),
            state,
            method="LSODA",
            dense_output=True,
            rtol=1e-10,
            atol=1e-12,
        )
        inside = (times >= t0) & (times <= t1)
        if inside.any():
            out[inside] = solution.sol(times[inside])[0]
        state = list(solution.y[:, -1])
    return out
