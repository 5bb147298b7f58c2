"""Container-backed persistence for numerical artifacts.

Every artifact is one NTC1 container whose metadata carries a ``kind`` tag.
The ``_to_*`` helpers convert decoded containers back into domain entities
and turn any validation failure into a FormatException.
"""

import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy import sparse

from ...domain import (
    CaseId,
    ECGSequence,
    FormatException,
    HeartMesh,
    LeadField,
    SettingTag,
    SVAEConfig,
    TestCase,
    TMPSequence,
    VAEWeights,
    ZPrior,
)
from ...domain.services import center_rows
from ..containers import ContainerContents, decode_container, load_container, save_container

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _finite(name: str, array: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise FormatException(f"tensor {name!r} has non-finite entries")
    return array


class ContainerArtifactRepository:
    """File repository for meshes, lead fields, sequences, weights and priors."""

    def save_geometry(
        self,
        path: PathLike,
        mesh: HeartMesh,
        lead_field: Optional[LeadField] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> None:
        """Save a mesh, optionally bundled with its lead field."""
        lap = mesh.laplacian.tocoo()
        tensors = {
            "node_coords": mesh.node_coords,
            "edges": mesh.edges.astype(np.int64),
            "laplacian_rows": lap.row.astype(np.int64),
            "laplacian_cols": lap.col.astype(np.int64),
            "laplacian_values": lap.data.astype(np.float64),
        }
        if lead_field is not None:
            tensors["H"] = lead_field.H
            if lead_field.lead_coords is not None:
                tensors["lead_coords"] = lead_field.lead_coords
        meta = {"kind": "geometry", "spacing": mesh.spacing}
        meta.update(metadata or {})
        save_container(path, tensors, meta)

    def load_mesh(self, path: PathLike) -> HeartMesh:
        contents = load_container(path)
        coords = _finite("node_coords", contents.require("node_coords"))
        n = coords.shape[0] if coords.ndim == 2 else 0
        try:
            laplacian = sparse.coo_matrix(
                (
                    contents.require("laplacian_values"),
                    (contents.require("laplacian_rows"), contents.require("laplacian_cols")),
                ),
                shape=(n, n),
            ).tocsr()
            return HeartMesh(
                coords,
                contents.require("edges"),
                laplacian,
                spacing=contents.metadata.get("spacing"),
            )
        except ValueError as e:
            raise FormatException(f"invalid mesh in {path}: {e}") from e

    def save_lead_field(self, path: PathLike, lead_field: LeadField) -> None:
        tensors = {"H": lead_field.H}
        if lead_field.lead_coords is not None:
            tensors["lead_coords"] = lead_field.lead_coords
        save_container(path, tensors, {"kind": "lead_field"})

    def load_lead_field(self, path: PathLike, node_count: Optional[int] = None) -> LeadField:
        """Load H (centering rows that are not yet centered) and check its node count."""
        contents = load_container(path)
        H = _finite("H", contents.require("H"))
        if H.ndim != 2:
            raise FormatException(f"H must be 2-D, got shape {H.shape}")
        if node_count is not None and H.shape[1] != node_count:
            raise FormatException(f"H has {H.shape[1]} columns, expected {node_count} nodes")
        scale = max(1.0, float(np.abs(H).max())) if H.size else 1.0
        if np.any(np.abs(H.mean(axis=1)) > 1e-10 * scale):
            H = center_rows(H)
        coords = contents.tensors.get("lead_coords")
        try:
            return LeadField(H, coords)
        except ValueError as e:
            raise FormatException(f"invalid lead field in {path}: {e}") from e

    def save_tmp(self, path: PathLike, tmp: TMPSequence) -> None:
        save_container(
            path,
            {"U": tmp.U},
            {"kind": "tmp", "dt_effective": tmp.dt_effective, "simulation": tmp.metadata},
        )

    def load_tmp(self, path: PathLike) -> TMPSequence:
        contents = load_container(path)
        return self._to_tmp(contents, "U")

    def save_ecg(self, path: PathLike, ecg: ECGSequence) -> None:
        save_container(path, {"Y": ecg.Y}, {"kind": "ecg", "snr_db": ecg.snr_db})

    def load_ecg(self, path: PathLike) -> ECGSequence:
        """Read Y from an ECG container or from a test-case container."""
        return self._to_ecg(load_container(path))

    def parse_ecg(self, data: bytes) -> ECGSequence:
        """Read Y from container bytes, e.g. an uploaded file."""
        return self._to_ecg(decode_container(data))

    def save_weights(self, path: PathLike, weights: VAEWeights) -> None:
        config = asdict(weights.config)
        save_container(
            path,
            weights.params,
            {"kind": "weights", "config": config, "history": weights.metadata},
        )

    def load_weights(self, path: PathLike) -> VAEWeights:
        contents = load_container(path)
        try:
            raw = dict(contents.metadata["config"])
            raw["encoder_hidden"] = tuple(raw["encoder_hidden"])
            raw["decoder_hidden"] = tuple(raw["decoder_hidden"])
            config = SVAEConfig(**raw)
        except (KeyError, TypeError, ValueError) as e:
            raise FormatException(f"weights in {path} carry no valid config: {e}") from e
        params = {name: _finite(name, array) for name, array in contents.tensors.items()}
        return VAEWeights(config, params, contents.metadata.get("history", {}))

    def save_zprior(self, path: PathLike, zprior: ZPrior) -> None:
        tensors = {"Z_bar": zprior.Z_bar, "C": zprior.C}
        if zprior.anchors is not None:
            tensors["anchors"] = zprior.anchors
        save_container(path, tensors, {"kind": "zprior"})

    def load_zprior(self, path: PathLike) -> ZPrior:
        contents = load_container(path)
        try:
            anchors = contents.tensors.get("anchors")
            return ZPrior(
                _finite("Z_bar", contents.require("Z_bar")),
                _finite("C", contents.require("C")),
                None if anchors is None else _finite("anchors", anchors),
            )
        except ValueError as e:
            raise FormatException(f"invalid Z prior in {path}: {e}") from e

    def save_test_case(self, path: PathLike, case: TestCase) -> None:
        save_container(
            path,
            {
                "U_true": case.tmp_true.U,
                "Y": case.ecg.Y,
                "scar_true": np.asarray(case.scar_true, dtype=np.int64),
            },
            {
                "kind": "test_case",
                "case_id": case.case_id,
                "origin_true": case.origin_true,
                "snr_db": case.snr_db,
                "setting": case.setting_tag.value,
                "dt_effective": case.tmp_true.dt_effective,
            },
        )

    def load_test_case(self, path: PathLike) -> TestCase:
        contents = load_container(path)
        meta = contents.metadata
        try:
            snr_db = float(meta["snr_db"])
            return TestCase(
                case_id=CaseId(str(meta["case_id"])),
                tmp_true=self._to_tmp(contents, "U_true"),
                ecg=ECGSequence(_finite("Y", contents.require("Y")), snr_db=snr_db),
                origin_true=int(meta["origin_true"]),
                scar_true=tuple(int(i) for i in contents.require("scar_true")),
                snr_db=snr_db,
                setting_tag=SettingTag(meta["setting"]),
            )
        except (KeyError, ValueError) as e:
            raise FormatException(f"invalid test case in {path}: {e}") from e

    def save_reconstruction(
        self,
        path: PathLike,
        tensors: Dict[str, np.ndarray],
        metadata: Optional[Dict[str, Any]] = None,
    ) -> None:
        meta = {"kind": "reconstruction"}
        meta.update(metadata or {})
        save_container(path, tensors, meta)

    def load_reconstruction(self, path: PathLike) -> ContainerContents:
        contents = load_container(path)
        contents.require("U_hat")
        return contents

    def _to_tmp(self, contents: ContainerContents, name: str) -> TMPSequence:
        U = _finite(name, contents.require(name))
        meta = contents.metadata
        try:
            return TMPSequence(
                U,
                dt_effective=float(meta.get("dt_effective", 1.0)),
                metadata=meta.get("simulation", {}),
            )
        except ValueError as e:
            raise FormatException(f"invalid TMP tensor {name!r}: {e}") from e

    def _to_ecg(self, contents: ContainerContents) -> ECGSequence:
        Y = _finite("Y", contents.require("Y"))
        try:
            return ECGSequence(Y, snr_db=float(contents.metadata.get("snr_db", float("inf"))))
        except ValueError as e:
            raise FormatException(f"invalid ECG tensor: {e}") from e
