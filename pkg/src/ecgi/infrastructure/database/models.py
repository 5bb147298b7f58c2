"""SQLAlchemy models for experiment runs and their metrics records.

A run groups every MetricsRecord produced by one invocation of the
experiment harness. Record rows keep their emission order so a run can be
re-read in the same order as its results table.
"""

import uuid
from datetime import datetime, timezone

from sqlalchemy import (
    Column,
    DateTime,
    Enum as SQLEnum,
    Float,
    ForeignKey,
    Integer,
    String,
    Text,
)
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.types import CHAR, TypeDecorator

from ...domain.value_objects import MethodTag, SettingTag

Base = declarative_base()


class GUID(TypeDecorator):
    """UUID stored as CHAR(36) on backends without a native UUID type.

    Values are accepted as UUID objects or strings and always read back as
    UUID objects.
    """

    impl = CHAR(36)
    cache_ok = True

    def process_bind_param(self, value, dialect):
        if value is not None:
            return str(value if isinstance(value, uuid.UUID) else uuid.UUID(str(value)))
        return value

    def process_result_value(self, value, dialect):
        if value is not None:
            return uuid.UUID(value)
        return value


class ExperimentRunModel(Base):
    """One experiment run.

    Attributes:
        id: Run identifier (UUID)
        setting: Held-out setting tag value
        methods: Comma-separated method tags in run order
        config: JSON text of the run configuration
        created_at: Registration timestamp

    Relationships:
        records: Per-case metrics records of the run
    """

    __tablename__ = "experiment_runs"

    id = Column(GUID, primary_key=True, default=uuid.uuid4)
    setting = Column(String(32), nullable=False)
    methods = Column(String(255), nullable=False)
    config = Column(Text, nullable=False, default="{}")
    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))

    records = relationship(
        "MetricsRecordModel",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="MetricsRecordModel.position",
    )


class MetricsRecordModel(Base):
    """Metrics of one method on one test case.

    Attributes:
        id: Row identifier (UUID)
        run_id: Owning run
        position: Emission order within the run
        case_id: Test case identifier
        method: Method tag
        setting: Setting tag
        nrmse: Normalized RMSE, null when the case failed
        dice: Dice coefficient, null when undefined or failed
        origin_error_mm: Origin localization error, null when undefined or failed
        failure: Failure message, null on success
    """

    __tablename__ = "metrics_records"

    id = Column(GUID, primary_key=True, default=uuid.uuid4)
    run_id = Column(GUID, ForeignKey("experiment_runs.id"), nullable=False)
    position = Column(Integer, nullable=False)
    case_id = Column(String(64), nullable=False)
    method = Column(SQLEnum(MethodTag), nullable=False)
    setting = Column(SQLEnum(SettingTag), nullable=False)
    nrmse = Column(Float, nullable=True)
    dice = Column(Float, nullable=True)
    origin_error_mm = Column(Float, nullable=True)
    failure = Column(Text, nullable=True)

    run = relationship("ExperimentRunModel", back_populates="records")
