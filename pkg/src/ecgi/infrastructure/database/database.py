"""Database configuration and session management for experiment results.

Experiment runs and their per-case metrics records are stored through
SQLAlchemy so results of many runs can be queried side by side. The session
context manager commits on success and rolls back on error.
"""

from contextlib import contextmanager
from typing import Generator

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from .models import Base


class Database:
    """Engine and session factory for the results store.

    Attributes:
        engine: SQLAlchemy engine bound to the configured URL
        SessionLocal: Session factory
    """

    def __init__(self, database_url: str):
        """Initialize the connection.

        Args:
            database_url: SQLAlchemy URL, e.g. ``sqlite:///ecgi.db`` or
                ``sqlite:///:memory:`` for tests.
        """
        connect_args = {"check_same_thread": False} if database_url.startswith("sqlite") else {}
        self.engine = create_engine(database_url, connect_args=connect_args)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)

    def create_tables(self):
        """Create the result tables if they are missing; safe to call repeatedly."""
        Base.metadata.create_all(bind=self.engine)

    def drop_tables(self):
        """Drop the result tables and every stored record."""
        Base.metadata.drop_all(bind=self.engine)

    @contextmanager
    def get_session(self) -> Generator[Session, None, None]:
        """Yield a session that commits on success and rolls back on error."""
        session = self.SessionLocal()
        try:
            yield session
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()
