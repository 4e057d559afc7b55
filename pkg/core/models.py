"""
Core abstract models for the pickling line project.

Provides base classes that the run ledger models inherit from for consistent
timestamp tracking and digest storage.
"""

import hashlib
from pathlib import Path

from django.db import models


def file_digest(path):
    """SHA-256 hex digest of a file (or of every file of a directory, in name order)."""
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for item in files:
        if path.is_dir():
            digest.update(str(item.relative_to(path)).encode())
        digest.update(item.read_bytes())
    return digest.hexdigest()


class TimeStampedModel(models.Model):
    """
    Abstract base model that provides self-updating created_at and updated_at fields.

    All ledger records inherit from this class.
    """

    created_at = models.DateTimeField(
        auto_now_add=True,
        help_text="Date and time when the record was created",
    )
    updated_at = models.DateTimeField(
        auto_now=True,
        help_text="Date and time when the record was last updated",
    )

    class Meta:
        abstract = True
        ordering = ["-created_at"]


class DigestedArtifactModel(TimeStampedModel):
    """
    Abstract base model for records that point at a file on disk.

    The SHA-256 digest of the file is stored so that re-runs can be compared
    byte for byte.
    """

    path = models.CharField(
        max_length=500,
        help_text="Location of the artifact on disk",
    )
    digest = models.CharField(
        max_length=64,
        blank=True,
        help_text="SHA-256 hex digest of the artifact",
    )
    seed = models.BigIntegerField(
        default=0,
        help_text="Master seed of the run that produced the artifact",
    )
    profile = models.CharField(
        max_length=20,
        default="desk",
    )

    class Meta:
        abstract = True
        ordering = ["-created_at"]

    @classmethod
    def record(cls, path, run_config, **fields):
        """Create a ledger row for an artifact written by a run."""
        return cls.objects.create(
            path=str(path),
            digest=file_digest(path),
            seed=run_config.seed,
            profile=run_config.profile,
            **fields,
        )
