"""Tomography records and datasets: the unit of ingestion and protocol solving."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jsonio


class MissingRecord(Exception):
    """A protocol step requires a record label that the dataset does not contain."""


@dataclass(frozen=True)
class TomographyRecord:
    """One (prepared input, measured output, outcome probability) triple."""

    label: str
    input: np.ndarray
    output: np.ndarray
    gamma: float

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "gamma": float(self.gamma),
            "input": jsonio.matrix_to_json(self.input),
            "output": jsonio.matrix_to_json(self.output),
        }

    @staticmethod
    def from_json(obj: dict) -> "TomographyRecord":
        return TomographyRecord(
            label=str(obj["label"]),
            input=jsonio.matrix_from_json(obj["input"]),
            output=jsonio.matrix_from_json(obj["output"]),
            gamma=float(obj["gamma"]),
        )


@dataclass(frozen=True)
class Dataset:
    """An ordered set of uniquely labeled tomography records plus free-form metadata."""

    records: tuple[TomographyRecord, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        labels = [r.label for r in self.records]
        if len(set(labels)) != len(labels):
            raise ValueError("dataset labels must be unique")

    def labels(self) -> list[str]:
        return [r.label for r in self.records]

    def get(self, label: str) -> TomographyRecord:
        for rec in self.records:
            if rec.label == label:
                return rec
        raise MissingRecord(f"dataset has no record labeled {label!r}")

    def subset(self, labels) -> list[TomographyRecord]:
        """Records for `labels`, in the requested order; raises MissingRecord."""
        return [self.get(label) for label in labels]

    def to_json(self) -> dict:
        return {
            "records": [r.to_json() for r in self.records],
            "metadata": {k: str(v) for k, v in self.metadata.items()},
        }

    @staticmethod
    def from_json(obj: dict) -> "Dataset":
        records = tuple(TomographyRecord.from_json(r) for r in obj["records"])
        metadata = {str(k): str(v) for k, v in obj.get("metadata", {}).items()}
        return Dataset(records=records, metadata=metadata)


def record_map(records) -> dict[str, TomographyRecord]:
    """Index records by label, raising on duplicates."""
    out: dict[str, TomographyRecord] = {}
    for rec in records:
        if rec.label in out:
            raise ValueError(f"duplicate record label {rec.label!r}")
        out[rec.label] = rec
    return out
