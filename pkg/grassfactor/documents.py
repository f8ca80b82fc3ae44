"""JSON documents exchanged by the command-line interface.

Matrices travel as MatrixDocument (row-major, complex entries as
[re, im] pairs); factorizations as FactorizationDocument. Output is
byte-deterministic: fixed key order, floats in their shortest exact
round-trip form, negative zero written as zero.
"""

import json
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, ValidationError, model_validator

from grassfactor import __version__
from grassfactor.decompose import Factorization, product_of
from grassfactor.errors import DocumentError
from grassfactor.grassmann import FieldName, GrassPoint
from grassfactor.symplectic import SpGrassPoint

Entry = float | tuple[float, float]


# ─── Documents ───────────────────────────────────────────────────────────────

class MatrixDocument(BaseModel):
    schema_version: Literal["1"] = "1"
    field: FieldName
    rows: int = Field(ge=0, description="Row count")
    cols: int = Field(ge=0, description="Column count")
    data: list[Entry] = Field(description="Row-major entries; [re, im] pairs when field is complex")

    @model_validator(mode="after")
    def _check_entries(self) -> "MatrixDocument":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"data has {len(self.data)} entries, expected {self.rows}×{self.cols}")
        for x in self.data:
            parts = x if isinstance(x, tuple) else (x,)
            if not all(math.isfinite(p) for p in parts):
                raise ValueError("entries must be finite")
            if (self.field == "complex") != isinstance(x, tuple):
                raise ValueError(f"entry {x!r} does not match field {self.field}")
        return self

    @classmethod
    def from_array(cls, a: np.ndarray, field: FieldName | None = None) -> "MatrixDocument":
        a = np.atleast_2d(np.asarray(a))
        field = field or ("complex" if np.iscomplexobj(a) else "real")
        flat = a.ravel()
        if field == "complex":
            data = [(_clean(z.real), _clean(z.imag)) for z in flat.astype(complex)]
        else:
            data = [_clean(x) for x in np.real(flat)]
        return cls(field=field, rows=a.shape[0], cols=a.shape[1], data=data)

    def to_array(self) -> np.ndarray:
        if self.field == "complex":
            flat = np.array([complex(re, im) for re, im in self.data], dtype=complex)
        else:
            flat = np.array(self.data, dtype=float)
        return flat.reshape(self.rows, self.cols)


class FactorDocument(BaseModel):
    matrix: MatrixDocument
    model: Literal["gr", "grsp"]
    k: int


class FactorizationDocument(BaseModel):
    target: MatrixDocument
    factors: list[FactorDocument]
    residual: float
    group: Literal["so", "so-", "su", "su-", "sp"]
    construction: str = Field(description="Routine that produced the factors")
    sign: int = 1
    tool_version: str = __version__

    def recompute_residual(self) -> float:
        factors = [f.matrix.to_array() for f in self.factors]
        prod = np.eye(self.target.rows, dtype=complex)
        for f in factors:
            prod = prod @ f
        return float(np.linalg.norm(self.sign * prod - self.target.to_array()))


def _clean(x) -> float:
    # -0.0 + 0.0 == +0.0
    return float(x) + 0.0


def _document_group(f: Factorization) -> str:
    if f.group in ("so", "so-", "su", "su-", "sp"):
        return f.group
    det = np.linalg.det(f.target)
    return "su" if abs(det - 1.0) < abs(det + 1.0) else "su-"


def factorization_document(f: Factorization) -> FactorizationDocument:
    field = "complex" if np.iscomplexobj(f.target) else "real"
    factors = [
        FactorDocument(
            matrix=MatrixDocument.from_array(x.m, field),
            model="grsp" if isinstance(x, SpGrassPoint) else "gr",
            k=x.k,
        )
        for x in f.factors
    ]
    doc = FactorizationDocument(
        target=MatrixDocument.from_array(f.target, field),
        factors=factors,
        residual=0.0,
        group=_document_group(f),
        construction=f.group,
        sign=f.sign,
    )
    # Stored residual is recomputed from the rounded document contents.
    doc.residual = _clean(doc.recompute_residual())
    return doc


def grass_point_of(doc: MatrixDocument, k: int) -> GrassPoint:
    return GrassPoint(field=doc.field, n=doc.rows, k=k, m=doc.to_array())


# ─── I/O ─────────────────────────────────────────────────────────────────────

_matrix_list = TypeAdapter(list[MatrixDocument])


def load_matrices(text: str) -> tuple[list[MatrixDocument], bool]:
    """Parse one MatrixDocument or a JSON array of them; returns (docs, is_batch)."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e}") from e
    try:
        if isinstance(payload, list):
            return _matrix_list.validate_python(payload), True
        return [MatrixDocument.model_validate(payload)], False
    except ValidationError as e:
        raise DocumentError(f"invalid matrix document: {e.error_count()} error(s)", errors=e.errors()) from e


def load_factorization(text: str) -> FactorizationDocument:
    try:
        return FactorizationDocument.model_validate_json(text)
    except ValidationError as e:
        raise DocumentError(f"invalid factorization document: {e.error_count()} error(s)") from e


def dump(doc: BaseModel | list) -> str:
    if isinstance(doc, list):
        return "[" + ",\n".join(d.model_dump_json(indent=2) for d in doc) + "]"
    return doc.model_dump_json(indent=2)
