import json

import numpy as np
import pytest

from grassfactor import __version__
from grassfactor.decompose import decompose_so, decompose_su_signature
from grassfactor.documents import (
    MatrixDocument,
    dump,
    factorization_document,
    grass_point_of,
    load_factorization,
    load_matrices,
)
from grassfactor.errors import DocumentError
from grassfactor.grassmann import gr_validate


def test_matrix_document_layout():
    doc = MatrixDocument.from_array(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert doc.field == "real"
    assert (doc.rows, doc.cols) == (2, 2)
    assert doc.data == [1.0, 2.0, 3.0, 4.0]

    doc = MatrixDocument.from_array(np.array([[1j]]))
    assert doc.field == "complex"
    assert doc.data == [(0.0, 1.0)]


def test_negative_zero_is_written_as_zero():
    doc = MatrixDocument.from_array(np.array([[-0.0, 1.0]]))
    assert "-0.0" not in dump(doc)
    assert not np.signbit(doc.data[0])


def test_load_single_and_batch():
    text = json.dumps({"field": "complex", "rows": 1, "cols": 1, "data": [[0.0, 1.0]]})
    docs, batch = load_matrices(text)
    assert not batch
    np.testing.assert_array_equal(docs[0].to_array(), [[1j]])

    docs, batch = load_matrices("[" + text + "," + text + "]")
    assert batch and len(docs) == 2


@pytest.mark.parametrize(
    "payload",
    [
        {"field": "real", "rows": 2, "cols": 2, "data": [1.0, 0.0, 0.0]},
        {"field": "real", "rows": 1, "cols": 1, "data": [[1.0, 0.0]]},
        {"field": "complex", "rows": 1, "cols": 1, "data": [1.0]},
        {"field": "quaternion", "rows": 1, "cols": 1, "data": [1.0]},
        {"schema_version": "2", "field": "real", "rows": 1, "cols": 1, "data": [1.0]},
    ],
)
def test_load_rejects_malformed_documents(payload):
    with pytest.raises(DocumentError) as excinfo:
        load_matrices(json.dumps(payload))
    assert excinfo.value.exit_code == 1


def test_load_rejects_non_finite_and_bad_json():
    with pytest.raises(DocumentError):
        load_matrices('{"field": "real", "rows": 1, "cols": 1, "data": [NaN]}')
    with pytest.raises(DocumentError):
        load_matrices("{")


def test_factorization_document_fields():
    doc = factorization_document(decompose_so(np.eye(2)))
    assert doc.group == "so"
    assert doc.construction == "so"
    assert doc.residual == 0.0
    assert doc.tool_version == __version__
    assert [f.k for f in doc.factors] == [1, 1]
    assert {f.model for f in doc.factors} == {"gr"}

    back = load_factorization(dump(doc))
    assert back.recompute_residual() == 0.0
    x = grass_point_of(back.factors[0].matrix, back.factors[0].k)
    assert gr_validate(x.m, x.k).accepted


def test_signature_factorization_reports_coset():
    f = decompose_su_signature(np.diag([1j, 1j, 1j, -1j]), (2, 2, 2, 1))
    doc = factorization_document(f)
    assert doc.group == "su-"
    assert doc.construction == "su-sig"
    assert doc.residual <= 1e-9 * 4


def test_load_factorization_rejects_unknown_group():
    doc = json.loads(dump(factorization_document(decompose_so(np.eye(2)))))
    doc["group"] = "gl"
    with pytest.raises(DocumentError):
        load_factorization(json.dumps(doc))
