import json

import jsonschema
import numpy as np
import pytest
from numpy.testing import assert_allclose

import qdeconv as q
from qdeconv.scenarios import (
    bitflip_correlated,
    bitflip_uncorrelated,
    bitflip_with_memory,
    qutrit_extreme_channel,
    run_scenario,
)
from qdeconv.serialization import (
    ChannelSpec,
    channel_spec_to_document,
    emit_channel_spec,
    emit_family,
    emit_hermitian_matrix,
    family_to_document,
    kraus_spec,
    load_schema,
    matrix_from_json,
    matrix_to_json,
    parse_channel_spec,
    parse_family,
    parse_hermitian_matrix,
    report_to_document,
    unitary_spec,
)

from conftest import SIGMA


def test_matrix_json_roundtrip_is_bit_exact(rng):
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(matrix_from_json(matrix_to_json(M)), M)


def test_parse_identity_channel_spec():
    spec = parse_channel_spec(emit_channel_spec(unitary_spec("identity", np.eye(2))))
    assert spec.kind == "unitary" and spec.dim == 2
    ch = spec.to_kraus_channel()
    assert len(ch.kraus) == 1
    assert_allclose(ch.kraus[0], np.eye(2))


def test_parse_extreme_qutrit_spec():
    ch = qutrit_extreme_channel(1.0)
    spec = parse_channel_spec(emit_channel_spec(kraus_spec("extreme qutrit", ch.kraus)))
    resolved = spec.to_kraus_channel()
    assert len(resolved.kraus) == 3
    assert resolved.trace_preservation_residual() <= 1e-12


def test_parse_rejects_non_cptp_with_residual():
    bad = ChannelSpec(kind="kraus", dim=2, name="bad", kraus=(0.9 * np.eye(2),))
    with pytest.raises(q.CptpViolationError) as err:
        parse_channel_spec(emit_channel_spec(bad))
    assert "residual" in str(err.value)


def test_parse_rejects_malformed_json():
    with pytest.raises(q.SpecParseError):
        parse_channel_spec("{not json")


def test_parse_rejects_schema_violation():
    with pytest.raises(q.SpecParseError):
        parse_channel_spec(json.dumps({"schema_version": 1, "dim": 2, "name": "x"}))
    with pytest.raises(q.SpecParseError):
        parse_channel_spec(
            json.dumps({"schema_version": 1, "kind": "kraus", "dim": 2, "name": "x"})
        )


def test_random_unitary_spec_probabilities():
    U1 = np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)
    doc = {
        "schema_version": 1,
        "kind": "random_unitary",
        "dim": 2,
        "name": "two-unitary",
        "unitaries": [matrix_to_json(U1), matrix_to_json(SIGMA[1])],
        "probabilities": [0.7, 0.3],
    }
    spec = parse_channel_spec(json.dumps(doc))
    ch = spec.to_kraus_channel()
    assert_allclose(ch.kraus[0], np.sqrt(0.7) * U1)
    # omitted probabilities default to uniform
    del doc["probabilities"]
    uniform = parse_channel_spec(json.dumps(doc)).to_kraus_channel()
    assert_allclose(uniform.kraus[0], np.sqrt(0.5) * U1)


def test_random_unitary_spec_rejects_bad_probabilities():
    doc = {
        "schema_version": 1,
        "kind": "random_unitary",
        "dim": 2,
        "name": "bad",
        "unitaries": [matrix_to_json(np.eye(2)), matrix_to_json(SIGMA[1])],
        "probabilities": [0.7, 0.7],
    }
    with pytest.raises(q.SpecParseError):
        parse_channel_spec(json.dumps(doc))


def test_convex_combination_realizes_memory_channel():
    p, mu = 0.3, 0.6
    doc = {
        "schema_version": 1,
        "kind": "convex_combination",
        "dim": 4,
        "name": "bit flip with memory",
        "weights": [1 - mu, mu],
        "parts": [
            channel_spec_to_document(
                kraus_spec("uncorrelated", bitflip_uncorrelated(p).kraus)
            ),
            channel_spec_to_document(kraus_spec("correlated", bitflip_correlated(p).kraus)),
        ],
    }
    spec = parse_channel_spec(json.dumps(doc))
    combined = q.transfer_from_kraus(spec.to_kraus_channel())
    direct = q.transfer_from_kraus(bitflip_with_memory(p, mu))
    assert np.linalg.norm(combined.gamma - direct.gamma) < 1e-12


def test_convex_combination_rejects_dim_mismatch():
    doc = {
        "schema_version": 1,
        "kind": "convex_combination",
        "dim": 2,
        "name": "broken",
        "weights": [1.0],
        "parts": [channel_spec_to_document(kraus_spec("cc", bitflip_correlated(0.2).kraus))],
    }
    with pytest.raises(q.SpecParseError):
        parse_channel_spec(json.dumps(doc))


def test_channel_spec_roundtrip_semantic_identity():
    ch = qutrit_extreme_channel(0.4)
    spec = kraus_spec("roundtrip", ch.kraus)
    again = parse_channel_spec(emit_channel_spec(spec))
    assert again.kind == spec.kind and again.dim == spec.dim and again.name == spec.name
    for A, B in zip(spec.kraus, again.kraus):
        assert np.max(np.abs(A - B)) <= 1e-15


def test_family_roundtrip(rng):
    gp = q.GuessPair.from_transfers(
        q.transfer_from_kraus(qutrit_extreme_channel(np.pi / 2)),
        q.transfer_from_kraus(qutrit_extreme_channel(0.0)),
    )
    fam = q.correctable_family(gp, self_check=False)
    again = parse_family(emit_family(fam))
    assert again.n_params == fam.n_params
    for A, B in zip(fam.basis, again.basis):
        assert np.max(np.abs(A - B)) <= 1e-15


def test_family_document_rejects_wrong_count():
    doc = {"schema_version": 1, "dim": 2, "n_params": 2, "basis": [matrix_to_json(np.eye(2) / np.sqrt(2))]}
    with pytest.raises(q.SpecParseError):
        parse_family(json.dumps(doc))


def test_hermitian_matrix_document_roundtrip(rng):
    from qdeconv.channels import random_hermitian

    A = random_hermitian(3, rng)
    back = parse_hermitian_matrix(emit_hermitian_matrix(A))
    assert np.array_equal(back, A)
    with pytest.raises(q.SpecParseError):
        parse_hermitian_matrix(json.dumps({"dim": 2}))


# ---------------------------------------------------------------------------
# schema validation
# ---------------------------------------------------------------------------

def test_all_schemas_load():
    for name in ("channel_spec", "observable_family", "deconv_report", "scenario_result"):
        schema = load_schema(name)
        jsonschema.Draft202012Validator.check_schema(schema)


def test_documents_validate_against_schemas(rng):
    ch = qutrit_extreme_channel(1.0)
    jsonschema.validate(
        channel_spec_to_document(kraus_spec("x", ch.kraus)), load_schema("channel_spec")
    )

    gp = q.GuessPair.from_transfers(
        q.transfer_from_kraus(ch), q.transfer_from_kraus(qutrit_extreme_channel(0.0))
    )
    fam = q.correctable_family(gp, self_check=False)
    jsonschema.validate(family_to_document(fam), load_schema("observable_family"))

    rho = q.random_density_matrix(3, rng)
    report = q.evaluate(gp, fam.basis[0], rho)
    jsonschema.validate(report_to_document(report), load_schema("deconv_report"))

    result = run_scenario("ru-two-qubit")
    jsonschema.validate(result.to_document(), load_schema("scenario_result"))
