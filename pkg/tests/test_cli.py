"""Command-line tests: every verb, error exits, report determinism, the
show round trip, and the no-floats lint."""

from __future__ import annotations

import hashlib
import json

import pytest

from ckstab.cli import main, render_table, resolve_model_path
from ckstab.serialize import assert_float_free, canonical_json, load_model
from ckstab.serialize import ParseError, ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report_of(out: str) -> dict:
    return json.loads(out)["report"]


def test_futaki(capsys):
    code, out, _ = run(capsys, "futaki", "p1_halves")
    assert code == 0
    rep = report_of(out)
    assert rep["total"] == ["0"] and rep["vanishes"] is True


def test_delta_with_witness(capsys):
    code, out, _ = run(capsys, "delta", "bl1p2_halves")
    assert code == 0
    rep = report_of(out)
    assert rep["delta"]["value"] == "6/7"
    assert rep["witness"] == [1, 1]
    assert any("cocharacter" in a for a in rep["assumptions"])


def test_jnorm(capsys):
    code, out, _ = run(capsys, "jnorm", "p1_halves", "--xi", "3")
    assert code == 0
    assert report_of(out)["jnorm"]["value"] == "3"


def test_reduced_jnorm(capsys):
    code, out, _ = run(capsys, "reduced-jnorm", "p1_halves", "--xi", "1",
                       "--subtorus", "trivial")
    assert code == 0
    assert report_of(out)["reduced_jnorm"]["value"] == "1"


def test_reduced_delta_variants(capsys):
    code, out, _ = run(capsys, "reduced-delta", "bl1p2_halves",
                       "--subtorus", "full")
    assert code == 0 and report_of(out)["reduced_delta"]["value"] is None
    code, out, _ = run(capsys, "reduced-delta", "bl1p2_halves",
                       "--subtorus", "trivial")
    assert code == 0 and report_of(out)["reduced_delta"]["value"] == "6/7"
    code, out, _ = run(capsys, "reduced-delta", "p1xp1_symmetric",
                       "--subtorus", "1,0")
    assert code == 0 and report_of(out)["reduced_delta"]["value"] == "1"


def test_ding(capsys):
    code, out, _ = run(capsys, "ding", "bl1p2_halves", "--eta", "1,1")
    assert code == 0
    assert report_of(out)["ding"]["value"] == "-1/6"
    code, out, _ = run(capsys, "ding", "p1_halves", "--eta", "1",
                       "--slope", "2")
    assert code == 0
    assert report_of(out)["ding"]["value"] == "-1/2"


def test_lct(capsys):
    code, out, _ = run(capsys, "lct", "p1_halves", "--eta", "1", "--level", "2")
    assert code == 0
    rep = report_of(out)
    assert rep["lct"]["value"] == "1/2" and rep["witness"] == [1]


def test_destabilize(capsys):
    code, out, _ = run(capsys, "destabilize", "bl1p2_halves")
    assert code == 0
    rep = report_of(out)
    assert rep["destabilizer"]["eta"] == [1, 1]
    assert rep["destabilizer"]["ding"]["value"] == "-1/6"
    code, out, _ = run(capsys, "destabilize", "p2_halves")
    assert code == 0 and report_of(out)["destabilizer"] is None


def test_verify_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "p2_steps", "--samples", "15",
                         "--seed", "7")
    code2, out2, _ = run(capsys, "verify", "p2_steps", "--samples", "15",
                         "--seed", "7")
    assert code1 == code2 == 0
    assert out1 == out2
    rep = report_of(out1)
    assert rep["suite"]["failed"] == 0 and rep["suite"]["passed"] > 0


def test_show_roundtrip(capsys, tmp_path):
    out_path = str(tmp_path / "report.json")
    code, table_direct, _ = run(capsys, "delta", "bl1p2_halves",
                                "--format", "table", "--out", out_path)
    assert code == 0
    code, shown, _ = run(capsys, "show", out_path)
    assert code == 0
    assert shown == table_direct


def test_input_not_mutated(capsys, tmp_path):
    src = resolve_model_path("bl1p2_halves.json")
    dst = tmp_path / "model.json"
    dst.write_bytes(open(src, "rb").read())
    before = hashlib.sha256(dst.read_bytes()).hexdigest()
    code, out, _ = run(capsys, "delta", str(dst))
    assert code == 0
    assert hashlib.sha256(dst.read_bytes()).hexdigest() == before
    assert json.loads(out)["input_sha256"] == before


def test_no_float_literals_in_reports(capsys):
    code, out, _ = run(capsys, "verify", "p1_halves", "--samples", "10",
                       "--seed", "1")
    assert code == 0
    data = json.loads(out)
    assert_float_free(data)
    # and the canonical writer rejects floats outright
    with pytest.raises(ValidationError):
        canonical_json({"x": 0.5})


def test_parse_error_with_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rank": 1, "rays": [[1], [-1]], "decompo')
    code, _, err = run(capsys, "delta", str(bad))
    assert code == 1
    assert "byte" in err


def test_validation_error_exit(capsys, tmp_path):
    bad = tmp_path / "mismatch.json"
    bad.write_text(json.dumps({
        "rank": 1, "rays": [[1], [-1]],
        "decomposition": [{"vertices": [["0"], ["1"]]},
                          {"vertices": [["0"], ["1"]]}],
    }))
    code, _, err = run(capsys, "delta", str(bad))
    assert code == 1
    assert "Minkowski" in err


def test_missing_file_exit(capsys):
    code, _, err = run(capsys, "delta", "no_such_model_anywhere")
    assert code == 1 and "not found" in err


def test_unwritable_out(capsys, tmp_path):
    target = tmp_path / "not_a_dir" / "report.json"
    code, _, err = run(capsys, "delta", "p1_halves", "--out", str(target))
    assert code == 1 and "cannot write" in err


def test_fixture_env_override(capsys, tmp_path, monkeypatch):
    src = resolve_model_path("p1_halves.json")
    alt = tmp_path / "alt.json"
    alt.write_bytes(open(src, "rb").read())
    monkeypatch.setenv("CKS_FIXTURES", str(tmp_path))
    code, out, _ = run(capsys, "futaki", "alt.json")
    assert code == 0 and report_of(out)["vanishes"] is True


def test_render_table_scalars():
    text = render_table({"a": {"b": None, "c": True}, "d": ["1/2", "x"]})
    assert "+inf" in text and "true" in text and "[1/2, x]" in text


def test_model_roundtrip_through_json(tmp_path, bl1p2):
    from ckstab.serialize import model_from_json, model_to_json
    data = model_to_json(bl1p2)
    again = model_from_json(data)
    assert again.anticanonical == bl1p2.anticanonical
    assert again.summands == bl1p2.summands
    assert again.barycenters == bl1p2.barycenters


def test_rational_parser_reduces():
    from ckstab.serialize import parse_rational, format_rational
    from fractions import Fraction as F
    assert parse_rational("2/4") == F(1, 2)
    assert format_rational(parse_rational("2/4")) == "1/2"
    assert parse_rational("-6/3") == -2
    with pytest.raises(ParseError):
        parse_rational(0.5)


def test_filtration_json_roundtrip(p1_skew):
    from fractions import Fraction as F
    from ckstab.filtration import graded_basis, shift, valuation_filtration
    from ckstab.serialize import filtration_from_json, filtration_to_json
    basis = graded_basis(p1_skew, 0, m_max=3)
    f = shift(valuation_filtration(basis, (F(1, 2),)), F(-1, 3))
    data = filtration_to_json(f)
    assert data["kind"] == "toric_valuation"
    again = filtration_from_json(data, basis)
    assert again.table_equal(f)
    # opaque tables survive too
    table = {m: {a: F(1, 2) for a in basis.characters(m)}
             for m in basis.degrees}
    from ckstab.filtration import construct
    g = construct(basis, table)
    data = filtration_to_json(g)
    assert data["kind"] == "table"
    assert filtration_from_json(data, basis).table_equal(g)


def test_family_json_roundtrip(bl1p2):
    from ckstab.filtration import valuation_family
    from ckstab.serialize import family_from_json, family_to_json
    from ckstab.stability import coupled_ding
    fam = valuation_family(bl1p2, (1, 1), m_max=4)
    data = family_to_json(fam)
    again = family_from_json(data)
    assert all(a.table_equal(b) for a, b in zip(again.members, fam.members))
    assert coupled_ding(again).value == coupled_ding(fam).value
    # model by name through a resolver
    named = {"model": "bl1p2_halves", "m_max": 4,
             "filtrations": data["filtrations"]}
    resolved = family_from_json(
        named, model_resolver=lambda n: load_model(
            resolve_model_path(n + ".json")))
    assert coupled_ding(resolved).value == coupled_ding(fam).value


def test_polytope_halfspace_fragment():
    from fractions import Fraction as F
    from ckstab.serialize import polytope_from_json
    p = polytope_from_json({"halfspaces": [
        {"normal": [1], "offset": "-1"}, {"normal": [-1], "offset": "-1"}]})
    assert p.vertices == ((F(-1),), (F(1),))
    q = polytope_from_json({"vertices": [["2/4"], ["1"]]})
    assert q.vertices == ((F(1, 2),), (F(1),))   # non-reduced input reduced
