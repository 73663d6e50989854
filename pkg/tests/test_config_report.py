import math

import pytest
from hypothesis import given, strategies as st

from quasimod.config import DEFAULT_TOLERANCES, SUITE_NAMES, ConfigError, build_config, load_config
from quasimod.report import Record, Report, digest_of, read_report


def test_defaults_and_all():
    cfg = build_config({}, suites=["all"])
    assert cfg.suites == list(SUITE_NAMES)
    assert cfg.seed == 1
    assert cfg.tolerances == DEFAULT_TOLERANCES
    assert build_config({"suites": ["wigner", "wigner"]}).suites == ["wigner"]


def test_cli_values_win(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('seed = 5\nsuites = ["wigner"]\n[factorization]\ninstances = 3\n')
    cfg = load_config(p, suites=["convolution"], seed=9)
    assert cfg.suites == ["convolution"] and cfg.seed == 9
    assert cfg.suite_options("factorization") == {"instances": 3}


@pytest.mark.parametrize("data, field", [
    ({"suites": "wigner"}, "suites"),
    ({"suites": ["nope"]}, "suites"),
    ({"seed": "x"}, "seed"),
    ({"tolerances": {"wigner/rank-one": 1e-3}}, "tolerances.wigner/rank-one"),
    ({"tolerances": {"wigner/rank-one": 1e-20}}, "tolerances.wigner/rank-one"),
    ({"tolerances": {"bogus": 1e-3}}, "tolerances.bogus"),
    ({"factorization": {"instances": 0}}, "factorization.instances"),
    ({"factorization": {"colour": 1}}, "factorization.colour"),
    ({"op-schatten": {"sizes": 32}}, "op-schatten.sizes"),
    ({"mystery": {}}, "mystery"),
])
def test_malformed_config_names_field(data, field):
    with pytest.raises(ConfigError) as exc:
        build_config(data)
    assert exc.value.field == field


def test_invalid_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("seed = = 1\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_tightening_is_allowed():
    cfg = build_config({"tolerances": {"factorization/product": 1e-14}})
    assert cfg.tol("factorization/product") == 1e-14


def test_record_relations():
    assert Record("s", "c", "le", 1.0, 1.0, 0.0, {}).passed
    assert not Record("s", "c", "le", 1.1, 1.0, 0.05, {}).passed
    eq = Record("s", "c", "eq", 1.0 + 1e-12, 1.0, 1e-10, {})
    assert eq.passed and eq.ratio == pytest.approx(1e-12, rel=1e-3)
    assert not Record("s", "c", "err", 1e-5, 1.0, 1e-8, {}).passed
    assert Record("s", "c", "le", 0.0, 0.0, 0.0, {}).ratio == 0.0
    assert not Record("s", "c", "le", 1.0, 0.0, 0.0, {}).passed
    assert Record("s", "c", "le", 5.0, 1.0, 0.0, {}, normative=False).passed is None
    with pytest.raises(ValueError):
        Record("s", "c", "ge", 1.0, 1.0, 0.0, {})


@given(st.dictionaries(st.text(max_size=5), st.integers() | st.text(max_size=5), max_size=4))
def test_digest_ignores_key_order(params):
    rev = dict(reversed(list(params.items())))
    assert digest_of(params, "x") == digest_of(rev, "x")
    assert digest_of(params, "x") != digest_of(params, "y")


def _report():
    recs = [Record("s", f"s/c{i % 3}", "le", 1.0 / (i + 1), 1.0, 1e-10, {"index": i, "p": "1/2"}) for i in range(7)]
    recs.append(Record("s", "s/info", "le", 2.0, 1.0, 0.0, {"index": 99}, normative=False))
    return Report(recs, 3, ["s"])


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_report_round_trip(tmp_path, fmt):
    rep = _report()
    paths = rep.write(tmp_path, fmt)
    assert paths[-1].name == "summary.json"
    back = read_report(paths[0])
    assert back.seed == 3 and back.suites == ["s"]
    assert [r.digest for r in back.sorted()] == [r.digest for r in rep.sorted()]
    assert [r.lhs for r in back.sorted()] == [r.lhs for r in rep.sorted()]
    assert back.passed


def test_report_is_order_independent():
    rep = _report()
    shuffled = Report(list(reversed(rep.records)), 3, ["s"])
    assert shuffled.to_csv() == rep.to_csv()
    agg = rep.aggregate()
    assert agg["s/c0"]["records"] == 3 and agg["s/info"]["normative"] is False
    assert math.isclose(agg["s/c0"]["worst_ratio"], 1.0)


def test_empty_report_passes():
    assert Report([], 1, []).passed


def test_read_report_rejects_other_schema(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("# schema=other/1 seed=1 suites=\n")
    with pytest.raises(ValueError):
        read_report(p)
