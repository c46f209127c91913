import numpy as np
import pytest

from sicfree import harness
from sicfree.errors import ConfigError, DegenerateChannelError, SweepError
from sicfree.harness import SweepConfig, SweepResult, SweepRow, emit_csv, parse_config, read_csv, run_sweep


def test_parse_config():
    cfg = parse_config(
        """
        # comment
        k = 5
        l = 4
        t = 1
        snr_db = 0, 10, 20   # inline comment
        draws = 3
        strategy = sparse, random
        ordering = fixed, successive_projection
        baselines = sic_zf
        """.splitlines()
    )
    assert cfg.snr_db == [0.0, 10.0, 20.0]
    assert cfg.m_over_n == pytest.approx(0.2)
    assert cfg.schemes() == [
        "proposed:sparse:zf:fixed",
        "proposed:sparse:zf:successive_projection",
        "proposed:random:zf:fixed",
        "sic_zf",
    ]


@pytest.mark.parametrize(
    "text",
    [
        "k = 3\nl = 4",
        "draws = 0",
        "strategy = dense",
        "bogus = 1",
        "k = five",
        "k = 5\nk = 6",
        "snr_db = ",
        "m_over_n = 0.5",
        "no equals sign",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text.splitlines())


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        harness.load_config(tmp_path / "nope.cfg")


def _small(**kw):
    base = dict(snr_db=[0.0, 20.0], draws=6, strategy=["sparse", "random"], ordering=["fixed"], baselines=["sic_zf", "no_cc"])
    base.update(kw)
    return SweepConfig(**base)


def test_rows_and_reproducibility(tmp_path):
    cfg = _small()
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert len(a.rows) == len(cfg.snr_db) * len(cfg.schemes())
    keys = [(r.snr_db, r.scheme) for r in a.rows]
    assert keys == sorted(keys)
    emit_csv(a, tmp_path / "a.csv")
    emit_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    for r in a.rows:
        x = a.samples[(r.snr_db, r.scheme)]
        assert r.mean_rate == pytest.approx(np.mean(x))
        assert r.std_err == pytest.approx(np.std(x, ddof=1) / np.sqrt(x.size))
        assert r.draws == 6 and r.failed == 0


def test_seed_changes_result():
    a = run_sweep(_small(master_seed=1, draws=3))
    b = run_sweep(_small(master_seed=2, draws=3))
    assert a.rows[0].mean_rate != b.rows[0].mean_rate


def test_common_random_numbers():
    # adding schemes must not change the draws seen by the others
    a = run_sweep(_small(strategy=["sparse"], baselines=[]))
    b = run_sweep(_small())
    for key, x in a.samples.items():
        assert np.array_equal(x, b.samples[key])


def test_monotone_in_snr():
    cfg = _small(snr_db=[0, 10, 20, 30, 40, 50], draws=4, strategy=["sparse", "equal_distance", "random"])
    res = run_sweep(cfg)
    for scheme in cfg.schemes():
        means = [res.row(s, scheme).mean_rate for s in sorted(cfg.snr_db)]
        assert np.all(np.diff(means) >= 0), scheme


def test_sampled_serving_sets():
    cfg = SweepConfig(k=7, l=3, t=1, snr_db=[10.0], draws=2, serving_set_samples=3, baselines=["sic_zf", "no_cc"])
    sets = harness._serving_sets(cfg, 0)
    assert len(sets) == 3 and all(len(s) == 4 and list(s) == sorted(s) for s in sets)
    assert sets == harness._serving_sets(cfg, 0)
    res = run_sweep(cfg)
    assert all(np.isfinite(r.mean_rate) and r.mean_rate > 0 for r in res.rows)


def test_failed_draws(monkeypatch):
    real = harness._run_draw

    def flaky(cfg, draw, frames, trace_cb=None):
        if draw == 3:
            raise DegenerateChannelError("forced")
        return real(cfg, draw, frames, trace_cb)

    monkeypatch.setattr(harness, "_run_draw", flaky)
    res = run_sweep(_small(draws=40, snr_db=[10.0]))
    assert all(r.failed == 1 and r.draws == 39 for r in res.rows)
    assert res.failures[0][0] == 3
    with pytest.raises(SweepError):
        run_sweep(_small(draws=10, snr_db=[10.0]))


def test_sca_traces(tmp_path):
    cfg = _small(draws=1, snr_db=[10.0], strategy=["sparse"], beamformer=["zf", "sca"], baselines=[], sca_max_iters=3)
    res = run_sweep(cfg, trace_dir=tmp_path)
    files = list(tmp_path.glob("trace_*.csv"))
    assert len(files) == 1
    assert files[0].read_text().startswith("iter,r,feasible\n")
    assert res.row(10.0, "proposed:sparse:sca:fixed").mean_rate >= res.row(10.0, "proposed:sparse:zf:fixed").mean_rate - 1e-4


def test_emit_empty_and_round_trip(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv(SweepResult([]), p)
    assert p.read_text() == "snr_db,scheme,mean_rate,std_err,draws,failed,seed\n"
    rows = [SweepRow(20.0, "b", 1.23456789, 0.0123456789, 200, 0, 7), SweepRow(0.0, "a", 3.0, 0.1, 200, 1, 7)]
    emit_csv(SweepResult(rows), p)
    lines = p.read_text().splitlines()
    assert lines[1] == "0,a,3,0.1,200,1,7"
    assert lines[2] == "20,b,1.23457,0.0123457,200,0,7"
    back = read_csv(p)
    for r in back.rows:
        orig = next(o for o in rows if o.scheme == r.scheme)
        assert r.mean_rate == pytest.approx(orig.mean_rate, rel=1e-5)
        assert (r.snr_db, r.draws, r.failed, r.seed) == (orig.snr_db, orig.draws, orig.failed, orig.seed)


def test_emit_unwritable(tmp_path):
    with pytest.raises(OSError, match="nope"):
        emit_csv(SweepResult([]), tmp_path / "nope" / "x.csv")
