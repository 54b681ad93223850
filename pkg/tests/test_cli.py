import json

import numpy as np
import pytest

from sparsedom.campaign import CampaignConfig, run_campaign
from sparsedom.cli import main
from sparsedom.dyadic import DyadicInterval
from sparsedom.generate import generate_signal, generate_sparse_collection
from sparsedom.haar import HaarMultiplier
from sparsedom.serialize import (dump_json, read_collection, read_multiplier,
                                 read_signal, revalidate_certificate,
                                 write_collection, write_multiplier,
                                 write_signal)
from sparsedom.stopping import dominate_avg, dominate_square


def I(d, i):
    return DyadicInterval(d, i)


class TestSerialize:
    def test_signal_roundtrip(self, tmp_path):
        f = generate_signal("gaussian_noise", 5, seed=0)
        path = tmp_path / "sig.txt"
        write_signal(f, path)
        g = read_signal(path)
        assert np.array_equal(f.values, g.values)

    def test_signal_csv_row(self, tmp_path):
        path = tmp_path / "sig.csv"
        path.write_text("1.0,2.0,3.0,4.0\n")
        f = read_signal(path)
        assert f.depth_J == 2
        assert np.array_equal(f.values, [1.0, 2.0, 3.0, 4.0])

    def test_signal_bad_count(self, tmp_path):
        path = tmp_path / "sig.txt"
        path.write_text("1\n2\n3\n")
        with pytest.raises(ValueError):
            read_signal(path)

    def test_multiplier_roundtrip(self, tmp_path):
        T = HaarMultiplier.from_dict({I(0, 0): 0.5, I(2, 3): -1.0})
        path = tmp_path / "mult.csv"
        write_multiplier(T, path)
        T2 = read_multiplier(path)
        assert T2.intervals == T.intervals
        assert T2.coefficients == T.coefficients

    def test_collection_roundtrip(self, tmp_path):
        S = generate_sparse_collection(6, seed=1)
        path = tmp_path / "coll.csv"
        write_collection(S, path)
        S2 = read_collection(path)
        assert S2.intervals == S.intervals

    def test_certificate_revalidates(self):
        f = generate_signal("gaussian_noise", 6, seed=2)
        g = generate_signal("gaussian_noise", 6, seed=3)
        from sparsedom.generate import generate_multiplier
        T = generate_multiplier(6, seed=4, n_intervals=30)
        for cert in (dominate_avg(T, f, g), dominate_square(T, f, g)):
            data = json.loads(dump_json(cert.to_dict()))
            assert revalidate_certificate(data)


class TestCampaign:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            CampaignConfig(trials=0).validate()
        with pytest.raises(ValueError):
            CampaignConfig(depth_J=2).validate()
        with pytest.raises(ValueError):
            CampaignConfig(modes=("nope",)).validate()

    def test_unknown_config_field_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"trials": 1, "bogus": 2}))
        with pytest.raises(ValueError, match="bogus"):
            CampaignConfig.from_file(path)

    def test_deterministic_reports(self, tmp_path):
        outs = []
        for run in range(2):
            cfg = CampaignConfig(depth_J=6, trials=3, seed=11,
                                 modes=("avg", "atoms", "cz", "spmodel"),
                                 out_jsonl=str(tmp_path / f"r{run}.jsonl"),
                                 out_csv=str(tmp_path / f"r{run}.csv"))
            records, summary, ok = run_campaign(cfg)
            assert ok
            outs.append((tmp_path / f"r{run}.jsonl").read_bytes()
                        + (tmp_path / f"r{run}.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_all_modes_smoke(self, tmp_path):
        cfg = CampaignConfig(depth_J=5, trials=2, seed=3, n_intervals=20,
                             out_jsonl=str(tmp_path / "out.jsonl"))
        records, summary, ok = run_campaign(cfg)
        assert ok
        assert set(summary) == set(cfg.modes)
        lines = (tmp_path / "out.jsonl").read_text().splitlines()
        assert len(lines) == len(records)
        for line in lines:
            json.loads(line)

    def test_certificates_revalidate_on_reload(self, tmp_path):
        cfg = CampaignConfig(depth_J=6, trials=3, seed=4, n_intervals=25,
                             modes=("avg", "square", "osc", "weighted"),
                             out_jsonl=str(tmp_path / "certs.jsonl"))
        _, _, ok = run_campaign(cfg)
        assert ok
        for line in (tmp_path / "certs.jsonl").read_text().splitlines():
            data = json.loads(line)
            assert revalidate_certificate(data), data["mode"]

    def test_workers_match_serial(self):
        base = dict(depth_J=5, trials=4, seed=7, modes=("square", "weak11"))
        r1, _, _ = run_campaign(CampaignConfig(**base, workers=1))
        r2, _, _ = run_campaign(CampaignConfig(**base, workers=4))
        assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


class TestCli:
    def test_haar_roundtrip(self, tmp_path, capsys):
        sig = tmp_path / "f.txt"
        write_signal(generate_signal("single_mode", 3, seed=0), sig)
        rc = main(["haar", "--in", str(sig), "--depth", "3"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["depth_J"] == 3
        assert payload["coefficients"][0]["value"] == pytest.approx(1.0)

    def test_haar_csv_format(self, tmp_path):
        out = tmp_path / "coeffs.csv"
        rc = main(["haar", "--depth", "4", "--seed", "5",
                   "--format", "csv", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("depth,index")

    def test_sparse_check(self, tmp_path, capsys):
        coll = tmp_path / "coll.csv"
        write_collection(generate_sparse_collection(5, seed=2), coll)
        rc = main(["sparse-check", str(coll), "--depth", "5"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["certified"]
        assert payload["carleson"] <= 2.0

    def test_dominate_modes(self, capsys):
        for mode in ("avg", "square", "weighted", "osc"):
            rc = main(["dominate", "--mode", mode, "--depth", "5",
                       "--seed", "1", "--n-intervals", "15"])
            assert rc == 0
            payload = json.loads(capsys.readouterr().out)
            assert payload["mode"] in (mode,)
            assert payload["checks"]["partition_ok"]

    def test_atoms_command(self, tmp_path):
        out = tmp_path / "atoms.json"
        rc = main(["atoms", "--depth", "5", "--seed", "2", "--p", "1.0",
                   "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["checks"]["reconstruction_ok"]
        assert all("atom_values" in a for a in payload["atoms"])

    def test_cz_command(self, capsys):
        rc = main(["cz", "--depth", "5", "--seed", "3", "--alpha", "1.5"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["split_ok"]

    def test_weak11_command(self, capsys):
        rc = main(["weak11", "--depth", "5", "--seed", "4"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["majority_ok"]

    def test_campaign_command(self, tmp_path, capsys):
        cfg = {"depth_J": 5, "trials": 2, "seed": 1, "modes": ["avg", "cz"],
               "n_intervals": 15}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        rc = main(["campaign", "--config", str(path)])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["ok"]

    def test_env_seed_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("SPARSEDOM_SEED", "9")
        rc = main(["haar", "--depth", "3"])
        assert rc == 0
        first = capsys.readouterr().out
        rc = main(["haar", "--depth", "3", "--seed", "9"])
        assert first == capsys.readouterr().out

    def test_invalid_config_is_diagnosed(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"trials": 0}))
        rc = main(["campaign", "--config", str(path)])
        assert rc == 2
        assert "trials" in capsys.readouterr().err
