"""CLI behavior: subcommands, exit codes, file round trips."""

import json
import subprocess
import sys

BASE = [sys.executable, "-m", "permtest"]


def run(*args, **kwargs):
    return subprocess.run(
        BASE + list(args), capture_output=True, text=True, **kwargs
    )


def kv(stdout):
    pairs = {}
    for line in stdout.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            pairs[key] = value
    return pairs


class TestGen:
    def test_mult_pair_values(self, tmp_path):
        out = tmp_path / "inst.json"
        res = run("gen", "--family", "mult", "--C", "2", "--blocks", "1",
                  "--out", str(out))
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert pairs["true_tv_close_exact"] == "1/7"
        assert pairs["true_tv_far_exact"] == "2/7"
        obj = json.loads(out.read_text())
        assert obj["format"] == "instance-pair"
        assert set(obj["members"]) == {"close", "far"}

    def test_testing_lb_prints_shape(self):
        res = run("gen", "--family", "testing-lb", "--n", "1048576",
                  "--epsilon", "0.05")
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert pairs["L"] == "7"
        assert pairs["dev_delta"] == "1/45"

    def test_moment_pair_prints_match(self):
        res = run("gen", "--family", "moment-pair", "--order", "2")
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert float(pairs["tv"]) >= 1 / 6 - 1e-12

    def test_cfr_from_random_pair(self, tmp_path):
        out = tmp_path / "cfr.json"
        res = run("gen", "--family", "cfr", "--k", "4", "--blocks", "3",
                  "--which", "f", "--seed", "2", "--out", str(out))
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert float(pairs["tv_f_r"]) >= float(pairs["tv_c_r"])
        res2 = run("test", "--q", str(out), "--epsilon", "0.9",
                   "--simulate", str(out), "--num-samples", "5000")
        assert res2.returncode == 0

    def test_construction_error_exit_3(self):
        res = run("gen", "--family", "testing-lb", "--n", "100",
                  "--epsilon", "0.05")
        assert res.returncode == 3

    def test_usage_error_exit_2(self):
        assert run("gen", "--family", "mult", "--C", "1").returncode == 2
        assert run("gen", "--family", "nope").returncode == 2


class TestTestCommand:
    def test_roundtrip_simulate(self, tmp_path):
        out = tmp_path / "inst.json"
        assert run("gen", "--family", "mult", "--C", "2", "--blocks", "5",
                   "--seed", "3", "--out", str(out)).returncode == 0
        res = run("test", "--q", str(out), "--epsilon", "0.25",
                  "--simulate", str(out), "--which", "far", "--seed", "1",
                  "--num-samples", "300000")
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert pairs["decision"] == "NO"
        assert int(pairs["samples_used"]) == 300000

    def test_uniform_reference_always_yes(self, tmp_path):
        ref = tmp_path / "u.json"
        n = 32
        ref.write_text(json.dumps({"n": n, "probs": [1 / n] * n}))
        res = run("test", "--q", str(ref), "--epsilon", "0.5",
                  "--simulate", str(ref), "--seed", "9")
        assert res.returncode == 0
        assert kv(res.stdout)["decision"] == "YES"

    def test_samples_file(self, tmp_path):
        ref = tmp_path / "u.json"
        n = 8
        ref.write_text(json.dumps({"n": n, "probs": [1 / n] * n}))
        draws = tmp_path / "draws.txt"
        draws.write_text("\n".join(str(i % n) for i in range(4000)) + "\n")
        res = run("test", "--q", str(ref), "--epsilon", "0.5",
                  "--samples", str(draws))
        assert res.returncode == 0

    def test_out_of_range_sample_exit_4(self, tmp_path):
        ref = tmp_path / "u.json"
        ref.write_text(json.dumps({"n": 4, "probs": [0.25] * 4}))
        draws = tmp_path / "draws.txt"
        draws.write_text("0\n1\n9\n")
        res = run("test", "--q", str(ref), "--epsilon", "0.5",
                  "--samples", str(draws))
        assert res.returncode == 4

    def test_malformed_reference_exit_4(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        res = run("test", "--q", str(bad), "--epsilon", "0.5",
                  "--simulate", str(bad))
        assert res.returncode == 4

    def test_missing_source_exit_2(self, tmp_path):
        ref = tmp_path / "u.json"
        ref.write_text(json.dumps({"n": 4, "probs": [0.25] * 4}))
        res = run("test", "--q", str(ref), "--epsilon", "0.5")
        assert res.returncode == 2

    def test_pair_file_needs_which(self, tmp_path):
        out = tmp_path / "pair.json"
        run("gen", "--family", "mult", "--C", "2", "--out", str(out))
        res = run("test", "--q", str(out), "--epsilon", "0.25",
                  "--simulate", str(out), "--num-samples", "1000")
        assert res.returncode == 2


class TestEstimate:
    def test_far_member_rejected(self, tmp_path):
        out = tmp_path / "inst.json"
        run("gen", "--family", "mult", "--C", "2", "--blocks", "20",
            "--seed", "3", "--out", str(out))
        res = run("estimate", "--q", str(out), "--eps-close", "0.142857",
                  "--eps-far", "0.285714", "--simulate", str(out),
                  "--which", "far", "--seed", "0")
        assert res.returncode == 0
        pairs = kv(res.stdout)
        assert pairs["decision"] == "NO"
        assert float(pairs["tv_estimate"]) > 0.2


class TestBench:
    def test_writes_csv(self, tmp_path):
        cfg = {
            "tester": "plugin-tol",
            "family": "mult-far",
            "n": 420,
            "C": 2,
            "eps_close": 1 / 7,
            "eps_far": 2 / 7,
            "trials": 5,
            "master_seed": 3,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "rates.csv"
        res = run("bench", "--config", str(cfg_path), "--out", str(out))
        assert res.returncode == 0
        header = out.read_text().splitlines()[0]
        assert header.startswith("family,tester,n,param1,param2,m,trials")

    def test_zero_trials_exit_2(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "tester": "perm-id", "family": "equal", "n": 16,
            "epsilon": 0.5, "trials": 0, "master_seed": 1,
        }))
        res = run("bench", "--config", str(cfg_path), "--out",
                  str(tmp_path / "x.csv"))
        assert res.returncode == 2


class TestVerify:
    def test_mult_all_factors(self):
        res = run("verify", "--family", "mult", "--C", "2", "3", "4", "5")
        assert res.returncode == 0

    def test_cfr_pairs(self):
        res = run("verify", "--family", "cfr", "--pairs", "100", "--seed", "7")
        assert res.returncode == 0

    def test_instances(self):
        res = run("verify", "--family", "instances", "--count", "12",
                  "--seed", "1")
        assert res.returncode == 0
