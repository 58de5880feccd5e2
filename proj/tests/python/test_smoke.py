"""Smoke tests for the python bindings: numeric sanity plus one tiny
end-to-end pipeline run. Heavier coverage lives in the C++ suites."""

import json
import math
import os
import subprocess
import sys
import tempfile

import dtrl


def check(condition, message):
    if not condition:
        raise AssertionError(message)


def test_info_theory():
    check(abs(dtrl.entropy([0.5, 0.5]) - math.log(2)) < 1e-12, "fair-coin entropy")
    check(dtrl.entropy([1.0, 0.0]) == 0.0, "point-mass entropy")

    mi = dtrl.mutual_information([[0.4, 0.1], [0.1, 0.4]])
    check(abs(mi - 0.19274475702175742) < 1e-12, "2x2 mutual information")

    vi = dtrl.variation_of_information([[0.5, 0.0], [0.0, 0.5]])
    check(abs(vi) < 1e-12, "VI of identical variables")

    for seed in range(25):
        gap = dtrl.random_joint_triangle_gap([3, 3, 3], seed)
        check(gap >= -1e-9, f"triangle inequality at seed {seed}")

    try:
        dtrl.entropy([0.5, 0.6])
        raise AssertionError("unnormalized distribution accepted")
    except ValueError:
        pass


def test_text_and_attacks():
    counts = dtrl.featurize("aa", ngram_min=2, ngram_max=2)
    check(len(counts) == 1 and list(counts.values()) == [1.0], "single-bigram featurize")

    candidates = dtrl.char_candidates("ab")
    check("ba" in candidates, "adjacent swap candidate")
    check(all(dtrl.edit_distance("ab", c) == 1 for c in candidates), "single-edit property")

    check(dtrl.edit_distance("good", "god") == 1, "deletion distance")
    check(dtrl.edit_distance("good", "godo") == 1, "transposition distance")


def test_density_ratio_estimator():
    estimate = dtrl.gaussian_mi_estimate(0.8, n=3000, seed=5, steps=1200)
    oracle = -0.5 * math.log(1 - 0.8 * 0.8)
    check(abs(estimate - oracle) < 0.12, f"gaussian MI estimate {estimate} vs {oracle}")


def test_pipeline_roundtrip():
    with tempfile.TemporaryDirectory(prefix="dtrl_py_smoke") as tmp:
        config_path = os.path.join(tmp, "config.ini")
        with open(config_path, "w", encoding="utf-8") as handle:
            handle.write(
                f"""
seed = 4
[data]
generate_train_size = 80
generate_test_size = 24
train = {tmp}/data/train.jsonl
test = {tmp}/data/test.jsonl
domain = {tmp}/aug/domain.jsonl
[encoder]
hash_buckets = 1024
embed_width = 32
[dtrl]
enc_r_shape = 32,16,4
enc_n_shape = 32,16,8
disc_shape = 12,16,1
batch_size = 8
lr = 0.001
disc_lr = 0.002
disen_weight = 0.1
warmup_steps = 6
total_steps = 30
[attack.char]
query_budget = 800
[eval]
sample_size = 16
"""
            )
        dtrl.generate(config_path, os.path.join(tmp, "data"))
        dtrl.train(config_path, "baseline", os.path.join(tmp, "baseline"))
        dtrl.augment(config_path, os.path.join(tmp, "baseline"), os.path.join(tmp, "aug"))
        dtrl.train(config_path, "dtrl", os.path.join(tmp, "dtrl"))
        dtrl.evaluate(config_path, [os.path.join(tmp, "dtrl")], ["robustness"],
                      os.path.join(tmp, "eval"))

        with open(os.path.join(tmp, "eval", "metrics.json"), encoding="utf-8") as handle:
            metrics = json.load(handle)
        check("clean_accuracy" in metrics, "metrics schema")
        check(0.0 <= metrics["clean_accuracy"] <= 100.0, "clean accuracy range")
        check("char_attack" in metrics["accuracy_under_attack"], "attack entry present")


def test_cli_available():
    cli = os.environ.get("DTRL_CLI")
    if not cli:
        return
    result = subprocess.run([cli, "--help"], capture_output=True, text=True, timeout=60)
    check(result.returncode == 0, "CLI --help failed")
    check("mi-check" in result.stdout, "mi-check subcommand missing from help")


def main():
    tests = [
        test_info_theory,
        test_text_and_attacks,
        test_density_ratio_estimator,
        test_pipeline_roundtrip,
        test_cli_available,
    ]
    for test in tests:
        test()
        print(f"ok: {test.__name__}")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
