"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from trajlab import autodiff as ad
from trajlab.autodiff import Tensor
from trajlab.checkpoint import load_checkpoint, save_checkpoint
from trajlab.data import PredictionCase, normalize_case, select_neighbors
from trajlab.metrics import ade, evaluate, fde, min_over_k
from trajlab.model import (
    ModelConfig,
    ParameterStore,
    forward,
    forward_tensors,
    sample_K,
)
from trajlab.probe import predictor
from trajlab.social import (
    PartitionConfig,
    assign_partition,
    assign_partitions,
    attention_scores,
    compute_meta,
    inject_manual_neighbor,
)
from trajlab.synth import avoidance_cases, linear_cases
from trajlab.training import TrainConfig, train

TWO_PI = 2.0 * math.pi


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def random_case(rng, t_h=8, n_neighbors=None, spread=5.0):
    k = int(rng.integers(0, 8)) if n_neighbors is None else n_neighbors
    return PredictionCase(
        target_observed=rng.normal(size=(t_h, 2)) * spread,
        target_future=rng.normal(size=(12, 2)) * spread,
        neighbors=[rng.normal(size=(t_h, 2)) * spread for _ in range(k)],
        neighbor_ids=[str(i) for i in range(k)],
        case_id=f"rand{rng.integers(1 << 30)}",
    )


def test_partition_oracle():
    """10^6 random angles for every sector count in 1..8, against a linear scan."""
    rng = np.random.default_rng(2024)
    angles = rng.uniform(0.0, TWO_PI, size=1_000_000)
    t0 = time.time()
    mismatches = 0
    for n in range(1, 9):
        got = assign_partitions(angles, n)
        # independent oracle: membership scan over the n half-open intervals
        width = TWO_PI / n
        lowers = np.arange(n) * width
        uppers = np.concatenate([lowers[1:], [TWO_PI]])
        member = (angles[:, None] >= lowers[None, :]) & (angles[:, None] < uppers[None, :])
        assert np.all(member.sum(axis=1) == 1)
        expected = member.argmax(axis=1) + 1
        mismatches += int(np.count_nonzero(got != expected))
        # the scalar entry point agrees with the vectorized one
        sample = rng.choice(angles.size, size=20_000, replace=False)
        scalar = np.array([assign_partition(float(angles[i]), n) for i in sample])
        mismatches += int(np.count_nonzero(scalar != got[sample]))
    elapsed = time.time() - t0
    report(
        "partition oracle (1e6 angles x N in 1..8)",
        mismatches == 0 and elapsed < 5.0,
        f"{mismatches} mismatches, {elapsed:.2f}s",
    )


def test_cyclic_permutation_invariant():
    """Rotating every neighbor by one sector width permutes the sector rows."""
    rng = np.random.default_rng(7)
    cfg = PartitionConfig()
    n = cfg.n_partitions
    delta = TWO_PI / n
    rot = np.array([[math.cos(delta), -math.sin(delta)], [math.sin(delta), math.cos(delta)]])
    worst = 0.0
    self_pinned = True
    for _ in range(1000):
        case = random_case(rng, n_neighbors=int(rng.integers(1, 8)))
        center = case.target_observed[-1]
        rotated = [(nb - center) @ rot.T + center for nb in case.neighbors]
        moved_case = PredictionCase(
            target_observed=case.target_observed,
            target_future=None,
            neighbors=rotated,
            neighbor_ids=list(case.neighbor_ids),
        )
        base = compute_meta(case, cfg, include_self=False)
        moved = compute_meta(moved_case, cfg, include_self=False)
        if not np.array_equal(np.roll(base.counts, 1), moved.counts):
            report("cyclic permutation", False, "counts did not permute")
        worst = max(worst, float(np.max(np.abs(np.roll(base.values[:, 0], 1) - moved.values[:, 0]))))
        worst = max(worst, float(np.max(np.abs(np.roll(base.values[:, 1], 1) - moved.values[:, 1]))))
        for i in range(n):
            if base.counts[i] == 0:
                continue
            j = (i + 1) % n
            diff = (moved.values[j, 2] - base.values[i, 2] - delta) % TWO_PI
            worst = max(worst, min(diff, TWO_PI - diff))
        # the self-neighbor stays pinned to sector 1 when enabled
        with_self = compute_meta(moved_case, cfg, include_self=True)
        if with_self.counts[0] != moved.counts[0] + 1:
            self_pinned = False
    report(
        "cyclic permutation of sector rows (1000 cases)",
        worst < 1e-9 and self_pinned,
        f"worst deviation {worst:.2e}, self pinned: {self_pinned}",
    )


def test_translation_invariance():
    rng = np.random.default_rng(11)
    cfg = PartitionConfig()
    worst = 0.0
    for _ in range(1000):
        case = random_case(rng)
        shift = rng.uniform(-100.0, 100.0, size=2)
        moved = PredictionCase(
            target_observed=case.target_observed + shift,
            target_future=None,
            neighbors=[nb + shift for nb in case.neighbors],
            neighbor_ids=list(case.neighbor_ids),
        )
        a = compute_meta(case, cfg)
        b = compute_meta(moved, cfg)
        assert np.array_equal(a.counts, b.counts)
        worst = max(worst, float(np.max(np.abs(a.values - b.values))))
    report("translation invariance (1000 scenes)", worst <= 1e-9, f"worst {worst:.2e}")


def test_attention_score_identity():
    """raw[n] equals an independently coded squared sum; normalized sums to 1."""
    rng = np.random.default_rng(13)
    worst_rel = 0.0
    worst_norm = 0.0
    for _ in range(1000):
        rows = int(rng.integers(1, 9))
        width = int(rng.integers(1, 65))
        f = rng.normal(size=(rows, width)) * rng.uniform(0.1, 10.0)
        prof = attention_scores(f)
        # independent route: einsum row-by-row inner products
        oracle = np.einsum("ij,ij->i", f, f)
        rel = np.abs(prof.raw - oracle) / np.maximum(oracle, 1e-300)
        worst_rel = max(worst_rel, float(rel.max()))
        if prof.raw.sum() > 0.0:
            worst_norm = max(worst_norm, abs(float(prof.normalized.sum()) - 1.0))
    # and a literal hand loop on one small matrix
    f = rng.normal(size=(3, 4))
    by_hand = [sum(f[i, j] ** 2 for j in range(4)) for i in range(3)]
    np.testing.assert_allclose(attention_scores(f).raw, by_hand, rtol=1e-12)
    report(
        "attention squared-sum identity (1000 matrices)",
        worst_rel <= 1e-12 and worst_norm <= 1e-9,
        f"worst rel {worst_rel:.2e}, worst norm drift {worst_norm:.2e}",
    )


def _op_grad_cases(rng):
    """One (name, tensor, scalar fn) triple per differentiable op."""
    def t(shape, scale=1.0):
        return Tensor(rng.normal(size=shape) * scale, requires_grad=True)

    mm_w = Tensor(rng.normal(size=(4, 5)))
    mm_t = Tensor(rng.normal(size=(3, 5)))
    add_o = Tensor(rng.normal(size=(4, 3)))
    mul_o = Tensor(rng.normal(size=(3, 3)))
    cat_o = Tensor(rng.normal(size=(3, 4)))
    sm_t = Tensor(rng.normal(size=(3, 6)))
    ln_g = Tensor(rng.normal(size=(8,)))
    ln_b = Tensor(rng.normal(size=(8,)))
    ln_t = Tensor(rng.normal(size=(4, 8)))
    ln_x = Tensor(rng.normal(size=(4, 8)))
    mse_p = Tensor(rng.normal(size=(3, 4)))
    relu_data = rng.normal(size=(4, 4))
    relu_data[np.abs(relu_data) < 0.05] += 0.1

    zeros = lambda shape: Tensor(np.zeros(shape))
    return [
        ("matmul", t((3, 4)), lambda x: ad.mean_squared_error(ad.matmul(x, mm_w), mm_t)),
        ("add", t((4, 3)), lambda x: ad.mean_squared_error(ad.add(x, add_o), zeros((4, 3)))),
        ("add_bias", t((3,)), lambda x: ad.mean_squared_error(ad.add(add_o, x), zeros((4, 3)))),
        ("multiply", t((3, 3)), lambda x: ad.mean_squared_error(ad.multiply(x, mul_o), zeros((3, 3)))),
        ("multiply_scalar", t((2, 5)), lambda x: ad.mean_squared_error(ad.multiply(x, 0.37), zeros((2, 5)))),
        ("concat", t((3, 2)), lambda x: ad.mean_squared_error(ad.concat([x, cat_o]), zeros((3, 6)))),
        ("relu", Tensor(relu_data, requires_grad=True),
         lambda x: ad.mean_squared_error(ad.relu(x), zeros((4, 4)))),
        ("softmax", t((3, 6)), lambda x: ad.mean_squared_error(ad.softmax(x), sm_t)),
        ("layer_norm", t((4, 8), 2.0), lambda x: ad.mean_squared_error(ad.layer_norm(x, ln_g, ln_b), ln_t)),
        ("layer_norm_gain", t((8,)), lambda x: ad.mean_squared_error(ad.layer_norm(ln_x, x, ln_b), ln_t)),
        ("layer_norm_bias", t((8,)), lambda x: ad.mean_squared_error(ad.layer_norm(ln_x, ln_g, x), ln_t)),
        ("mse_pred", t((3, 4)), lambda x: ad.mean_squared_error(x, mse_p)),
        ("mse_target", t((3, 4)), lambda x: ad.mean_squared_error(mse_p, x)),
        ("reshape", t((2, 6)), lambda x: ad.mean_squared_error(ad.reshape(x, (3, 4)), zeros((3, 4)))),
        ("transpose", t((3, 5)), lambda x: ad.mean_squared_error(ad.transpose(x), zeros((5, 3)))),
        ("slice", t((5, 6)), lambda x: ad.mean_squared_error(x[1:4, 2:5], zeros((3, 3)))),
        ("pad_rows", t((3, 4)), lambda x: ad.mean_squared_error(ad.pad_rows(x, 6), zeros((6, 4)))),
    ]


def test_gradient_fidelity():
    """Central differences: every op < 1e-4; a 1-layer d=8 model end to end < 1e-3."""
    t0 = time.time()
    worst_op = ("", 0.0)
    checks = 0
    for seed in range(6):
        rng = np.random.default_rng(31_000 + seed)
        for name, tensor, f in _op_grad_cases(rng):
            err = ad.grad_check(f, tensor, eps=1e-5)
            checks += 1
            if err > worst_op[1]:
                worst_op = (name, err)
    ops_ok = worst_op[1] < 1e-4

    cfg = ModelConfig(d=8, d_sc=8, n_layers=1, n_heads=2, d_ff=16)
    params = ParameterStore.initialize(cfg, seed=3)
    rng = np.random.default_rng(42)
    for _, tensor in params.items():
        tensor.data = tensor.data + rng.normal(scale=0.05, size=tensor.data.shape)
    case, _ = normalize_case(select_neighbors(linear_cases(1, seed=5)[0]))
    gt = Tensor(rng.normal(size=(12, 2)))

    worst_e2e = ("", 0.0)
    for name, tensor in params.items():
        def f(_):
            pred, _rows = forward_tensors(case, params, cfg)
            return ad.mean_squared_error(pred, gt)

        err = ad.grad_check(f, tensor, eps=1e-5)
        if err > worst_e2e[1]:
            worst_e2e = (name, err)
    e2e_ok = worst_e2e[1] < 1e-3
    elapsed = time.time() - t0
    report(
        "gradient fidelity (ops + end-to-end)",
        ops_ok and e2e_ok and elapsed < 60.0,
        f"{checks} op checks, worst op {worst_op[0]}={worst_op[1]:.2e}, "
        f"worst e2e {worst_e2e[0]}={worst_e2e[1]:.2e}, {elapsed:.1f}s",
    )


def test_metric_oracles():
    """ADE/FDE/min-over-K against brute-force loops; prefix monotonicity."""
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(1000):
        K = int(rng.integers(1, 21))
        t_f = int(rng.integers(1, 16))
        samples = rng.normal(size=(K, t_f, 2)) * rng.uniform(0.5, 8.0)
        gt = rng.normal(size=(t_f, 2)) * 5.0
        a, f = min_over_k(samples, gt)
        brute_a, brute_f = np.inf, np.inf
        for k in range(K):
            s_a = 0.0
            for step in range(t_f):
                s_a += math.sqrt(
                    (samples[k, step, 0] - gt[step, 0]) ** 2
                    + (samples[k, step, 1] - gt[step, 1]) ** 2
                )
            brute_a = min(brute_a, s_a / t_f)
            brute_f = min(
                brute_f,
                math.hypot(samples[k, -1, 0] - gt[-1, 0], samples[k, -1, 1] - gt[-1, 1]),
            )
        worst = max(worst, abs(a - brute_a), abs(f - brute_f))

    # prefix-sampling monotonicity on a live model
    cfg = ModelConfig(d=8, d_sc=8, n_layers=1, n_heads=2, d_ff=16, noise_dim=16)
    params = ParameterStore.initialize(cfg, seed=0)
    monotone = True
    for case in linear_cases(5, seed=2):
        normed, tf = normalize_case(select_neighbors(case))
        samples = sample_K(normed, params, cfg, K=20, seed=4).samples + tf.offset
        prev = np.inf
        for K in range(1, 21):
            a, _ = min_over_k(samples[:K], case.target_future)
            if a > prev + 1e-15:
                monotone = False
            prev = a
    report(
        "metric oracles (1000 instances) + minADE monotone in K",
        worst <= 1e-12 and monotone,
        f"worst abs dev {worst:.2e}, monotone {monotone}",
    )


def test_overfit_smoke():
    """Default model, 10 synthetic cases, 200 epochs, seed 0."""
    t0 = time.time()
    cases = linear_cases(10, seed=0)
    cfg = ModelConfig()
    params, curve = train(cases, cfg, TrainConfig(epochs=200, batch_size=2, seed=0))
    rep = evaluate(predictor(params, cfg), cases, K=1, seed=0)
    elapsed = time.time() - t0
    ratio = curve[-1] / curve[0]
    report(
        "overfit smoke (10 cases, 200 epochs, seed 0)",
        ratio < 0.01 and rep.min_ade_k < 0.05 and elapsed < 600.0,
        f"loss ratio {ratio:.5f}, minADE1 {rep.min_ade_k:.4f}, {elapsed:.0f}s",
    )


def test_directional_social_benefit():
    """Social-context model beats the plain one on the avoidance set, most seeds."""
    cases = avoidance_cases(500, seed=123)
    train_set, eval_set = cases[:400], cases[400:]

    def run(use_social: bool, seed: int) -> float:
        cfg = ModelConfig(
            d=16, d_sc=16, n_layers=1, n_heads=2, d_ff=32,
            use_social=use_social, partition=PartitionConfig(n_partitions=8),
        )
        tcfg = TrainConfig(epochs=30, batch_size=64, seed=seed, learning_rate=1e-3)
        params, _ = train(train_set, cfg, tcfg)
        return evaluate(predictor(params, cfg), eval_set, K=1, seed=0).min_ade_k

    wins = 0
    details = []
    for seed in (0, 1, 2):
        social_ade = run(True, seed)
        plain_ade = run(False, seed)
        wins += int(social_ade < plain_ade)
        details.append(f"seed{seed}: {social_ade:.3f} vs {plain_ade:.3f}")
    report(
        "directional social benefit (3 seeds, majority)",
        wins >= 2,
        f"{wins}/3 wins; " + "; ".join(details),
    )


def test_plain_mode_neutrality():
    """Without the social branch, manual neighbors change nothing, bitwise."""
    cfg = ModelConfig(d=16, d_sc=16, n_layers=1, n_heads=2, d_ff=32, use_social=False)
    params = ParameterStore.initialize(cfg, seed=0)
    rng = np.random.default_rng(19)
    all_equal = True
    for _ in range(100):
        case = random_case(rng)
        normed, _ = normalize_case(select_neighbors(case))
        base = forward(normed, params, cfg)
        poked, _ = normalize_case(
            inject_manual_neighbor(normed, rng.normal(size=2), rng.normal(size=2))
        )
        if not np.array_equal(base, forward(poked, params, cfg)):
            all_equal = False
    report("plain-mode neutrality (100 cases, bitwise)", all_equal)


def test_checkpoint_round_trip(tmp_path):
    """Save/load reproduces predictions bitwise on 100 cases."""
    cfg = ModelConfig(d=16, d_sc=16, n_layers=1, n_heads=2, d_ff=32)
    params = ParameterStore.initialize(cfg, seed=5)
    path = tmp_path / "ckpt.json"
    save_checkpoint(path, params, cfg)
    loaded, cfg2, _ = load_checkpoint(path)
    rng = np.random.default_rng(23)
    all_equal = True
    for _ in range(100):
        case = random_case(rng)
        normed, _ = normalize_case(select_neighbors(case))
        if not np.array_equal(forward(normed, params, cfg), forward(normed, loaded, cfg2)):
            all_equal = False
    report("checkpoint round trip (100 cases, bitwise)", all_equal)
