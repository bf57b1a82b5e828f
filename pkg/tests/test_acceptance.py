"""Acceptance suite.

One test per acceptance criterion; each prints a single pass/fail line with
the measured values.  Defaults unless a criterion states otherwise:
|V| = 1024, gamma = 0.25, r = 4, delta = 2, T = 250, 200 samples, and the
synthetic LM in a high-entropy regime (entropy_spread = 1).  Where a
criterion needs a regime at all (degradation, list-decoding gain, feedback
headroom), the entropy spread is tuned per criterion and noted inline; the
baseline comparison additionally needs |V| = 2^16 because rotation capacity
bounds that scheme's bit width by log2 |V|.
"""

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from allomark import (
    ExperimentConfig,
    Message,
    Scheme,
    SyntheticLMConfig,
    WatermarkConfig,
    bit_accuracy,
    copy_paste,
    decode,
    default_prompt,
    detect_from_decode,
    generate,
    greenlist_bias,
    latency_profile,
    levin_max_cell_cdf,
    list_decode,
    position_alloc_bias,
    run_experiment,
    separability_sim,
)
from allomark.levin import exact_max_cell_cdf
from allomark.rng import mix64

VOCAB = 1024
BASE_WM = WatermarkConfig(vocab_size=VOCAB, gamma=0.25, radix=4, delta=2.0,
                          bit_width=8)
BASE_LM = SyntheticLMConfig(vocab_size=VOCAB, entropy_spread=1.0)


def _report(criterion: str, ok: bool, details: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {criterion}: {status} ({details}) "
          f"[{time.perf_counter() - t0:.1f}s]")


def test_c01_zero_bit_special_case_equality():
    """Single-bit position allocation with payload 0 is bit-exactly the
    zero-bit greenlist scheme."""
    t0 = time.perf_counter()
    cfg = BASE_WM.replace(bit_width=1)
    msg = Message.from_bits("0", cfg.radix)
    rng = np.random.Generator(np.random.Philox(key=101))
    mismatches = 0
    for _ in range(1000):
        logits = rng.standard_normal(VOCAB)
        context = [int(rng.integers(0, VOCAB))]
        a = position_alloc_bias(logits, context, msg, cfg).logits
        b = greenlist_bias(logits, context, cfg)
        mismatches += int(not np.array_equal(a, b))
    ok = mismatches == 0
    _report("C01 zero-bit special case", ok, f"mismatches={mismatches}/1000", t0)
    assert ok


def test_c02_encode_decode_round_trip():
    """delta=8 recovers >= 0.99 mean bit accuracy; delta=0 sits at chance."""
    t0 = time.perf_counter()
    strong = run_experiment(ExperimentConfig(
        lm=BASE_LM, wm=BASE_WM.replace(delta=8.0), samples=200,
        token_length=256, master_seed=202, jobs=2))
    acc_strong = strong.aggregates["bit_accuracy_mean"]
    unbiased = run_experiment(ExperimentConfig(
        lm=BASE_LM, wm=BASE_WM.replace(delta=0.0), samples=200,
        token_length=256, master_seed=203, jobs=2))
    accs = [r.bit_accuracy for r in unbiased.records]
    chance = 0.5  # per-digit chance at power-of-two radix: truth bits uniform
    se = float(np.std(accs) / np.sqrt(len(accs)))
    dist = abs(float(np.mean(accs)) - chance)
    ok = acc_strong >= 0.99 and dist <= 4 * se
    _report("C02 encode-decode round trip", ok,
            f"acc(delta=8)={acc_strong:.4f}, |acc(delta=0)-0.5|={dist:.4f} <= 4*SE={4 * se:.4f}",
            t0)
    assert ok


def test_c03_null_calibration():
    """1000 unwatermarked streams: zero-bit z is standard normal."""
    t0 = time.perf_counter()
    cfg = BASE_WM.replace(scheme=Scheme.GREENLIST, bit_width=1)
    zs = []
    for s in range(1000):
        lm = dataclasses.replace(BASE_LM, seed=mix64(300_000 + s))
        stream = generate(lm, None, None, 250, default_prompt(lm))
        zs.append(detect_from_decode(decode(stream, cfg), cfg).z_score)
    mean = float(np.mean(zs))
    std = float(np.std(zs))
    ok = abs(mean) <= 0.1 and 0.9 <= std <= 1.1
    _report("C03 null calibration", ok, f"mean={mean:+.4f}, std={std:.4f}", t0)
    assert ok


def test_c04_detection_quality():
    """delta=2, b=8, T=250: AUROC >= 0.98 over 200/200 pairs."""
    t0 = time.perf_counter()
    report = run_experiment(ExperimentConfig(
        lm=BASE_LM, wm=BASE_WM, samples=200, token_length=250,
        master_seed=404, jobs=2))
    auroc = report.aggregates["auroc"]
    ok = auroc >= 0.98
    _report("C04 detection quality", ok, f"AUROC={auroc:.4f}", t0)
    assert ok


def test_c05_null_inflation_trend():
    """Mean null z strictly increases across b in {0, 8, 32} on shared streams."""
    t0 = time.perf_counter()
    streams = []
    for s in range(200):
        lm = dataclasses.replace(BASE_LM, seed=mix64(500_000 + s))
        streams.append(generate(lm, None, None, 250, default_prompt(lm)))
    means = []
    configs = [
        BASE_WM.replace(scheme=Scheme.GREENLIST, bit_width=1),
        BASE_WM.replace(bit_width=8),
        BASE_WM.replace(bit_width=32),
    ]
    for cfg in configs:
        zs = [detect_from_decode(decode(st, cfg), cfg).z_score for st in streams]
        means.append(float(np.mean(zs)))
    ok = means[0] < means[1] < means[2]
    _report("C05 null inflation trend", ok,
            f"mean z: b=0 {means[0]:+.3f} < b=8 {means[1]:+.3f} < b=32 {means[2]:+.3f}",
            t0)
    assert ok


def test_c06_levin_approximation():
    """Approximation within 0.05 of a 1e6-draw Monte-Carlo oracle; exact
    enumeration matches brute force for N <= 12, r <= 4."""
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.Generator(np.random.Philox(key=606))
    for trials, cells in [(20, 4), (100, 4), (100, 8)]:
        probs = [1.0 / cells] * cells
        draws = rng.multinomial(trials, probs, size=1_000_000)
        cdf = np.bincount(draws.max(axis=1), minlength=trials + 1).cumsum() / 1e6
        for a in range(trials + 1):
            err = abs(levin_max_cell_cdf(trials, cells, probs, a) - cdf[a])
            worst = max(worst, err)
    # exact branch vs direct enumeration of all r^N outcomes (small cases)
    import itertools

    exact_ok = True
    for trials, cells in [(5, 2), (6, 3), (7, 4)]:
        probs = [1.0 / cells] * cells
        for a in range(1, trials + 1):
            brute = 0.0
            for outcome in itertools.product(range(cells), repeat=trials):
                counts = np.bincount(outcome, minlength=cells)
                if counts.max() <= a:
                    brute += (1.0 / cells) ** trials
            ours = exact_max_cell_cdf(trials, probs, a)
            if abs(ours - brute) > 1e-9:
                exact_ok = False
    ok = worst <= 0.05 and exact_ok
    _report("C06 Levin approximation", ok,
            f"max |err| vs MC = {worst:.4f} (<= 0.05), exact==brute: {exact_ok}", t0)
    assert ok


# --- criterion 7: the baseline comparison needs |V| = 2^16 so the rotation
# --- scheme can express 16-bit payloads; entropy_spread 8 keeps both
# --- schemes off their accuracy ceiling so degradation is visible.

C7_VOCAB = 65536
C7_LM = SyntheticLMConfig(vocab_size=C7_VOCAB, entropy_spread=8.0)
C7_PA = WatermarkConfig(vocab_size=C7_VOCAB, bit_width=16, delta=2.0)
C7_CS = C7_PA.replace(scheme=Scheme.CYCLIC_SHIFT)
C7_PS = (0.0, 0.1, 0.3, 0.5)


def _c7_sample(index: int) -> tuple[list[float], float]:
    msg_rng = np.random.Generator(np.random.Philox(key=mix64(700_000 + index)))
    msg = Message.random(16, 4, msg_rng)
    lm_wm = dataclasses.replace(C7_LM, seed=mix64(710_000 + index))
    lm_hu = dataclasses.replace(C7_LM, seed=mix64(720_000 + index))
    human = generate(lm_hu, None, None, 250, default_prompt(lm_hu))
    pa_stream = generate(lm_wm, C7_PA, msg, 250, default_prompt(lm_wm))
    cs_stream = generate(lm_wm, C7_CS, msg, 250, default_prompt(lm_wm))
    pa_accs = []
    for i, p in enumerate(C7_PS):
        attacked = copy_paste(pa_stream, human, p, seed=mix64(730_000 + 10 * index + i))
        result = decode(attacked, C7_PA)
        pa_accs.append(bit_accuracy(msg.bits, result.predicted.bits)
                       if result.predicted else 0.0)
    cs_attacked = copy_paste(cs_stream, human, 0.5, seed=mix64(740_000 + index))
    cs_result = decode(cs_attacked, C7_CS)
    cs_acc = (bit_accuracy(msg.bits, cs_result.predicted.bits)
              if cs_result.predicted else 0.0)
    return pa_accs, cs_acc


def test_c07_copy_paste_robustness_ordering():
    """Position allocation beats cyclic shift at p=0.5 and degrades
    monotonically in p."""
    t0 = time.perf_counter()
    n = 200
    with ProcessPoolExecutor(max_workers=2) as pool:
        results = list(pool.map(_c7_sample, range(n), chunksize=8))
    pa = np.array([r[0] for r in results])
    cs = np.array([r[1] for r in results])
    pa_means = pa.mean(axis=0)
    cs_mean = float(cs.mean())
    monotone = all(b <= a for a, b in zip(pa_means, pa_means[1:]))
    ordered = pa_means[-1] > cs_mean
    ok = monotone and ordered
    ladder = " >= ".join(f"{m:.3f}" for m in pa_means)
    _report("C07 copy-paste robustness", ok,
            f"position-alloc over p {C7_PS}: {ladder}; "
            f"cyclic-shift@0.5={cs_mean:.3f}", t0)
    assert ok


def test_c08_list_decoding_gain():
    """16-candidate list-best beats the single prediction by >= 0.5pp at
    b=32 and is never lower per sample (entropy_spread 5 keeps the single
    prediction off its ceiling)."""
    t0 = time.perf_counter()
    cfg = BASE_WM.replace(bit_width=32)
    lm_base = dataclasses.replace(BASE_LM, entropy_spread=5.0)
    rng = np.random.Generator(np.random.Philox(key=808))
    singles, bests = [], []
    never_lower = True
    for s in range(200):
        msg = Message.random(32, 4, rng)
        lm = dataclasses.replace(lm_base, seed=mix64(800_000 + s))
        stream = generate(lm, cfg, msg, 256, default_prompt(lm))
        result = decode(stream, cfg)
        single = (bit_accuracy(msg.bits, result.predicted.bits)
                  if result.predicted else 0.0)
        best = list_decode(result.count_matrix, cfg, 16).best_accuracy(msg.bits)
        singles.append(single)
        bests.append(best)
        never_lower &= best >= single
    gain = float(np.mean(bests) - np.mean(singles))
    ok = gain >= 0.005 and never_lower
    _report("C08 list decoding gain", ok,
            f"single={np.mean(singles):.4f}, list16={np.mean(bests):.4f}, "
            f"gain={100 * gain:.2f}pp, never_lower={never_lower}", t0)
    assert ok


def test_c09_flat_latency():
    """Encode and decode medians at b=32 within 1.2x of b=8 (T=250)."""
    t0 = time.perf_counter()
    profile = latency_profile(BASE_LM, BASE_WM, bit_widths=[8, 32],
                              token_length=250, runs=50)
    enc_ratio = profile["encode_ratio_to_smallest"][32]
    dec_ratio = profile["decode_ratio_to_smallest"][32]
    ok = enc_ratio <= 1.2 and dec_ratio <= 1.2
    _report("C09 flat latency", ok,
            f"encode 32b/8b={enc_ratio:.3f}, decode 32b/8b={dec_ratio:.3f} (<= 1.2)",
            t0)
    assert ok


def test_c10_separability_simulation():
    """Mean max-cell score difference shrinks with more positions and with
    larger radix (eps=0.1, 1000 trials)."""
    t0 = time.perf_counter()
    by_positions = [
        separability_sim(250, positions, 4, 0.25, 0.1, 1000, seed=1010 + positions)
        .mean_difference
        for positions in (4, 8, 16)
    ]
    by_radix = [
        separability_sim(250, 8, radix, 0.125, 0.1, 1000, seed=2020 + radix)
        .mean_difference
        for radix in (2, 4, 8)
    ]
    ok = (by_positions[0] > by_positions[1] > by_positions[2]
          and by_radix[0] > by_radix[1] > by_radix[2])
    _report("C10 separability simulation", ok,
            f"diff by positions (4,8,16)={['%.2f' % d for d in by_positions]}, "
            f"by radix (2,4,8)={['%.2f' % d for d in by_radix]}", t0)
    assert ok


def test_c11_feedback_mode():
    """Adaptive bias (delta=2, feedback delta=3) does not hurt accuracy at
    b=8, T=100 over 500 paired samples (entropy_spread 7)."""
    t0 = time.perf_counter()
    lm_base = dataclasses.replace(BASE_LM, entropy_spread=7.0)
    cfg_fb = BASE_WM.replace(feedback_delta=3.0)
    rng = np.random.Generator(np.random.Philox(key=1111))
    acc_fb, acc_plain = [], []
    for s in range(500):
        msg = Message.random(8, 4, rng)
        lm = dataclasses.replace(lm_base, seed=mix64(900_000 + s))
        prompt = default_prompt(lm)
        for cfg, accs in ((cfg_fb, acc_fb), (BASE_WM, acc_plain)):
            stream = generate(lm, cfg, msg, 100, prompt)
            result = decode(stream, cfg)
            accs.append(bit_accuracy(msg.bits, result.predicted.bits)
                        if result.predicted else 0.0)
    mean_fb = float(np.mean(acc_fb))
    mean_plain = float(np.mean(acc_plain))
    ok = mean_fb >= mean_plain
    _report("C11 feedback mode", ok,
            f"feedback={mean_fb:.4f} >= plain={mean_plain:.4f} "
            f"(+{100 * (mean_fb - mean_plain):.2f}pp)", t0)
    assert ok


def test_c12_determinism(tmp_path):
    """Identical config + master seed produce byte-identical per-sample files."""
    t0 = time.perf_counter()
    def run(tag, master):
        cfg = ExperimentConfig(
            lm=BASE_LM, wm=BASE_WM, samples=20, token_length=120,
            master_seed=master, output_path=str(tmp_path / tag), jobs=2)
        run_experiment(cfg)
        return (tmp_path / f"{tag}.jsonl").read_bytes()

    a = run("a", 1212)
    b = run("b", 1212)
    c = run("c", 1213)
    ok = a == b and a != c
    _report("C12 determinism", ok,
            f"identical reruns byte-equal: {a == b}; seed change differs: {a != c}",
            t0)
    assert ok
