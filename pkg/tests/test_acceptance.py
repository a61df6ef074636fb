"""One test per acceptance criterion, each printing a pass/fail line."""

import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from corpus import (ORACLE_CORPUS, capped_bagging_family, constant_family, distillation_family,
                    feature_map_family, finite_bagging_family, label_mean_family, pcr_family, random_distribution,
                    random_pair, sco_family, unit_ball_points)
from hssbench.applications import (DistillationHypothesisSet, SCOMixtureHypothesisSet, draw_subsamples,
                                   max_multiplicity, multiplicity_bound, pca_stability_curve)
from hssbench.bounds import (BoundInputs, estimate_bound_inputs, pac_bayes_bound, theorem2_bound,
                             validate_bound_coverage)
from hssbench.cli import EXIT_OK, main
from hssbench.complexity import (concentration_bound, dd_rademacher_mc, kernel_expansion_family,
                                 linear_ball_family, linear_norm_bound, massart_l1_bound)
from hssbench.core import ABSOLUTE_LOSS, LabeledSample, SeededRng
from hssbench.mechanisms import (ScoreFamily, check_dp_ratio, check_max_vs_expectation, exponential_sampler,
                                 lemma_su_tail_check, neighbor_super_samples, psi_score_family, uniform_sampler,
                                 verify_sensitivity)
from hssbench.oracle import (exact_dd_rademacher, exact_transductive_expectation, exact_transductive_rademacher,
                             lemma_trans_slack)
from hssbench.stability import check_lemma1, stability_report


def oracle_instances():
    out = []
    for f, (name, factory, target, max_m) in enumerate(ORACLE_CORPUS):
        for j, m in enumerate(np.unique(np.linspace(3, max_m, 6).round().astype(int))):
            out.append((name, factory, target, int(m), 100 * f + j))
    return out


def test_criterion_1_oracle_agreement(criterion):
    start = time.perf_counter()
    instances = oracle_instances()
    failures = []
    for name, factory, target, m, seed in instances:
        S, T = random_pair(seed, m)
        loss = None if target == "raw" else ABSOLUTE_LOSS
        exact = exact_dd_rademacher(factory(), S, T, loss)
        mc = dd_rademacher_mc(factory(), S, T, ABSOLUTE_LOSS, 10**5, SeededRng(seed), target=target)
        if abs(mc.value - exact) > 3 * mc.std_error:
            failures.append((name, m))
    secs = time.perf_counter() - start
    ok = len(instances) >= 50 and not failures and secs < 120
    criterion(1, ok, f"{len(instances)} instances, {len(failures)} outside 3 SE", secs)
    assert ok, failures


def test_criterion_2_closed_form_dominance(criterion):
    start = time.perf_counter()
    gen = SeededRng(2).generator()
    violations = 0
    for k in range(100):
        m, d = int(gen.integers(2, 10)), int(gen.integers(1, 4))
        S = LabeledSample(unit_ball_points(gen, m, d), gen.random(m))
        T = LabeledSample(unit_ball_points(gen, m, d), gen.random(m))
        lam1 = float(gen.uniform(0.1, 3.0))
        if exact_dd_rademacher(kernel_expansion_family(lam1), S, T, None) > massart_l1_bound(lam1, S, T) + 1e-12:
            violations += 1
        lam = float(gen.uniform(0.1, 3.0))
        if exact_dd_rademacher(linear_ball_family(lam), S, T, None) > linear_norm_bound(lam, T)[0] + 1e-12:
            violations += 1
    secs = time.perf_counter() - start
    ok = violations == 0 and secs < 60
    criterion(2, ok, f"200 linear instances, {violations} violations", secs)
    assert ok


def test_criterion_3_cv_stability_vs_diameter_plus_beta(criterion):
    start = time.perf_counter()
    exact_bad, estimated_bad, n_exact, n_est = 0, 0, 0, 0
    for seed in range(3):
        D = random_distribution(30 + seed, n_atoms=4)
        for factory in (constant_family, label_mean_family, distillation_family, finite_bagging_family):
            for m in (4, 7):
                rep = stability_report(factory(), D, m, 2, 0, SeededRng(seed), exhaustive=True)
                assert rep.directionality == "exact"
                n_exact += 1
                exact_bad += not check_lemma1(rep, tol=1e-9)
        for factory in (label_mean_family, distillation_family, finite_bagging_family, capped_bagging_family,
                        feature_map_family, pcr_family, sco_family):
            rep = stability_report(factory(), D, 8, 3, 16, SeededRng(100 + seed))
            n_est += 1
            estimated_bad += rep.chi_hat > rep.delta_hat + rep.beta_hat + 3 * rep.chi_std_error
    secs = time.perf_counter() - start
    ok = exact_bad == 0 and estimated_bad == 0 and secs < 60
    criterion(3, ok, f"{n_exact} exact ({exact_bad} fail), {n_est} estimated ({estimated_bad} fail)", secs)
    assert ok


def certified_beta(name, m):
    """Stability certificates where the family has one; None falls back to the exhaustive plug-in."""
    if name == "finite-constant":
        return 0.0
    if name == "label-mean":
        return 1.0 / m
    if name == "distillation":
        X, y = np.zeros((m, 1)), np.full(m, 0.5)
        return DistillationHypothesisSet(gamma=0.15, n_grid=11).fit(X, y).stability_certificate_
    return None


THEOREM2_FAMILIES = [("finite-constant", constant_family), ("label-mean", label_mean_family),
                     ("distillation", distillation_family), ("bagging-finite", finite_bagging_family)]


def test_criterion_4_stability_bound_coverage(criterion):
    start = time.perf_counter()
    D = random_distribution(21)
    m, delta, trials = 30, 0.1, 2000
    rates = {}
    for k, (name, factory) in enumerate(THEOREM2_FAMILIES):
        inputs = estimate_bound_inputs(factory(), D, m, delta, SeededRng(40 + k), beta=certified_beta(name, m))
        res = validate_bound_coverage(factory(), D, "theorem2-min", m, delta, trials, SeededRng(50 + k), inputs)
        rates[name] = res.violation_rate
    secs = time.perf_counter() - start
    limit = 0.121  # delta plus three binomial standard errors at 2000 trials, rounded up
    ok = all(r <= limit for r in rates.values()) and secs < 300
    criterion(4, ok, "violation rates " + ", ".join(f"{k}={v:.4f}" for k, v in rates.items())
              + f" (limit {limit:.3f})", secs)
    assert ok


def test_criterion_5_transductive_bound_coverage(criterion):
    start = time.perf_counter()
    D = random_distribution(22)
    rates = {}
    for k, (name, factory) in enumerate(THEOREM2_FAMILIES[1:]):
        res = validate_bound_coverage(factory(), D, "theorem1", 20, 0.1, 2000, SeededRng(60 + k), n=20)
        rates[name] = res.violation_rate
    secs = time.perf_counter() - start
    ok = all(r <= 0.121 for r in rates.values()) and secs < 300
    criterion(5, ok, "sampled-U violation rates " + ", ".join(f"{k}={v:.4f}" for k, v in rates.items()), secs)
    assert ok


def test_criterion_6_partition_average_vs_transductive_complexity(criterion):
    start = time.perf_counter()
    gen = SeededRng(6).generator()
    violations, count = 0, 0
    for m in range(2, 9):
        slack = lemma_trans_slack(m, m)
        assert slack == pytest.approx(2 * math.sqrt(math.log(2 * math.e) / m))
        for _ in range(100):
            L = gen.random((int(gen.integers(1, 6)), 2 * m))
            count += 1
            violations += exact_transductive_expectation(L, m=m, n=m) > \
                exact_transductive_rademacher(L, m=m, n=m) + slack
    secs = time.perf_counter() - start
    ok = violations == 0 and secs < 120
    criterion(6, ok, f"{count} loss tables, {violations} violations", secs)
    assert ok


def marked_count_pairs(m):
    pairs = []
    for bits in range(2**m):
        y = np.array([(bits >> i) & 1 for i in range(m)], float)
        for i in range(m):
            y2 = y.copy()
            y2[i] = 1 - y2[i]
            pairs.append((LabeledSample(np.zeros((m, 1)), y), LabeledSample(np.zeros((m, 1)), y2)))
    return pairs


def test_criterion_7_mechanisms(criterion):
    start = time.perf_counter()
    gen = SeededRng(7).generator()
    max_fail = 0
    for _ in range(1000):
        f = gen.standard_normal(int(gen.integers(1, 21)))
        max_fail += not check_max_vs_expectation(f, float(gen.uniform(0.05, 5)), float(gen.uniform(0.01, 2)))[2]

    D = random_distribution(70, n_atoms=3)
    scorers = [
        (ScoreFamily(2, lambda k, S: float(np.sum(S.y == (1.0 if k == 0 else 0.0))) / 4, 0.25), marked_count_pairs(4)),
        (ScoreFamily(3, lambda k, S: 0.5, 1e-3), marked_count_pairs(2)),
        (psi_score_family(constant_family(), D, 5, 3, 0.0), neighbor_super_samples(D, 5, 3, 40, SeededRng(1))),
        (psi_score_family(label_mean_family(), D, 5, 3, 0.2), neighbor_super_samples(D, 5, 3, 40, SeededRng(2))),
    ]
    dp_fail = 0
    for fam, pairs in scorers:
        assert verify_sensitivity(fam, pairs)[1]
        for eps in (0.1, 1.0, 2.0):
            dp_fail += not check_dp_ratio(fam, eps, pairs)

    tail_fail = []
    for name, sampler in (("uniform", uniform_sampler), ("exponential", exponential_sampler)):
        for p in (5, 10, 20):
            rep = lemma_su_tail_check(sampler, p, 10**5, SeededRng(p))
            if rep.degenerate or not rep.empirical_prob <= rep.budget + 3 * rep.std_error:
                tail_fail.append((name, p, rep.empirical_prob))
    secs = time.perf_counter() - start
    ok = max_fail == 0 and dp_fail == 0 and not tail_fail and secs < 120
    criterion(7, ok, f"max-vs-expectation fails {max_fail}/1000, DP ratio fails {dp_fail}, tail fails {tail_fail}",
              secs)
    assert ok


def test_criterion_8_application_certificates(criterion):
    start = time.perf_counter()
    k, p, m, delta, n_seeds = 100, 10, 100, 0.01, 10**4
    t = multiplicity_bound(k, p, m, delta)
    root = SeededRng(8)
    mults = np.array([max_multiplicity(draw_subsamples(k, p, m, root.child(s)), m) for s in range(n_seeds)])
    frac = float(np.mean(mults <= t))
    need = 1 - delta - 3 * math.sqrt(delta * (1 - delta) / n_seeds)

    sco_fail, cert = 0, None
    for s in range(500):
        gen = SeededRng(800 + s).generator()
        X, y = unit_ball_points(gen, 100, 3), gen.random(100)
        est = SCOMixtureHypothesisSet(K=3, random_state=s).fit(X, y)
        cert = est.diameter_certificate_
        sco_fail += est.measured_diameter(X, y, ABSOLUTE_LOSS) > cert + 1e-12

    def sampler(g, size):
        return g.standard_normal((size, 3)) * np.array([2.0, 1.0, 0.5])

    exponent = pca_stability_curve(sampler, [50, 100, 200, 400], 1, 100, SeededRng(9))["exponent"]
    secs = time.perf_counter() - start
    ok = (abs(t - 23.572) < 1e-3 and frac >= need and sco_fail == 0 and abs(cert - 0.1) < 1e-12
          and -1.3 <= exponent <= -0.7 and secs < 300)
    criterion(8, ok, f"multiplicity pass {frac:.4f} (need {need:.4f}, t={t:.3f}); SCO {sco_fail}/500 over "
                     f"certificate {cert:.3f}; PCA exponent {exponent:.3f}", secs)
    assert ok


def test_criterion_9_spot_values(criterion):
    start = time.perf_counter()
    rad = theorem2_bound(BoundInputs(m=100, delta=math.exp(-2), beta=0.0, rad=0.1)).branch_values["rademacher"]
    cv = theorem2_bound(BoundInputs(m=100, delta=6 / math.e, beta=0.0, chi=0.0)).branch_values["cv_stability"]
    uni = theorem2_bound(BoundInputs(m=100, delta=4 / math.e, beta=0.0, delta_max=0.0)).branch_values[
        "uniform_stability"]
    P = np.array([0.5, 0.5])
    pb = pac_bayes_bound(P, P, 0.0, 100, 1.0)
    conc = concentration_bound(0.0, 50, 2 / math.e)
    secs = time.perf_counter() - start
    checks = [(rad, 0.3), (cv, 0.4), (uni, 0.2), (pb, (4 + math.exp(-0.5)) / 10), (conc, 0.1)]
    ok = all(abs(a - b) <= 1e-9 for a, b in checks) and abs(pb - 0.46065) < 1e-5 and secs < 1
    criterion(9, ok, "values " + ", ".join(f"{a:.12f}" for a, _ in checks), secs)
    assert ok


def test_criterion_10_cli_determinism(criterion, tmp_path):
    start = time.perf_counter()
    bundled = resources.files("hssbench").joinpath("configs", "bagging.json")
    small = tmp_path / "small.json"
    small.write_text(json.dumps({
        "seed": 3, "distribution": {"atoms": [{"x": [0.0], "y": 0.0}, {"x": [1.0], "y": 1.0}]},
        "family": {"name": "distillation", "params": {"gamma": 0.2, "n_grid": 11}}, "m": 8, "n": 8,
        "delta": 0.1, "n_trials": 50,
        "estimators": [{"kind": "dd_rademacher", "n_draws": 5000}, {"kind": "transductive", "n_draws": 5000},
                       {"kind": "stability", "n_samples": 2, "n_perturbations": 8}],
        "bound": {"kind": "theorem1"}}))
    mismatched = []
    for label, cfg in (("bagging", str(bundled)), ("small", str(small))):
        a, b = tmp_path / f"{label}-1", tmp_path / f"{label}-n"
        assert main(["run", cfg, "--out", str(a), "--threads", "1"]) == EXIT_OK
        assert main(["run", cfg, "--out", str(b), "--threads", "4"]) == EXIT_OK
        for f in sorted(a.iterdir()):
            if f.read_bytes() != (b / f.name).read_bytes():
                mismatched.append(f"{label}/{f.name}")
    secs = time.perf_counter() - start
    ok = not mismatched
    criterion(10, ok, f"1 vs 4 threads, mismatched files: {mismatched or 'none'}", secs)
    assert ok
