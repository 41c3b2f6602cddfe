"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import math
import os
import sys
import tempfile
import time

import numpy as np
from scipy.integrate import quad

sys.path.insert(0, os.path.dirname(__file__))

from oracles import euclidean_weights_kkt, midpoint_t_int  # noqa: E402
from taildep.coeffs import StructureSample, chi_from_stdf, gpd_fit_excesses, hill_eta, structure_variable  # noqa: E402
from taildep.hyptest import eta_test, indep_statistics, indep_test, simulate_limit_quantiles  # noqa: E402
from taildep.ingest import SampleMatrix, rank_transform  # noqa: E402
from taildep.polar import OrderStatistic, select_exceedances, to_polar  # noqa: E402
from taildep.report import RunConfig, run_pairwise_report  # noqa: E402
from taildep.simulate import Gumbel, Independence, gumbel_spectral_density, sample  # noqa: E402
from taildep.spectral import estimate_spectral, euclidean_spectral, mel_spectral  # noqa: E402
from taildep.stdf import LogisticModel, cf_stdf, empirical_stdf  # noqa: E402

RESULTS = {}


def _record(num, ok, detail, started):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.1f} s)"
    RESULTS[num] = line
    print(line)
    return ok


def _random_feasible_angles(rng, n):
    w = rng.uniform(size=n)
    if not w.min() < 0.5 < w.max():
        w[0], w[-1] = rng.uniform(0, 0.5), rng.uniform(0.5, 1)
    return w


def test_criterion_1_critical_values():
    t0 = time.perf_counter()
    q_int, q_sup = simulate_limit_quantiles(0.05, 200_000, 2000, seed=0, workers=os.cpu_count() or 1)
    ok = abs(q_int - 6.237) <= 0.15 and abs(q_sup - 4.956) <= 0.10
    assert _record(1, ok, f"Q_TI={q_int:.4f} target 6.237+-0.15, Q_TS={q_sup:.4f} target 4.956+-0.10", t0)


def test_criterion_2_moment_constraints():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = dict(mel_sum=0.0, mel_mean=0.0, euc_sum=0.0, euc_mean=0.0)
    for _ in range(1000):
        w = _random_feasible_angles(rng, int(rng.integers(3, 201)))
        for name, est in (("mel", mel_spectral(w)), ("euc", euclidean_spectral(w))):
            worst[f"{name}_sum"] = max(worst[f"{name}_sum"], abs(est.weights.sum() - 1.0))
            worst[f"{name}_mean"] = max(worst[f"{name}_mean"], abs(est.weights @ w - 0.5))
    ok = (worst["mel_sum"] <= 1e-12 and worst["mel_mean"] <= 1e-10
          and worst["euc_sum"] <= 1e-12 and worst["euc_mean"] <= 1e-12)
    detail = ", ".join(f"max {k}={v:.2e}" for k, v in worst.items())
    assert _record(2, ok, detail, t0)


def test_criterion_3_euclidean_qp_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    dev = 0.0
    for _ in range(200):
        w = _random_feasible_angles(rng, int(rng.integers(3, 61)))
        dev = max(dev, float(np.max(np.abs(euclidean_spectral(w).weights - euclidean_weights_kkt(w)))))
    assert _record(3, dev <= 1e-9, f"max abs deviation {dev:.2e} (limit 1e-9)", t0)


def test_criterion_4_logistic_self_consistency():
    t0 = time.perf_counter()
    thetas = (1.0, 1.25, 2.0, 2.5, 10.0)
    chi_err = max(abs(chi_from_stdf(LogisticModel(t).stdf()) - (2 - 2 ** (1 / t))) for t in thetas)
    mass_err = mean_err = 0.0
    for t in thetas:
        if t == 1.0:
            # no density at theta = 1: the spectral measure is mass 1/2 at each of 0 and 1
            atoms = euclidean_spectral([0.0, 1.0])
            mass, mean = atoms.weights.sum(), atoms.weights @ atoms.angles
            x = np.random.default_rng(4).uniform(0, 3, (50, 2))
            chi_err = max(chi_err, float(np.max(np.abs(cf_stdf(atoms)(x) - LogisticModel(1.0).stdf()(x)))))
        else:
            f = lambda w: gumbel_spectral_density(t, w)
            mass = 2 * quad(f, 0, 0.5, epsabs=1e-13, limit=400)[0]
            mean = quad(lambda w: w * f(w), 0, 1, epsabs=1e-13, limit=400, points=[0.5])[0]
        mass_err, mean_err = max(mass_err, abs(mass - 1)), max(mean_err, abs(mean - 0.5))
    ok = chi_err <= 1e-12 and mass_err <= 1e-8 and mean_err <= 1e-8
    assert _record(4, ok, f"chi err {chi_err:.1e}, mass err {mass_err:.1e}, mean err {mean_err:.1e}", t0)


def test_criterion_5_pipeline_consistency():
    t0 = time.perf_counter()
    n, k = 20_000, 1000
    vals = {"emp": [], "cf-euc": [], "cf-mel": [], "cf-emp": [], "theta1": []}
    for rep in range(50):
        p = rank_transform(sample(Gumbel(2.5), n, 500 + rep).values)
        vals["emp"].append(empirical_stdf(p, k)(1.0, 1.0))
        w = select_exceedances(to_polar(p), OrderStatistic(k)).exceedance_angles()
        for kind in ("euc", "mel", "emp"):
            vals[f"cf-{kind}"].append(cf_stdf(estimate_spectral(w, kind))(1.0, 1.0))
        q = rank_transform(sample(Gumbel(1.0), n, 500 + rep).values)
        vals["theta1"].append(empirical_stdf(q, k)(1.0, 1.0))
    med = {key: float(np.median(v)) for key, v in vals.items()}
    target = 2**0.4
    ok = all(abs(med[key] - target) <= 0.08 for key in ("emp", "cf-euc", "cf-mel", "cf-emp"))
    ok = ok and abs(med["theta1"] - 2.0) <= 0.1
    detail = ", ".join(f"{key} {v:.4f}" for key, v in med.items()) + f"; target {target:.4f}+-0.08 and 2+-0.1"
    assert _record(5, ok, detail, t0)


def test_criterion_6_size_and_power():
    t0 = time.perf_counter()
    n, k_ind, reps = 2000, 50, 500
    size = np.zeros(2)
    power = np.zeros(2)
    for rep in range(reps):
        r0 = indep_test(rank_transform(sample(Independence(), n, 10_000 + rep).values), k_ind)
        r1 = indep_test(rank_transform(sample(Gumbel(2.5), n, 20_000 + rep).values), k_ind)
        size += [r0.reject_int, r0.reject_sup]
        power += [r1.reject_int, r1.reject_sup]
    size /= reps
    power /= reps
    k_eta, reps_eta = 100, 200
    retain = np.mean([not eta_test(rank_transform(sample(Gumbel(2.5), n, 30_000 + r).values), k_eta).reject
                      for r in range(reps_eta)])
    reject = np.mean([eta_test(rank_transform(sample(Independence(), n, 40_000 + r).values), k_eta).reject
                      for r in range(reps_eta)])
    parts = {
        "a size": bool(np.all(size <= 0.07)),
        "a power": bool(np.all(power >= 0.9)),
        "b retain": bool(retain >= 0.9),
        "b power": bool(reject >= 0.8),
    }
    detail = (
        f"indep test n={n} k={k_ind}: size T_I {size[0]:.3f} T_S {size[1]:.3f} (<=0.07), "
        f"Gumbel power T_I {power[0]:.3f} T_S {power[1]:.3f} (>=0.9); "
        f"eta test n={n} k={k_eta}: Gumbel retention {retain:.3f} (>=0.9), "
        f"independence rejection {reject:.3f} (>=0.8); failing parts: "
        + (", ".join(key for key, v in parts.items() if not v) or "none")
    )
    assert _record(6, all(parts.values()), detail, t0)


def test_criterion_7_rank_invariance():
    t0 = time.perf_counter()
    x = sample(Gumbel(2.5), 1000, 7).values
    variants = {"data": x, "exp": np.exp(x), "affine": 3.5 * x - 2.0}
    contents = {}
    with tempfile.TemporaryDirectory() as tmp:
        for name, values in variants.items():
            cfg = RunConfig(out=tmp, k_grid=(25, 50, 100), critical="paper")
            run_pairwise_report(cfg, data=SampleMatrix(values, ["a", "b"]))
            contents[name] = {f: open(os.path.join(tmp, f), "rb").read() for f in sorted(os.listdir(tmp))}
    ok = contents["data"] == contents["exp"] == contents["affine"] and len(contents["data"]) == 10
    assert _record(7, ok, f"{len(contents['data'])} report files compared byte for byte", t0)


def test_criterion_8_hill_gpd_oracle():
    t0 = time.perf_counter()
    n, k, reps = 10_000, 500, 200
    cover = {"pareto hill": 0, "pareto mle": 0, "indep hill": 0, "indep mle": 0}
    for rep in range(reps):
        t = StructureSample.from_values(np.random.default_rng(80_000 + rep).pareto(1.0, n) + 1.0)
        s = structure_variable(rank_transform(sample(Independence(), n, 90_000 + rep).values))
        cover["pareto hill"] += abs(hill_eta(t, k) - 1.0) <= 0.15
        cover["pareto mle"] += abs(gpd_fit_excesses(t, k).shape - 1.0) <= 0.15
        cover["indep hill"] += abs(hill_eta(s, k) - 0.5) <= 0.1
        cover["indep mle"] += abs(gpd_fit_excesses(s, k).shape - 0.5) <= 0.1
    rates = {key: v / reps for key, v in cover.items()}
    ok = all(r >= 0.95 for r in rates.values())
    detail = ", ".join(f"{key} {r:.3f}" for key, r in rates.items()) + " (each >=0.95)"
    assert _record(8, ok, detail, t0)


def test_criterion_9_exact_vs_bruteforce():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        rho = rng.uniform(-0.9, 0.9)
        z = rng.normal(size=(200, 2))
        z[:, 1] = rho * z[:, 0] + math.sqrt(1 - rho**2) * z[:, 1]
        p = rank_transform(z)
        exact = indep_statistics(p, 20)[0]
        brute = midpoint_t_int(p, 20)
        worst = max(worst, abs(exact - brute) / max(abs(brute), 1e-300))
    assert _record(9, worst <= 0.02, f"max relative gap {worst:.2e} (limit 2%)", t0)


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
