"""Scenario runners.

Each scenario has a ``prepare`` step (validation, resolved parameters,
shared objects such as a common hypothesis set) and a per-trial function.
Trial ``t`` draws all of its randomness from streams keyed by ``(seed, t)``,
so the output is independent of worker count and scheduling.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
import multiprocessing

import numpy as np

from .. import rng
from ..boost import BoostConfig, run_adaboost, run_margin_booster
from ..bounds import BoundInputs, all_bounds, phi_checks
from ..core import Labeling
from ..errors import InvariantViolation, ParameterError
from ..harddist import (
    adversary_classifier,
    adversary_flips,
    draw_sample,
    empirical_margin_error,
    make_hard_dist,
    psi_stats,
    sample_labeling_Lprime,
    sample_labeling_Lud,
    sample_sparse_labeling,
    sample_uniform_labeling,
)
from ..hypo import make_spec, sample_hypothesis_set
from . import resolvers
from .report import TrialReport

SCENARIOS = ("lemma1", "theorem1", "theorem2", "sampler-fidelity", "coupon")
WILSON_Z = 1.959963984540054
SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    u: int | None = None
    d: int | None = None
    m: int | None = None
    theta: float = 0.02
    tau: float = 0.0
    delta: float = 0.1
    c_exp: float = 1.0
    trials: int = 10
    seed: int = 0
    out_path: str | None = None
    n_nominal: float = 2.0
    m_ratio: float = 10.0
    learner_rounds: int | None = None
    labeling_mode: str = "uniform"
    beta: float = 0.2
    eps: float = 0.5
    bias_alpha: float = 0.1
    timing: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if not 0 <= self.seed <= SEED_MAX:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        resolvers.check_tau(self.tau)
        if not 0 < self.theta < 1 / 40:
            raise ParameterError(f"theta={self.theta} outside (0, 1/40)")
        if self.labeling_mode not in ("uniform", "sparsity-uniform"):
            raise ParameterError(f"unknown labeling mode {self.labeling_mode!r}")

    def echo(self):
        d = asdict(self)
        d.pop("out_path")
        d.pop("timing")
        return d


def _need(cfg, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise ParameterError(f"scenario {cfg.scenario} needs --{n.replace('_', '-')}")


def wilson_interval(failures, n, z=WILSON_Z):
    if n <= 0:
        raise ParameterError("need at least one trial")
    p = failures / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _bounds_row(row, theta, m, H_size, emp):
    b = all_bounds(BoundInputs(theta, m, H_size, emp))
    row.schapire, row.minmargin, row.kthmargin = b["schapire"], b["minmargin"], b["kthmargin"]


def _psi_row(row, ps):
    row.exact_risk, row.psi1, row.psi2, row.claim1_rhs = ps.exact_risk, ps.psi1, ps.psi2, ps.claim1_rhs


# lemma1 ---------------------------------------------------------------------

def prepare_lemma1(cfg):
    _need(cfg, "u", "d")
    spec = make_spec(cfg.u, cfg.d, cfg.theta, cfg.delta, cfg.c_exp)
    return {"spec": spec, "boost": BoostConfig.for_spec(spec)}


def trial_lemma1(cfg, ctx, t):
    spec = ctx["spec"]
    ell = sample_sparse_labeling(spec.u, spec.d, rng.stream(cfg.seed, *rng.trial_key(t, rng.LABELING)),
                                 cfg.labeling_mode)
    H = sample_hypothesis_set(spec, cfg.seed, *rng.trial_key(t, rng.HYPO))
    run = run_margin_booster(H, ell, ctx["boost"])
    row = TrialReport(t, cfg.seed, run.success, run.min_margin)
    if run.success and run.min_margin < spec.theta:
        raise InvariantViolation(f"trial {t}: min margin {run.min_margin} < theta")
    row.extras = {"negatives": int(ell.negatives().size), "failed_round": run.failed_round}
    return row


def summarize_lemma1(cfg, ctx, rows):
    spec = ctx["spec"]
    fails = sum(not r.success for r in rows)
    lo, hi = wilson_interval(fails, len(rows))
    return {"k": spec.k, "batch_size": spec.batch_size, "N": spec.N, "H_size": spec.set_size,
            "gamma": spec.gamma, "failure_fraction": fails / len(rows),
            "wilson95": [lo, hi], "within_delta": hi <= spec.delta,
            "theta_above_1_over_N": cfg.theta > 1 / spec.N}


def calibrate_c_exp(u, d, theta, delta, grid, trials, seed):
    """Lemma-1 failure rates over a grid of c_exp values.

    Returns ``(table, chosen)``: ``table[c] = (failure_fraction, lo, hi)`` and
    ``chosen`` is the smallest c whose Wilson upper bound is at most delta,
    or None when no grid value qualifies.
    """
    table = {}
    for c in grid:
        rows, summ = run_scenario(ScenarioConfig("lemma1", u=u, d=d, theta=theta, delta=delta,
                                                 c_exp=c, trials=trials, seed=seed), workers=1)
        table[c] = (summ["failure_fraction"], *summ["wilson95"])
    ok = [c for c in sorted(table) if table[c][2] <= delta]
    return table, (ok[0] if ok else None)


# theorem1 -------------------------------------------------------------------

def prepare_theorem1(cfg):
    _need(cfg, "m")
    flags = {}
    if cfg.u is None:
        u, d = resolvers.theorem1_sizes(cfg.theta, cfg.n_nominal)
        flags["sizing"] = "derived from nominal N"
    else:
        u = cfg.u
        d = cfg.d if cfg.d is not None else u // 2
        flags["sizing"] = "explicit u"
    hp = resolvers.resolve_theorem1_params(u, cfg.m, cfg.tau, cfg.m_ratio, d)
    phis = phi_checks(hp.beta, cfg.m, u, hp.bias_alpha)
    spec = make_spec(u, d, cfg.theta, min(0.5, 1 / cfg.n_nominal), cfg.c_exp)
    H = sample_hypothesis_set(spec, cfg.seed, *rng.shared_key(rng.SHARED_HYPO))
    flags["theta_above_1_over_N_nominal"] = cfg.theta > 1 / cfg.n_nominal
    flags["m_ratio"] = cfg.m_ratio
    return {"spec": spec, "H": H, "params": hp, "phi": phis, "flags": flags,
            "boost": BoostConfig.for_spec(spec),
            "rounds": cfg.learner_rounds or spec.k}


def majority_view(sample):
    """Sampled points with their majority label (ties go to +1)."""
    pos, neg = sample.label_counts()
    pts = np.flatnonzero(pos + neg)
    y = np.where(pos[pts] >= neg[pts], 1, -1).astype(np.int8)
    return pts, y


def trial_theorem1(cfg, ctx, t):
    hp, H, spec = ctx["params"], ctx["H"], ctx["spec"]
    ell = sample_uniform_labeling(hp.u, rng.stream(cfg.seed, *rng.trial_key(t, rng.LABELING)))
    dist = make_hard_dist(hp.u, hp.d, hp.bias_alpha, hp.beta, hp.eps, ell)
    S = draw_sample(dist, cfg.m, rng.stream(cfg.seed, *rng.trial_key(t, rng.SAMPLE)))

    pts, y = majority_view(S)
    learner = run_adaboost(H, y, ctx["rounds"], points=pts)
    scores = learner.classifier.scores(H)
    ps = psi_stats(dist, scores)
    emp = empirical_margin_error(scores, S, cfg.theta)

    ref = run_margin_booster(H, ell, ctx["boost"])
    row = TrialReport(t, cfg.seed, ref.success, ref.min_margin, emp)
    _psi_row(row, ps)
    _bounds_row(row, cfg.theta, cfg.m, H.size, emp)

    lnH = math.log(H.size) / (cfg.m * cfg.theta**2)
    scale = lnH + math.sqrt(cfg.tau * lnH)
    ref_emp = float("nan")
    if ref.success:
        ref_emp = empirical_margin_error(ref.classifier.scores(H), S, cfg.theta)
        if hp.beta == 0 and ref_emp != 0:
            raise InvariantViolation(f"trial {t}: reference classifier has margin errors on S with beta = 0")
    row.extras = {"abstains": ps.abstains, "learner_rounds": int(learner.chosen.size),
                  "learner_stopped_early": learner.stopped_early, "learner_degenerate": learner.degenerate,
                  "train_points": int(pts.size),
                  "reference_failed_round": ref.failed_round, "reference_emp_margin_err": ref_emp,
                  "excess_risk": ps.exact_risk - cfg.tau, "lower_scale": scale,
                  "excess_over_scale": (ps.exact_risk - cfg.tau) / scale}
    return row


def summarize_theorem1(cfg, ctx, rows):
    hp, spec = ctx["params"], ctx["spec"]
    ratios = [r.extras["excess_over_scale"] for r in rows]
    phis = ctx["phi"]
    return {"u": hp.u, "d": hp.d, "eps": hp.eps, "bias_alpha": hp.bias_alpha, "beta": hp.beta,
            "branch": hp.branch, "k": spec.k, "batch_size": spec.batch_size, "H_size": spec.set_size,
            "learner_rounds": ctx["rounds"], "phi": phis,
            "phi8_at_least_one_sixth": None if phis is None else phis["phi8"] >= 1 / 6,
            "excess_over_scale": _quantiles(ratios), "regime": ctx["flags"]}


# theorem2 -------------------------------------------------------------------

def prepare_theorem2(cfg):
    _need(cfg, "m")
    hp = resolvers.resolve_theorem2_params(cfg.theta, cfg.m, cfg.tau, cfg.d, cfg.n_nominal)
    if cfg.u is not None and cfg.u != hp.u:
        raise ParameterError(f"theorem2 fixes u = ceil(40 m / ln m) = {hp.u}; got --u {cfg.u}")
    # h_{l,S} has at most d planted negatives plus d flips
    spec = make_spec(hp.u, min(2 * hp.d, hp.u), cfg.theta, min(0.5, 1 / cfg.n_nominal), cfg.c_exp)
    H = sample_hypothesis_set(spec, cfg.seed, *rng.shared_key(rng.SHARED_HYPO))
    flags = {"d_source": "explicit" if cfg.d is not None else "nominal N",
             "sparsity_cap": resolvers.theorem2_sparsity_cap(cfg.m),
             "theta_above_1_over_N_nominal": cfg.theta > 1 / cfg.n_nominal}
    return {"spec": spec, "H": H, "params": hp, "flags": flags, "boost": BoostConfig.for_spec(spec)}


def trial_theorem2(cfg, ctx, t):
    hp, H = ctx["params"], ctx["H"]
    ell = sample_labeling_Lprime(hp.u, hp.d, rng.stream(cfg.seed, *rng.trial_key(t, rng.LABELING)))
    dist = make_hard_dist(hp.u, hp.d, hp.bias_alpha, hp.beta, hp.eps, ell)
    S = draw_sample(dist, cfg.m, rng.stream(cfg.seed, *rng.trial_key(t, rng.SAMPLE)))
    h = adversary_classifier(ell, S, hp.d)
    flips = adversary_flips(ell, S, hp.d)

    run = run_margin_booster(H, h.as_labeling(), ctx["boost"])
    if run.success:
        scores = run.classifier.scores(H)
        if np.min(h.values * scores) < cfg.theta:
            raise InvariantViolation(f"trial {t}: f_S margin against h below theta")
    else:
        # fall back to the sign table itself so the row still describes f_S's target
        scores = h.values.astype(np.float64)
    ps = psi_stats(dist, scores)
    emp = empirical_margin_error(scores, S, cfg.theta)
    if run.success and hp.beta == 0 and emp != 0:
        raise InvariantViolation(f"trial {t}: margin errors on S with beta = 0")

    tail_n = hp.u - hp.d - 1
    flipped_mass = (1 - hp.beta) * hp.eps * flips.size / tail_n
    if ps.exact_risk < flipped_mass - 1e-12:
        raise InvariantViolation(f"trial {t}: risk below flipped mass")
    unsampled = int(np.count_nonzero(S.counts[1:hp.u - hp.d] == 0))
    row = TrialReport(t, cfg.seed, run.success, run.min_margin, emp)
    _psi_row(row, ps)
    _bounds_row(row, cfg.theta, cfg.m, H.size, emp)
    scale = hp.d / hp.u + math.sqrt(cfg.tau * hp.d / cfg.m)
    row.extras = {"abstains": ps.abstains, "unsampled": unsampled, "flips": int(flips.size),
                  "flipped_mass": flipped_mass, "failed_round": run.failed_round,
                  "norm_u": (1 - hp.beta) * hp.eps * hp.d / (8 * hp.u),
                  "norm_tail": (1 - hp.beta) * hp.eps * hp.d / (8 * tail_n),
                  "excess_risk": ps.exact_risk - cfg.tau, "lower_scale": scale,
                  "excess_over_scale": (ps.exact_risk - cfg.tau) / scale}
    return row


def summarize_theorem2(cfg, ctx, rows):
    hp, spec = ctx["params"], ctx["spec"]
    full = sum(r.extras["flips"] == hp.d for r in rows)
    return {"u": hp.u, "d": hp.d, "eps": hp.eps, "bias_alpha": hp.bias_alpha, "beta": hp.beta,
            "branch": hp.branch, "k": spec.k, "batch_size": spec.batch_size, "H_size": spec.set_size,
            "booster_success_fraction": sum(r.success for r in rows) / len(rows),
            "full_flip_fraction": full / len(rows),
            "norm_u": (1 - hp.beta) * hp.eps * hp.d / (8 * hp.u),
            "norm_tail": (1 - hp.beta) * hp.eps * hp.d / (8 * (hp.u - hp.d - 1)),
            "excess_over_scale": _quantiles([r.extras["excess_over_scale"] for r in rows]),
            "regime": ctx["flags"]}


# sampler-fidelity -----------------------------------------------------------

def prepare_sampler(cfg):
    _need(cfg, "u", "d", "m")
    # validates the parameter combination once
    make_hard_dist(cfg.u, cfg.d, cfg.bias_alpha, cfg.beta, cfg.eps, Labeling.ones(cfg.u))
    return {}


def trial_sampler(cfg, ctx, t):
    ell = sample_labeling_Lud(cfg.u, cfg.d, rng.stream(cfg.seed, *rng.trial_key(t, rng.LABELING)),
                              cfg.labeling_mode)
    dist = make_hard_dist(cfg.u, cfg.d, cfg.bias_alpha, cfg.beta, cfg.eps, ell)
    S = draw_sample(dist, cfg.m, rng.stream(cfg.seed, *rng.trial_key(t, rng.SAMPLE)))
    freq = np.bincount(2 * S.points + (S.labels + 1) // 2, minlength=2 * cfg.u) / cfg.m
    dev = float(np.max(np.abs(freq - dist.masses().ravel())))
    row = TrialReport(t, cfg.seed, dev <= 5e-3)
    row.extras = {"max_abs_dev": dev}
    return row


def summarize_sampler(cfg, ctx, rows):
    return {"max_abs_dev": _quantiles([r.extras["max_abs_dev"] for r in rows]), "tolerance": 5e-3}


# coupon ---------------------------------------------------------------------

def prepare_coupon(cfg):
    _need(cfg, "m")
    hp = resolvers.resolve_theorem2_params(cfg.theta, cfg.m, cfg.tau, cfg.d, cfg.n_nominal)
    return {"params": hp}


def trial_coupon(cfg, ctx, t):
    hp = ctx["params"]
    ell = sample_labeling_Lprime(hp.u, hp.d, rng.stream(cfg.seed, *rng.trial_key(t, rng.LABELING)))
    dist = make_hard_dist(hp.u, hp.d, hp.bias_alpha, hp.beta, hp.eps, ell)
    S = draw_sample(dist, cfg.m, rng.stream(cfg.seed, *rng.trial_key(t, rng.SAMPLE)))
    unsampled = int(np.count_nonzero(S.counts[1:hp.u - hp.d] == 0))
    row = TrialReport(t, cfg.seed, unsampled >= hp.d)
    row.extras = {"unsampled": unsampled}
    return row


def summarize_coupon(cfg, ctx, rows):
    n = len(rows)
    frac = sum(r.success for r in rows) / n
    sigma = math.sqrt(0.25 / n)
    hp = ctx["params"]
    return {"u": hp.u, "d": hp.d, "eps": hp.eps, "fraction_at_least_d": frac,
            "binomial_sigma": sigma, "threshold": 0.5 - 3 * sigma, "passes": frac >= 0.5 - 3 * sigma,
            "unsampled": _quantiles([r.extras["unsampled"] for r in rows])}


# driver ---------------------------------------------------------------------

RUNNERS = {
    "lemma1": (prepare_lemma1, trial_lemma1, summarize_lemma1),
    "theorem1": (prepare_theorem1, trial_theorem1, summarize_theorem1),
    "theorem2": (prepare_theorem2, trial_theorem2, summarize_theorem2),
    "sampler-fidelity": (prepare_sampler, trial_sampler, summarize_sampler),
    "coupon": (prepare_coupon, trial_coupon, summarize_coupon),
}


def _quantiles(values):
    v = np.asarray(values, dtype=np.float64)
    v = v[~np.isnan(v)]
    if v.size == 0:
        return {"count": 0}
    q = np.quantile(v, [0.0, 0.1, 0.5, 0.9, 1.0])
    return {"count": int(v.size), "mean": math.fsum(v.tolist()) / v.size,
            "min": float(q[0]), "q10": float(q[1]), "median": float(q[2]),
            "q90": float(q[3]), "max": float(q[4])}


def _timed(cfg, ctx, trial, t):
    t0 = time.perf_counter()
    row = trial(cfg, ctx, t)
    if cfg.timing:
        row.runtime_ms = (time.perf_counter() - t0) * 1e3
    row.check()
    return row


# set before forking workers so they inherit the (possibly large) context
_WORKER = None


def _worker_trial(t):
    cfg, ctx, trial = _WORKER
    return _timed(cfg, ctx, trial, t)


def worker_count():
    raw = os.environ.get("MARGINLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"MARGINLAB_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ParameterError("MARGINLAB_THREADS must be at least 1")
    return n


def run_scenario(cfg, workers=None):
    """Run every trial and return ``(rows, scenario_summary)`` with rows in trial order."""
    global _WORKER
    prepare, trial, summarize = RUNNERS[cfg.scenario]
    ctx = prepare(cfg)
    workers = worker_count() if workers is None else workers
    if workers == 1 or cfg.trials == 1:
        rows = [_timed(cfg, ctx, trial, t) for t in range(cfg.trials)]
    else:
        _WORKER = (cfg, ctx, trial)
        try:
            with ProcessPoolExecutor(workers, mp_context=multiprocessing.get_context("fork")) as pool:
                rows = list(pool.map(_worker_trial, range(cfg.trials)))
        finally:
            _WORKER = None
    return rows, summarize(cfg, ctx, rows)
