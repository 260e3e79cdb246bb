"""Experiment drivers behind the ``ssc`` subcommands.

Each ``cmd_*`` function takes a validated config, writes its CSV tables
under ``cfg.out`` and returns ``{name: path}``. All randomness is derived
from ``(master_seed, grid indices, trial)`` so reruns are bit-identical.
"""

import json
import os
import sys

import numpy as np

from .. import __version__
from ..clustering import (
    build_similarity,
    ccr,
    compute_metrics,
    eps_from_snr,
    spectral_cluster,
)
from ..extremal import (
    extremal_perturbations,
    f_extremes,
    grid_extremes,
    make_pair,
    mc_validate,
    stationarity_residual,
)
from ..geometry import pca_subspace
from ..greedy import GreedyConfig, coefficient_matrix, regress_all
from ..guarantees import certify_run, cluster_geometry
from ..synth import SynthSpec, generate
from .io import ResultTable, load_dataset, save_dataset

# phi grid on which the attained-bound check runs when phi is sampled per trial
ATTAIN_PHIS = tuple(round(0.05 * k, 2) for k in range(1, 31))


def derived_seed(master_seed, *indices):
    """Integer seed for one cell of an experiment grid."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _meta(command, cfg):
    return {
        "command": command,
        "config_hash": cfg.digest(),
        "seed": str(cfg.master_seed),
        "version": __version__,
        "config": json.dumps(cfg.to_dict(), sort_keys=True),
    }


def _write(tables, cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return {name: t.write(os.path.join(cfg.out, f"{name}.csv")) for name, t in tables.items()}


def _circ_dist(a, b):
    d = abs(a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def cmd_lemma_validate(cfg):
    """Monte Carlo containment of noisy inner products between the bounds.

    Writes the raw samples, a per-cell violation summary and a table of the
    inner products reached by the extremal noise pair.
    """
    meta = _meta("lemma-validate", cfg)
    samples = ResultTable(["phi", "epsilon", "trial", "inner_product", "bound_max", "bound_min"], meta=meta)
    summary = ResultTable(["phi", "epsilon", "trials", "violations", "empirical_max", "bound_max",
                           "empirical_min", "bound_min"], meta=meta)
    attain = ResultTable(["phi", "epsilon", "attained_max", "bound_max", "gap_max",
                          "attained_min", "bound_min", "gap_min"], meta=meta)
    phis = [None] if cfg.phis is None else list(cfg.phis)
    for ie, eps in enumerate(cfg.epsilons):
        for ip, phi in enumerate(phis):
            rep = mc_validate(phi, eps, cfg.trials, derived_seed(cfg.master_seed, ie, ip), n=cfg.n)
            for t in range(cfg.trials):
                samples.add(float(rep.phi[t]), float(eps), t, float(rep.samples[t]),
                            float(rep.upper[t]), float(rep.lower[t]))
            summary.add("uniform" if phi is None else float(phi), float(eps), cfg.trials, rep.violations,
                        rep.empirical_max, rep.bound_max, rep.empirical_min, rep.bound_min)
        for phi in (ATTAIN_PHIS if cfg.phis is None else cfg.phis):
            res = f_extremes(phi, eps)
            x1, x2 = make_pair(phi, cfg.n)
            c = float(np.cos(phi))
            got = []
            for theta in (res.theta_max, res.theta_min):
                e1, e2 = extremal_perturbations(eps, theta, cfg.n)
                got.append(float((x1 + e1) @ (x2 + e2)))
            bmax, bmin = c + res.f_max, c + res.f_min
            attain.add(float(phi), float(eps), got[0], bmax, abs(got[0] - bmax), got[1], bmin, abs(got[1] - bmin))
    return _write({"lemma_validate": samples, "lemma_validate_summary": summary,
                   "lemma_validate_attain": attain}, cfg)


def cmd_extremal_solve(cfg):
    """Compare the stationary-point solver against the dense-grid oracle."""
    table = ResultTable(["phi", "epsilon", "method", "f_max", "f_max_oracle", "f_max_err",
                         "f_min", "f_min_oracle", "f_min_err", "theta_max", "theta_max_oracle",
                         "theta_max_dist", "theta_min", "theta_min_oracle", "theta_min_dist",
                         "n_stationary", "max_stationarity_residual"], meta=_meta("extremal-solve", cfg))
    for phi in cfg.phis:
        for eps in cfg.epsilons:
            r = f_extremes(phi, eps)
            tmax, fmax, tmin, fmin = grid_extremes(phi, eps, n_grid=cfg.n_grid)
            resid = float(np.abs(stationarity_residual(phi, eps, np.asarray(r.stationary))).max())
            table.add(float(phi), float(eps), r.method, r.f_max, fmax, abs(r.f_max - fmax),
                      r.f_min, fmin, abs(r.f_min - fmin), r.theta_max, tmax, _circ_dist(r.theta_max, tmax),
                      r.theta_min, tmin, _circ_dist(r.theta_min, tmin), len(r.stationary), resid)
    return _write({"extremal_solve": table}, cfg)


def _greedy_cfg(cfg, algorithm, keep=True):
    return GreedyConfig(m_max=cfg.iterations, tau_abs=cfg.tau_abs, tau_rel=cfg.tau_rel,
                        algorithm=algorithm, keep_residuals=keep)


def _pad(x, m):
    out = np.full(m, np.nan)
    out[: min(len(x), m)] = x[:m]
    return out


def cmd_trace(cfg):
    """Per-iteration residual, AoD and correct-selection curves for MP and OMP.

    Trial ``t`` draws its data from the same seed in every (rho, epsilon)
    cell, so the algorithms and cells are compared on common random numbers.
    Each trial's curve is the mean over points still iterating; the table
    reports the mean of those curves over trials. A second table lists the
    clustering rate of every trial.
    """
    meta = _meta("trace", cfg)
    m_max = cfg.iterations
    trace = ResultTable(["algorithm", "rho", "epsilon", "m", "r_par_mean", "r_perp_mean",
                         "aod_mean", "p_correct", "n_active"], meta=meta)
    rates = ResultTable(["algorithm", "rho", "epsilon", "trial", "ccr"], meta=meta)
    algs = [a.upper() for a in cfg.algorithms]
    for rho in cfg.rhos:
        for eps in cfg.epsilons:
            acc = {a: {"par": [], "perp": [], "aod": [], "p": [], "n": np.zeros(m_max, dtype=int)} for a in algs}
            for t in range(cfg.trials):
                seed = derived_seed(cfg.master_seed, t)
                ds, models = generate(SynthSpec(n=cfg.n, d=cfg.d, L=cfg.L, rho=rho, N_l=cfg.N_l,
                                                epsilon=eps, master_seed=seed))
                for a in algs:
                    traces = regress_all(ds.points, _greedy_cfg(cfg, a))
                    ms = compute_metrics(traces, models, ds.labels)
                    slot = acc[a]
                    slot["par"].append(_pad(ms.r_par_mean, m_max))
                    slot["perp"].append(_pad(ms.r_perp_mean, m_max))
                    slot["aod"].append(_pad(ms.aod_mean, m_max))
                    slot["p"].append(_pad(ms.p_correct, m_max))
                    slot["n"][: len(ms.n_active)] += ms.n_active[:m_max]
                    W = build_similarity(coefficient_matrix(traces))
                    pred = spectral_cluster(W, cfg.L, seed=seed)
                    rates.add(a, float(rho), float(eps), t, ccr(pred, ds.labels))
            for a in algs:
                slot = acc[a]
                cols = [_nanmean_cols(np.vstack(slot[k])) for k in ("par", "perp", "aod", "p")]
                for m in range(m_max):
                    trace.add(a, float(rho), float(eps), m + 1, cols[0][m], cols[1][m], cols[2][m],
                              cols[3][m], int(slot["n"][m]))
    return _write({"trace": trace, "trace_ccr": rates}, cfg)


def _nanmean_cols(A):
    out = np.full(A.shape[1], np.nan)
    for j in range(A.shape[1]):
        v = A[:, j][np.isfinite(A[:, j])]
        if v.size:
            out[j] = v.mean()
    return out


def cmd_ccr_sweep(cfg):
    """Clustering rate of the full pipeline over an SNR grid, SNR = 10 log10(1/eps^2)."""
    meta = _meta("ccr-sweep", cfg)
    per_trial = ResultTable(["algorithm", "rho", "snr_db", "epsilon", "trial", "ccr"], meta=meta)
    summary = ResultTable(["algorithm", "rho", "snr_db", "epsilon", "trials", "ccr_mean", "ccr_stderr"], meta=meta)
    algs = [a.upper() for a in cfg.algorithms]
    for rho in cfg.rhos:
        for snr in cfg.snrs:
            eps = float(eps_from_snr(snr))
            got = {a: [] for a in algs}
            for t in range(cfg.trials):
                seed = derived_seed(cfg.master_seed, t)
                ds, _ = generate(SynthSpec(n=cfg.n, d=cfg.d, L=cfg.L, rho=rho, N_l=cfg.N_l,
                                           epsilon=eps, master_seed=seed))
                for a in algs:
                    traces = regress_all(ds.points, _greedy_cfg(cfg, a, keep=False))
                    pred = spectral_cluster(build_similarity(coefficient_matrix(traces)), cfg.L, seed=seed)
                    got[a].append(ccr(pred, ds.labels))
                    per_trial.add(a, float(rho), float(snr), eps, t, got[a][-1])
            for a in algs:
                v = np.asarray(got[a])
                se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
                summary.add(a, float(rho), float(snr), eps, v.size, float(v.mean()), se)
    return _write({"ccr_sweep": summary, "ccr_sweep_trials": per_trial}, cfg)


def cmd_certify(cfg):
    """Evaluate the selection certificates on one synthetic ensemble.

    The summary counts ``unsound`` events: selections vouched for by the
    certificate chain that nevertheless left the query's cluster. A sound
    implementation reports zero.
    """
    meta = _meta("certify", cfg)
    seed = derived_seed(cfg.master_seed, 0)
    ds, models = generate(SynthSpec(n=cfg.n, d=cfg.d, L=cfg.L, rho=cfg.rho, N_l=cfg.N_l,
                                    epsilon=cfg.epsilon, master_seed=seed))
    geo = cluster_geometry(ds, models, n_directions=cfg.n_directions)
    geo_t = ResultTable(["label", "mu_c", "r_k", "theta_k"], meta=meta)
    for k, g in geo.items():
        geo_t.add(int(k), g.mu_c, g.r_k, g.theta_k)
    points = ResultTable(["algorithm", "convention", "index", "label", "first_holds", "first_margin",
                          "n_selected", "certified", "sdp", "unsound"], meta=meta)
    steps = ResultTable(["algorithm", "index", "m", "lhs", "rhs", "margin", "holds", "aod"], meta=meta)
    summary = ResultTable(["algorithm", "convention", "points", "first_holds", "certified_selections",
                           "total_selections", "sdp_points", "unsound_events"], meta=meta)
    for a in (x.upper() for x in cfg.algorithms):
        reports = certify_run(ds, models, _greedy_cfg(cfg, a), convention=cfg.convention, geometry=geo)
        for r in reports:
            points.add(a, r.convention, r.query_index, r.label, r.first_holds, r.first_margin,
                       len(r.selections), r.certified, r.sdp, r.unsound)
            for e in r.steps:
                steps.add(a, r.query_index, e.m, e.lhs, e.rhs, e.rhs - e.lhs, e.holds, e.aod)
        summary.add(a, cfg.convention, len(reports), sum(r.first_holds for r in reports),
                    sum(r.certified for r in reports), sum(len(r.selections) for r in reports),
                    sum(r.sdp for r in reports), sum(r.unsound for r in reports))
    return _write({"certify_geometry": geo_t, "certify_points": points, "certify_steps": steps,
                   "certify_summary": summary}, cfg)


def _notice(msg, meta):
    meta.setdefault("notice", [])
    meta["notice"].append(msg)
    print(f"notice: {msg}", file=sys.stderr)


def cmd_cluster(cfg):
    """Cluster an external dataset and, where ground truth allows, report CCR and AoD traces.

    AoD traces use the true bases when the sidecar provides them; otherwise
    ``pca_rank`` fits a per-cluster stand-in subspace from the labelled
    points. Certificates are never evaluated here.
    """
    ds, models = load_dataset(cfg.data)
    meta = _meta("cluster", cfg)
    notices = {}
    truth = ds.labels
    k = cfg.n_clusters if cfg.n_clusters is not None else (None if truth is None else int(np.unique(truth).size))
    if k is None:
        raise ValueError("n_clusters is required when the data carries no labels")
    need_res = truth is not None and (models is not None or cfg.pca_rank is not None)
    gcfg = GreedyConfig(m_max=cfg.m_max, tau_abs=cfg.tau_abs, tau_rel=cfg.tau_rel,
                        algorithm=cfg.algorithm, keep_residuals=need_res)
    traces = regress_all(ds.points, gcfg)
    pred = spectral_cluster(build_similarity(coefficient_matrix(traces)), k, seed=derived_seed(cfg.master_seed, 0))

    labels_t = ResultTable(["index", "predicted"] + (["label"] if truth is not None else []))
    for i in range(ds.n_points):
        labels_t.add(i, int(pred[i]), *([int(truth[i])] if truth is not None else []))
    rate = ccr(pred, truth) if truth is not None else float("nan")
    summary = ResultTable(["algorithm", "n_points", "n_clusters", "ccr"])
    summary.add(gcfg.algorithm, ds.n_points, k, rate)
    tables = {"cluster_labels": labels_t, "cluster_summary": summary}

    if ds.clean_points is None:
        _notice("no clean points: certificate outputs disabled", notices)
    if truth is None:
        _notice("no labels: CCR and AoD traces disabled", notices)
    elif models is None and cfg.pca_rank is None:
        _notice("no subspace bases and no pca_rank: AoD traces disabled", notices)
    elif need_res:
        source = "bases"
        if models is None:
            source = f"pca-rank-{cfg.pca_rank}"
            models = [pca_subspace(ds.points[:, truth == c], cfg.pca_rank) for c in np.unique(truth)]
        ms = compute_metrics(traces, models, truth)
        tr = ResultTable(["source", "m", "r_par_mean", "r_perp_mean", "aod_mean", "p_correct", "n_active"])
        for m in range(len(ms.aod_mean)):
            tr.add(source, m + 1, ms.r_par_mean[m], ms.r_perp_mean[m], ms.aod_mean[m],
                   ms.p_correct[m], int(ms.n_active[m]))
        tables["cluster_trace"] = tr
    meta.update({k_: json.dumps(v) for k_, v in notices.items()})
    for t in tables.values():
        t.meta = meta
    return _write(tables, cfg)


def cmd_gen(cfg):
    """Write one synthetic ensemble in the dataset format."""
    spec = SynthSpec(n=cfg.n, d=cfg.d, L=cfg.L, rho=cfg.rho, N_l=cfg.N_l, epsilon=cfg.epsilon,
                     master_seed=cfg.master_seed)
    ds, models = generate(spec)
    return {"data": save_dataset(ds, cfg.out, models=models)}


COMMANDS = {
    "lemma-validate": cmd_lemma_validate,
    "extremal-solve": cmd_extremal_solve,
    "trace": cmd_trace,
    "ccr-sweep": cmd_ccr_sweep,
    "certify": cmd_certify,
    "cluster": cmd_cluster,
    "gen": cmd_gen,
}
