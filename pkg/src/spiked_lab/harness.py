"""Declarative Monte-Carlo experiment runner with CSV output.

A JSON config describes one experiment; ``run_experiment`` expands it into
per-replicate tasks, executes them (optionally on a thread pool), and returns
RunRecords.  Seeds are derived from (master_seed, cell, replicate) so the
record set is independent of worker count and scheduling.

Paired design: within one (n, beta, replicate) cell every requested algorithm
sees the same sampled instance; the instance_hash column makes this checkable.

The raw-record CSV is byte-deterministic for a fixed config; wall-clock
timings are therefore reported only in the JSON summary, never in the CSV.
"""

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import estimators as est
from . import linalg, model, theory

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "AggregateRecord",
    "ALGORITHMS",
    "run_experiment",
    "aggregate",
    "write_records_csv",
    "read_records_csv",
    "write_aggregates_csv",
    "write_summary_json",
]

KINDS = ("comparison", "scaling_collapse", "side_info", "amp_vs_se")

ALGORITHMS = (
    "unfold",
    "rec_unfold",
    "psd",
    "power_random",
    "power_unfold",
    "power_rec_unfold",
    "power_psd",
    "amp",
)

RECORD_COLUMNS = [
    "experiment_id", "algorithm", "k", "n", "beta", "gamma", "lambda",
    "replicate", "seed", "t", "correlation", "loss", "iterations",
    "rayleigh", "se_predicted", "converged", "failed", "instance_hash",
]

AGGREGATE_COLUMNS = [
    "experiment_id", "algorithm", "k", "n", "beta", "gamma", "lambda", "t",
    "mean_correlation", "stderr", "n_reps", "beta_over_n14", "beta_over_n12",
]


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    k: int
    n_list: list
    beta: object  # explicit list or {"min","max","steps","scale"}
    algorithms: list = field(default_factory=lambda: ["rec_unfold"])
    replicates: int = 50
    master_seed: int = 0
    gamma: float | None = None
    lambda_list: list | None = None
    max_iter: int = 100
    tol: float = 1e-8
    restarts: int = 30
    workers: int = 1
    output: str | None = None
    experiment_id: str = "exp"

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.n_list or any(n < 2 for n in self.n_list):
            raise ValueError("n_list must be nonempty with all n >= 2")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms: {bad}")
        if any(b <= 0 for b in self.beta_values()):
            raise ValueError("all beta values must be > 0")
        if self.kind == "side_info":
            if self.k != 3:
                raise ValueError("side_info experiments require k=3")
            if not self.lambda_list:
                raise ValueError("side_info experiments require lambda_list")
        if self.kind == "amp_vs_se" and self.gamma is None:
            raise ValueError("amp_vs_se experiments require gamma")

    def beta_values(self, n=None):
        spec = self.beta
        if isinstance(spec, dict):
            unknown = set(spec) - {"min", "max", "steps", "scale"}
            if unknown:
                raise ValueError(f"unknown beta spec fields: {sorted(unknown)}")
            lo, hi, steps = spec["min"], spec["max"], int(spec["steps"])
            scale = spec.get("scale", "linear")
            if scale == "linear":
                vals = np.linspace(lo, hi, steps)
            elif scale == "geometric":
                vals = np.geomspace(lo, hi, steps)
            else:
                raise ValueError(f"unknown beta scale {scale!r}")
            vals = [float(b) for b in vals]
        else:
            vals = [float(b) for b in spec]
        if n is not None and self.kind == "scaling_collapse":
            # beta values are scaled abscissas beta/n^(1/4)
            vals = [b * n**0.25 for b in vals]
        return vals


@dataclass
class RunRecord:
    experiment_id: str
    algorithm: str
    k: int
    n: int
    beta: float
    gamma: float | None
    lam: float | None
    replicate: int
    seed: int
    correlation: float | None
    loss: float | None
    iterations: int
    rayleigh: float | None
    converged: bool
    failed: bool
    instance_hash: str
    t: int | None = None
    se_predicted: float | None = None
    wall_ms: int = 0


@dataclass(frozen=True)
class AggregateRecord:
    experiment_id: str
    algorithm: str
    k: int
    n: int
    beta: float
    gamma: float | None
    lam: float | None
    t: int | None
    mean_correlation: float
    stderr: float
    n_reps: int
    beta_over_n14: float
    beta_over_n12: float


def _instance_hash(X):
    h = hashlib.sha256(np.ascontiguousarray(X).tobytes())
    return h.hexdigest()[:16]


def _run_algorithm(algo, inst, cfg, rng, y=None):
    X, v0 = inst.X, inst.v0
    sym = inst.noise_kind == "symmetric" and inst.k == 3
    kw = dict(max_iter=cfg.max_iter, tol=cfg.tol, v0=v0, symmetric=sym)
    if algo == "unfold":
        if inst.k != 3:
            raise ValueError("algorithm 'unfold' yields an n-vector only for k=3")
        w, u, tri = est.unfold_estimate(X, rng=rng)
        return est._finish(X, u, tri.iters, tri.converged, v0=v0)
    if algo == "rec_unfold":
        return est.recursive_unfold(X, v0=v0, rng=rng)
    if algo == "psd":
        return est.psd_constrained_pca(X, max_iter=cfg.max_iter, tol=cfg.tol,
                                       rng=rng, v0=v0)
    if algo == "power_random":
        v_init = rng.standard_normal(inst.n)
        return est.power_iteration(X, v_init, **kw)
    if algo in ("power_unfold", "power_rec_unfold", "power_psd"):
        initializer = algo.removeprefix("power_")
        return est.warm_start(X, initializer=initializer, iterator="power",
                              max_iter=cfg.max_iter, tol=cfg.tol, rng=rng, v0=v0)
    if algo == "amp":
        if y is None:
            y = rng.standard_normal(inst.n)
        return est.amp(X, y, **kw)
    raise ValueError(f"unknown algorithm {algo!r}")


def _comparison_task(cfg, cell_idx, n, beta, rep):
    seed = model.derive_seed(cfg.master_seed, cell_idx, rep)
    rng = model.derive_rng(cfg.master_seed, cell_idx, rep)
    inst = model.sample_spiked(cfg.k, n, beta, rng=rng, seed=seed)
    ih = _instance_hash(inst.X)
    y = None
    if cfg.gamma is not None:
        y = model.sample_side_info(inst.v0, cfg.gamma, rng).y
    records = []
    for algo in cfg.algorithms:
        t0 = time.perf_counter()
        try:
            res = _run_algorithm(algo, inst, cfg, rng, y=y)
            rec = RunRecord(
                experiment_id=cfg.experiment_id, algorithm=algo, k=cfg.k, n=n,
                beta=beta, gamma=cfg.gamma, lam=None, replicate=rep, seed=seed,
                correlation=res.correlation, loss=res.loss,
                iterations=res.iterations, rayleigh=res.rayleigh,
                converged=res.converged, failed=False, instance_hash=ih,
            )
        except Exception:
            rec = RunRecord(
                experiment_id=cfg.experiment_id, algorithm=algo, k=cfg.k, n=n,
                beta=beta, gamma=cfg.gamma, lam=None, replicate=rep, seed=seed,
                correlation=None, loss=None, iterations=0, rayleigh=None,
                converged=False, failed=True, instance_hash=ih,
            )
        rec.wall_ms = int(round((time.perf_counter() - t0) * 1000))
        records.append(rec)
    return records


def _side_info_task(cfg, cell_idx, n, beta, lam, rep):
    seed = model.derive_seed(cfg.master_seed, cell_idx, rep)
    rng = model.derive_rng(cfg.master_seed, cell_idx, rep)
    inst = model.sample_spiked(cfg.k, n, beta, rng=rng, seed=seed)
    ih = _instance_hash(inst.X)
    obs = model.sample_matrix_observation(inst.v0, lam, rng)
    vals, vecs = np.linalg.eigh(obs.M)
    v_matrix = vecs[:, -1]

    def rec(algo, corr, iterations, ray, converged):
        return RunRecord(
            experiment_id=cfg.experiment_id, algorithm=algo, k=cfg.k, n=n,
            beta=beta, gamma=None, lam=lam, replicate=rep, seed=seed,
            correlation=corr, loss=2.0 - 2.0 * corr, iterations=iterations,
            rayleigh=ray, converged=converged, failed=False, instance_hash=ih,
        )

    out = []
    t0 = time.perf_counter()
    sym = cfg.k == 3
    simul = est.amp(inst.X, v_matrix, max_iter=cfg.max_iter, tol=cfg.tol,
                    v0=inst.v0, symmetric=sym)
    out.append(rec("simultaneous", simul.correlation, simul.iterations,
                   simul.rayleigh, simul.converged))
    corr_m = model.correlation(v_matrix / np.linalg.norm(v_matrix), inst.v0)
    out.append(rec("matrix_only", corr_m, 0, None, True))
    y_rand = rng.standard_normal(n)
    tens = est.amp(inst.X, y_rand, max_iter=cfg.max_iter, tol=cfg.tol,
                   v0=inst.v0, symmetric=sym)
    out.append(rec("tensor_only", tens.correlation, tens.iterations,
                   tens.rayleigh, tens.converged))
    wall = int(round((time.perf_counter() - t0) * 1000))
    for r in out:
        r.wall_ms = wall
    return out


def _amp_vs_se_task(cfg, cell_idx, n, beta, rep, predictions):
    seed = model.derive_seed(cfg.master_seed, cell_idx, rep)
    rng = model.derive_rng(cfg.master_seed, cell_idx, rep)
    inst = model.sample_spiked(cfg.k, n, beta, rng=rng, seed=seed)
    ih = _instance_hash(inst.X)
    y = model.sample_side_info(inst.v0, cfg.gamma, rng).y
    res = est.amp(inst.X, y, max_iter=cfg.max_iter, tol=0.0, v0=inst.v0,
                  symmetric=cfg.k == 3)
    out = []
    for t, corr_t in enumerate(res.trajectory):
        out.append(RunRecord(
            experiment_id=cfg.experiment_id, algorithm="amp", k=cfg.k, n=n,
            beta=beta, gamma=cfg.gamma, lam=None, replicate=rep, seed=seed,
            correlation=corr_t, loss=2.0 - 2.0 * corr_t,
            iterations=res.iterations, rayleigh=res.rayleigh,
            converged=res.converged, failed=False, instance_hash=ih,
            t=t, se_predicted=predictions[min(t, len(predictions) - 1)],
        ))
    return out


def _tasks(cfg):
    """Yield (callable returning records) for every replicate cell."""
    tasks = []
    cell_idx = 0
    if cfg.kind in ("comparison", "scaling_collapse"):
        for n in cfg.n_list:
            for beta in cfg.beta_values(n=n):
                for rep in range(cfg.replicates):
                    tasks.append((_comparison_task, (cfg, cell_idx, n, beta, rep)))
                cell_idx += 1
    elif cfg.kind == "side_info":
        for n in cfg.n_list:
            for beta in cfg.beta_values():
                for lam in cfg.lambda_list:
                    for rep in range(cfg.replicates):
                        tasks.append((_side_info_task,
                                      (cfg, cell_idx, n, beta, lam, rep)))
                    cell_idx += 1
    elif cfg.kind == "amp_vs_se":
        for n in cfg.n_list:
            for beta in cfg.beta_values():
                traj = theory.state_evolution(beta, cfg.k, cfg.gamma,
                                              cfg.max_iter + 1)
                preds = [tau / math.sqrt(1.0 + tau * tau) for tau in traj.taus]
                for rep in range(cfg.replicates):
                    tasks.append((_amp_vs_se_task,
                                  (cfg, cell_idx, n, beta, rep, preds)))
                cell_idx += 1
    return tasks


def _sort_key(r):
    return (r.experiment_id, r.algorithm, r.k, r.n, r.beta,
            r.gamma if r.gamma is not None else -1.0,
            r.lam if r.lam is not None else -1.0,
            r.replicate, r.t if r.t is not None else -1)


def run_experiment(cfg):
    """Execute every replicate cell of the config; returns sorted RunRecords."""
    tasks = _tasks(cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(lambda t: t[0](*t[1]), tasks))
    else:
        chunks = [fn(*args) for fn, args in tasks]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=_sort_key)
    return records


# ---------------------------------------------------------------------------
# aggregation and serialization


def aggregate(records):
    """Group records over replicates; mean correlation and standard error."""
    if not records:
        raise ValueError("no records to aggregate")
    groups = {}
    for r in records:
        if r.failed or r.correlation is None:
            continue
        key = (r.experiment_id, r.algorithm, r.k, r.n, r.beta, r.gamma, r.lam, r.t)
        groups.setdefault(key, []).append(r.correlation)
    out = []
    for key in sorted(groups, key=lambda k: tuple(
            -1.0 if v is None else v if not isinstance(v, str) else v for v in k)):
        vals = np.array(groups[key])
        m = len(vals)
        stderr = float(vals.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        eid, algo, k, n, beta, gamma, lam, t = key
        out.append(AggregateRecord(
            experiment_id=eid, algorithm=algo, k=k, n=n, beta=beta,
            gamma=gamma, lam=lam, t=t, mean_correlation=float(vals.mean()),
            stderr=stderr, n_reps=m,
            beta_over_n14=beta / n**0.25, beta_over_n12=beta / n**0.5,
        ))
    return out


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_records_csv(records, path):
    """Raw per-replicate records; fixed header, RFC-4180, sorted rows,
    byte-deterministic for a fixed config (no wall-clock column)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in sorted(records, key=_sort_key):
            w.writerow([
                r.experiment_id, r.algorithm, r.k, r.n, _fmt(r.beta),
                _fmt(r.gamma), _fmt(r.lam), r.replicate, r.seed, _fmt(r.t),
                _fmt(r.correlation), _fmt(r.loss), r.iterations,
                _fmt(r.rayleigh), _fmt(r.se_predicted), _fmt(r.converged),
                _fmt(r.failed), r.instance_hash,
            ])


def read_records_csv(path):
    """Read a raw-records CSV back; rejects aggregate files (schema check)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RECORD_COLUMNS:
            raise ValueError(
                f"not a raw-records CSV (header mismatch): {path}")
        out = []
        for row in reader:
            d = dict(zip(RECORD_COLUMNS, row))
            out.append(RunRecord(
                experiment_id=d["experiment_id"], algorithm=d["algorithm"],
                k=int(d["k"]), n=int(d["n"]), beta=float(d["beta"]),
                gamma=float(d["gamma"]) if d["gamma"] else None,
                lam=float(d["lambda"]) if d["lambda"] else None,
                replicate=int(d["replicate"]), seed=int(d["seed"]),
                correlation=float(d["correlation"]) if d["correlation"] else None,
                loss=float(d["loss"]) if d["loss"] else None,
                iterations=int(d["iterations"]),
                rayleigh=float(d["rayleigh"]) if d["rayleigh"] else None,
                converged=d["converged"] == "true",
                failed=d["failed"] == "true",
                instance_hash=d["instance_hash"],
                t=int(d["t"]) if d["t"] else None,
                se_predicted=float(d["se_predicted"]) if d["se_predicted"] else None,
            ))
    return out


def write_aggregates_csv(aggs, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for a in aggs:
            w.writerow([
                a.experiment_id, a.algorithm, a.k, a.n, _fmt(a.beta),
                _fmt(a.gamma), _fmt(a.lam), _fmt(a.t),
                _fmt(a.mean_correlation), _fmt(a.stderr), a.n_reps,
                _fmt(a.beta_over_n14), _fmt(a.beta_over_n12),
            ])


def write_summary_json(cfg, records, path):
    failures = sum(1 for r in records if r.failed)
    summary = {
        "config": {f.name: getattr(cfg, f.name) for f in fields(ExperimentConfig)},
        "total_records": len(records),
        "failures": failures,
        "total_wall_ms": int(sum(r.wall_ms for r in records)),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
