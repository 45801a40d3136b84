"""Experiment configuration, execution and persisted results.

A config is a small TOML document with top-level keys (``experiment``,
``seeds``, ``epsilon``, ``sweep``, ``output_dir``) and four flat tables:
``[gen]``, ``[transform]``, ``[objective]`` and ``[optimizer]``. Anything left
out takes the per-experiment default from :data:`DEFAULTS`, and the fully
resolved config is what gets written to the manifest.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .analysis import (epochs_to_converge, estimate_contraction, evals_to_converge,
                       fit_log_slope, newton_on_simplex, spectral_gain, verify_unchanged_optima)
from .core import Box, Simplex
from .datagen import GenSpec, build_comparison_pair, gen_clusters
from .objectives import (SoftMinParams, SumNormsParams, augment, grad_sum_norms,
                         hessian_sum_norms, perturbed_quadratic, quadratic_objective,
                         soft_min_objective, sum_norms_objective)
from .optimizers import (GDConfig, GraduatedConfig, fd_hessian, grad_descent,
                         graduated_descent, phase_endpoints)
from .transforms import (AlphaPair, Dataset, Duplicate, GaussianNoise, Rotation,
                         alpha_pair_weights, apply_transform, check_positive_supervision)

KINDS = ("noise_sweep", "rate_check", "unchanged_optima", "graduated_compare", "hessian_check")
OUTPUT_DIR_ENV = "AUGCLUST_OUTPUT_DIR"
NA = "NA"
SUPERVISION_RETRIES = 50


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransformConfig:
    """Which transform to apply. For sweeps the swept quantity overrides
    ``variance`` (noise) or ``angle`` (rotation)."""

    kind: str = "gaussian_noise"    # gaussian_noise | rotation | duplicate | alpha_pair
    variance: float = 1.0
    angle: float = 0.0
    alpha1: float = 0.1
    alpha2: float = 0.5
    require_positive: bool = True   # redraw noise seeds that move a point across clusters

    def build(self, seed: int, level: Optional[float] = None):
        if self.kind == "gaussian_noise":
            return GaussianNoise(self.variance if level is None else level, seed)
        if self.kind == "rotation":
            return Rotation(self.angle if level is None else level, seed=seed)
        if self.kind == "duplicate":
            return Duplicate(seed)
        if self.kind == "alpha_pair":
            return AlphaPair(self.alpha1, self.alpha2, seed)
        raise ValueError(f"unknown transform kind {self.kind!r}")


@dataclass(frozen=True)
class ObjectiveConfig:
    """Loss choice and its parameters (only the fields a loss uses are read)."""

    losses: tuple = ("soft_min",)    # soft_min | sum_norms
    beta: float = 0.003
    divergence: str = "sqeuclidean"
    candidates: str = "exemplars"   # exemplars | centroids | data
    gamma: float = 1.0
    bandwidth: float = 2.0          # Gaussian kernel width for sum-of-norms pair weights
    coord_tol: float = 1e-3         # optima agreement, relative to coordinate scale
    # perturbed-quadratic family
    amplitude: float = 1.0
    frequency: float = 0.6
    kappa: float = 3.0
    center: tuple = (20.0, 20.0)
    box: tuple = (0.0, 40.0)
    n_points: int = 100
    # quadratic rate grid
    mu: tuple = (0.1, 0.5, 1.0)
    kappa_factors: tuple = (1.5, 3.0, 6.0)
    L_factors: tuple = (1.0, 2.0, 5.0)
    dim: int = 5
    # Hessian check
    max_points: int = 6


@dataclass(frozen=True)
class OptimizerConfig:
    eta: float = 0.1
    max_iters: int = 100_000
    solver_tol: float = 1e-10
    M: int = 8
    samples: int = 64
    t_cap: int = 10_000
    delta1: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    gen: GenSpec
    transform: TransformConfig
    objective: ObjectiveConfig
    optimizer: OptimizerConfig
    epsilon: float
    seeds: tuple
    sweep: tuple
    output_dir: str

    def __post_init__(self):
        if self.experiment not in KINDS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {KINDS}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        for loss in self.objective.losses:
            if loss not in ("soft_min", "sum_norms"):
                raise ValueError(f"unknown loss {loss!r}")

    def resolved(self) -> dict:
        """Plain-data view of the config (tuples become lists)."""
        return _plain(asdict(self))


DEFAULTS = {
    "noise_sweep": {
        "seeds": [0, 1, 2, 3, 4], "epsilon": 1e-4, "sweep": list(range(11)),
        "transform": {"kind": "gaussian_noise"},
        "objective": {"losses": ["soft_min"], "beta": 0.003},
        "optimizer": {"eta": 0.1, "max_iters": 100_000},
    },
    "rate_check": {
        "seeds": [0], "epsilon": 1e-8, "sweep": [],
        "optimizer": {"max_iters": 200},
    },
    "unchanged_optima": {
        "seeds": [0, 1, 2, 3, 4], "epsilon": 1e-3, "sweep": [0.5, 1.0, 2.0, 4.0],
        "transform": {"kind": "gaussian_noise"},
        "objective": {"losses": ["soft_min", "sum_norms"], "beta": 1.0},
        "optimizer": {"eta": 0.05, "max_iters": 100_000, "solver_tol": 1e-10},
    },
    "graduated_compare": {
        "seeds": list(range(10)), "epsilon": 1e-3, "sweep": [2.0, 1.5],
        "optimizer": {"eta": 0.4, "M": 8, "samples": 64},
    },
    "hessian_check": {
        "seeds": list(range(10)), "epsilon": 1e-5, "sweep": [],
        "transform": {"kind": "alpha_pair", "alpha1": 0.1, "alpha2": 0.5},
    },
}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _tuplify(obj):
    if isinstance(obj, list):
        return tuple(_tuplify(v) for v in obj)
    return obj


def _section(cls, raw: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return cls(**{k: _tuplify(v) for k, v in raw.items()})


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Resolve a raw config mapping against the experiment's defaults."""
    raw = dict(raw)
    kind = raw.get("experiment")
    if kind not in KINDS:
        raise ValueError(f"unknown experiment {kind!r}; expected one of {KINDS}")
    base = DEFAULTS[kind]
    top = {"seeds", "epsilon", "sweep", "output_dir", "experiment"}
    tables = ("gen", "transform", "objective", "optimizer")
    unknown = set(raw) - top - set(tables)
    if unknown:
        raise ValueError(f"unknown top-level keys: {sorted(unknown)}")

    merged = {t: {**base.get(t, {}), **raw.get(t, {})} for t in tables}
    gen = dict(merged["gen"])
    if "centroids" in gen:
        gen["centroids"] = tuple(tuple(float(v) for v in c) for c in gen["centroids"])
    return ExperimentConfig(
        experiment=kind,
        gen=_section(GenSpec, gen, "gen"),
        transform=_section(TransformConfig, merged["transform"], "transform"),
        objective=_section(ObjectiveConfig, merged["objective"], "objective"),
        optimizer=_section(OptimizerConfig, merged["optimizer"], "optimizer"),
        epsilon=float(raw.get("epsilon", base["epsilon"])),
        seeds=tuple(int(s) for s in raw.get("seeds", base["seeds"])),
        sweep=tuple(float(v) for v in raw.get("sweep", base["sweep"])),
        output_dir=str(raw.get("output_dir", f"results/{kind}")),
    )


def default_config(kind: str, **overrides) -> ExperimentConfig:
    """Defaults for ``kind`` with top-level or table overrides."""
    return config_from_dict({"experiment": kind, **overrides})


def load_config(path) -> ExperimentConfig:
    """Read a TOML config. ``$AUGCLUST_OUTPUT_DIR`` overrides ``output_dir``."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    cfg = config_from_dict(raw)
    env = os.environ.get(OUTPUT_DIR_ENV)
    return replace(cfg, output_dir=env) if env else cfg


# ---------------------------------------------------------------------------
# rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    """One experiment arm. ``None`` cells are written as ``NA``."""

    experiment: str
    arm: str
    sweep: float
    seed: int
    transform_seed: Optional[int] = None
    epochs_baseline: Optional[int] = None
    epochs_augmented: Optional[int] = None
    fitted_rate_baseline: Optional[float] = None
    fitted_rate_augmented: Optional[float] = None
    rate_bound_baseline: Optional[float] = None
    rate_bound_augmented: Optional[float] = None
    final_distance: Optional[float] = None
    grad_evals_baseline: Optional[int] = None
    grad_evals_augmented: Optional[int] = None
    lambda_min_baseline: Optional[float] = None
    lambda_min_augmented: Optional[float] = None
    monotone: Optional[bool] = None
    slope_ratio: Optional[float] = None
    passed: bool = False
    error: Optional[str] = None

    def sort_key(self):
        return (self.sweep, self.seed, self.arm)


COLUMNS = tuple(f.name for f in fields(ResultRow))


def _cell(v) -> str:
    if v is None:
        return NA
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _guarded(make_row, experiment, arm, sweep, seed) -> ResultRow:
    """Run one arm; a failure becomes an error row instead of aborting the run."""
    try:
        return make_row()
    except Exception as exc:  # noqa: BLE001 - recorded, not swallowed
        return ResultRow(experiment, arm, float(sweep), int(seed),
                         error=f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def candidate_centers(data: Dataset, how: str) -> np.ndarray:
    """Candidate centroids for the soft-min loss.

    ``exemplars`` picks the data point closest to each ground-truth centroid,
    ``centroids`` uses the centroids themselves and ``data`` every point.
    """
    if how == "exemplars":
        d2 = np.sum((data.X[:, None, :] - data.centroids[None, :, :]) ** 2, axis=2)
        return data.X[np.argmin(d2, axis=0)]
    if how == "centroids":
        return data.centroids.copy()
    if how == "data":
        return data.X.copy()
    raise ValueError(f"unknown candidate rule {how!r}")


def positive_transform(tcfg: TransformConfig, data: Dataset, seed: int, level=None):
    """Build the transform for ``seed``, redrawing if it breaks cluster membership.

    Returns ``(spec, transformed points)``. Redraws use seeds
    ``seed + 1000 * r``; the chosen seed is stored on the returned transform.
    """
    for r in range(SUPERVISION_RETRIES if tcfg.require_positive else 1):
        spec = tcfg.build(seed + 1000 * r, level)
        Xg = apply_transform(spec, data)
        if not tcfg.require_positive or check_positive_supervision(data, Xg).valid:
            return spec, Xg
    raise RuntimeError(f"no membership-preserving transform in {SUPERVISION_RETRIES} draws")


def kernel_weights(X, bandwidth: float) -> np.ndarray:
    """Gaussian-kernel pair weights exp(-||x_i - x_j||^2 / (2 h^2)), zero diagonal."""
    X = np.asarray(X, dtype=float)
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2)
    W = np.exp(-d2 / (2.0 * bandwidth ** 2))
    np.fill_diagonal(W, 0.0)
    return W


def grid_optimum(obj, lo, hi, points: int = 201, polish: int = 5) -> np.ndarray:
    """Global minimiser over a 2-d box by grid search plus bounded local polish."""
    from scipy.optimize import minimize

    g = np.linspace(lo, hi, points)
    G = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    vals = np.array([obj.value(w) for w in G])
    best = None
    for i in np.argsort(vals)[:polish]:
        r = minimize(obj.value, G[i], jac=obj.grad, method="L-BFGS-B",
                     bounds=[(lo, hi)] * 2, options={"ftol": 1e-15, "gtol": 1e-12})
        if best is None or r.fun < best.fun:
            best = r
    return best.x


def _soft_min_run(X, centers, ocfg: ObjectiveConfig, eta, max_iters, eps):
    f = soft_min_objective(SoftMinParams(X, ocfg.beta, ocfg.divergence, centers))
    k = centers.shape[0]
    q0 = np.full(k, 1.0 / k)
    q_star = newton_on_simplex(f, q0)
    cfg = GDConfig(eta, max_iters, Simplex(k), eps, stop_rule="distance")
    _, trace = grad_descent(f, q0, cfg, w_ref=q_star)
    epochs = epochs_to_converge(trace, q_star, eps)
    rate = estimate_contraction(trace, q_star).fitted_rate if len(trace) >= 3 else None
    return epochs, rate, q_star


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _noise_sweep(cfg: ExperimentConfig) -> list:
    data = gen_clusters(cfg.gen)
    centers = candidate_centers(data, cfg.objective.candidates)
    opt = cfg.optimizer
    base = build_comparison_pair(data, Duplicate()).baseline
    e_base, r_base, q_base = _soft_min_run(base.X, centers, cfg.objective, opt.eta,
                                           opt.max_iters, cfg.epsilon)
    rows = []
    for v in cfg.sweep:
        for seed in cfg.seeds:
            def make(v=v, seed=seed):
                spec = cfg.transform.build(seed, v)
                aug = build_comparison_pair(data, spec).augmented
                e_aug, r_aug, q_aug = _soft_min_run(aug.X, centers, cfg.objective, opt.eta,
                                                    opt.max_iters, cfg.epsilon)
                return ResultRow(
                    "noise_sweep", "soft_min", float(v), seed, transform_seed=spec.seed,
                    epochs_baseline=e_base, epochs_augmented=e_aug,
                    fitted_rate_baseline=r_base, fitted_rate_augmented=r_aug,
                    final_distance=float(np.linalg.norm(q_aug - q_base)),
                    passed=e_base is not None and e_aug is not None)
            rows.append(_guarded(make, "noise_sweep", "soft_min", v, seed))
    return rows


def _rate_grid(ocfg: ObjectiveConfig):
    for mu in ocfg.mu:
        for kf in ocfg.kappa_factors:
            for lf in ocfg.L_factors:
                kappa = mu * kf
                yield mu, kappa, (mu + kappa) * lf


def _rate_check(cfg: ExperimentConfig) -> list:
    """Gradient descent with eta = 1/L on random quadratics F and F + F_g.

    F has spectrum spread over ``[mu, L - kappa]`` and ``F_g = (kappa/2)||w - c||^2``,
    so the unnormalised sum has spectrum in ``[mu + kappa, L]``.
    """
    ocfg, rows = cfg.objective, []
    for cell, (mu, kappa, L) in enumerate(_rate_grid(ocfg)):
        for seed in cfg.seeds:
            def make(cell=cell, mu=mu, kappa=kappa, L=L, seed=seed):
                rng = np.random.default_rng([seed, cell])
                d = ocfg.dim
                Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
                spec_F = np.linspace(mu, L - kappa, d)
                c = rng.standard_normal(d)
                F = quadratic_objective(Q @ np.diag(spec_F) @ Q.T, c)
                Fp = augment(F, quadratic_objective(kappa * np.eye(d), c), normalized=False)
                eta = 1.0 / L
                w0 = c + rng.standard_normal(d) * 10.0
                gd = GDConfig(eta, cfg.optimizer.max_iters)
                _, tb = grad_descent(F, w0, gd)
                _, ta = grad_descent(Fp, w0, gd)
                bound_b, bound_a = 1.0 - eta * mu, 1.0 - eta * (mu + kappa)
                ratios_a, ratios_b = _prefix_ratios(ta, c), _prefix_ratios(tb, c)
                ok = bool(np.all(ratios_a <= bound_a + 1e-6) and np.all(ratios_b <= bound_b + 1e-6))
                return ResultRow(
                    "rate_check", f"mu={mu!r},kappa={kappa!r},L={L!r}", float(cell), seed,
                    fitted_rate_baseline=_safe_rate(tb, c), fitted_rate_augmented=_safe_rate(ta, c),
                    rate_bound_baseline=bound_b, rate_bound_augmented=bound_a,
                    final_distance=float(np.linalg.norm(ta.iterates[-1] - c)), passed=ok)
            rows.append(_guarded(make, "rate_check", f"cell{cell}", cell, seed))
    return rows


def _prefix_ratios(trace, w_star) -> np.ndarray:
    """Per-step squared-distance ratios while the distance is above round-off."""
    d2 = np.sum((trace.as_array() - w_star) ** 2, axis=1)
    floor = (1e4 * np.finfo(float).eps * max(1.0, float(np.linalg.norm(w_star)))) ** 2
    keep = d2[:-1] > floor
    return d2[1:][keep] / d2[:-1][keep]


def _safe_rate(trace, w_star):
    try:
        return estimate_contraction(trace, w_star).fitted_rate
    except ValueError:
        return None


def _unchanged_optima(cfg: ExperimentConfig) -> list:
    data = gen_clusters(cfg.gen)
    ocfg, opt, rows = cfg.objective, cfg.optimizer, []
    centers = candidate_centers(data, ocfg.candidates)
    scale_x = float(np.max(np.abs(data.X)))
    alpha = kernel_weights(data.X, ocfg.bandwidth)
    for v in cfg.sweep:
        for seed in cfg.seeds:
            for loss in ocfg.losses:
                def make(v=v, seed=seed, loss=loss):
                    spec, Xg = positive_transform(cfg.transform, data, seed, v)
                    if loss == "soft_min":
                        F = soft_min_objective(SoftMinParams(data.X, ocfg.beta, ocfg.divergence, centers))
                        Fg = soft_min_objective(SoftMinParams(Xg, ocfg.beta, ocfg.divergence, centers))
                        # seeded start kept away from the faces, where the gradient blows up
                        k = centers.shape[0]
                        K, scale, eta = Simplex(k), 1.0, opt.eta
                        w0 = 0.5 / k + 0.5 * K.sample(np.random.default_rng(seed))
                    else:
                        params = SumNormsParams(data.X, ocfg.gamma, alpha)
                        F = sum_norms_objective(params)
                        Fg = sum_norms_objective(SumNormsParams(Xg, ocfg.gamma, alpha))
                        # 1/L step for the per-point average
                        lam_max = float(np.linalg.eigvalsh(hessian_sum_norms(params))[-1])
                        K, w0, eta, scale = None, data.X.ravel(), data.n / lam_max, scale_x
                    Fp = augment(F, Fg)
                    report = verify_unchanged_optima(
                        F, Fp, K, GDConfig(eta, opt.max_iters, None, opt.solver_tol),
                        w0=w0, seed=seed, bound=ocfg.coord_tol * scale)
                    return ResultRow("unchanged_optima", loss, float(v), seed,
                                     transform_seed=spec.seed, final_distance=report.distance,
                                     passed=report.passed)
                rows.append(_guarded(make, "unchanged_optima", loss, v, seed))
    return rows


def long_run_phases(delta1: float, epsilon: float, shrink: float) -> int:
    """Phases needed for the smoothing radius to fall below ``epsilon / 4``."""
    return max(1, math.ceil(math.log(4.0 * delta1 / epsilon) / math.log(shrink)))


def graduated_slope_target(eta: float, mu_kappa: float) -> float:
    """Reference slope of log-distance against total inner steps."""
    return math.log(1.0 - eta * mu_kappa) / (2.0 * math.log(6.0) / math.log(1.5))


def _graduated_compare(cfg: ExperimentConfig) -> list:
    ocfg, opt = cfg.objective, cfg.optimizer
    lo, hi = ocfg.box
    center = np.asarray(ocfg.center, dtype=float)
    K = Box(np.full(center.size, lo), np.full(center.size, hi))
    F = perturbed_quadratic(center, ocfg.amplitude, ocfg.frequency, n_points=ocfg.n_points)
    Fg = quadratic_objective(ocfg.kappa * np.eye(center.size), center, n_points=ocfg.n_points)
    Fp = augment(F, Fg)
    mu_F = 1.0 - ocfg.amplitude * ocfg.frequency ** 2
    if not mu_F > 0:
        raise ValueError("perturbed quadratic is not strongly convex; lower amplitude or frequency")
    mu_P = (mu_F * F.n_points + ocfg.kappa * Fg.n_points) / (F.n_points + Fg.n_points)
    opt_F, opt_P = grid_optimum(F, lo, hi), grid_optimum(Fp, lo, hi)
    delta1 = opt.delta1 if opt.delta1 is not None else K.diameter() / 2.0

    rows = []
    for shrink in cfg.sweep:
        M_long = long_run_phases(delta1, cfg.epsilon, shrink)
        for seed in cfg.seeds:
            def make(shrink=shrink, seed=seed, M_long=M_long):
                def run(obj, w_opt, mk, M):
                    gc = GraduatedConfig(M=M, eta=opt.eta, mu_kappa=mk, delta1=opt.delta1,
                                         shrink=shrink, samples=opt.samples, seed=seed,
                                         t_cap=opt.t_cap)
                    return graduated_descent(obj, K, gc, w_ref=w_opt)

                landed, evals, iters, finals = [], [], [], []
                for obj, w_opt, mk in ((F, opt_F, mu_F), (Fp, opt_P, mu_P)):
                    w, tr = run(obj, w_opt, mk, opt.M)
                    landed.append(np.linalg.norm(w - w_opt) <= tr.phase_deltas[-1] / shrink)
                    finals.append((w, tr))
                    _, tl = run(obj, w_opt, mk, M_long)
                    ev = evals_to_converge(tl, w_opt, cfg.epsilon)
                    evals.append(ev)
                    iters.append(None if ev is None else ev // opt.samples)
                w_aug, tr_aug = finals[1]
                disp = np.linalg.norm(np.diff(phase_endpoints(tr_aug), axis=0), axis=1)
                ends = tr_aug.phase_boundaries[1:] + [len(tr_aug) - 1]
                slope, _ = fit_log_slope([tr_aug.eval_counts[i] / opt.samples for i in ends],
                                         [tr_aug.dist_to_ref[i] for i in ends])
                return ResultRow(
                    "graduated_compare", f"shrink={shrink!r}", float(shrink), seed,
                    epochs_baseline=iters[0], epochs_augmented=iters[1],
                    final_distance=float(np.linalg.norm(w_aug - opt_P)),
                    grad_evals_baseline=evals[0], grad_evals_augmented=evals[1],
                    monotone=bool(np.all(np.diff(disp) <= 0)),
                    slope_ratio=slope / graduated_slope_target(opt.eta, mu_P),
                    passed=bool(all(landed)))
            rows.append(_guarded(make, "graduated_compare", f"shrink={shrink!r}", shrink, seed))
    return rows


def _hessian_check(cfg: ExperimentConfig) -> list:
    """Finite-difference Hessian of the fused loss and the pair-weight ordering."""
    ocfg, rows = cfg.objective, []
    tspec = cfg.transform.build(0)
    if not isinstance(tspec, AlphaPair):
        raise ValueError("hessian_check needs an alpha_pair transform")
    for seed in cfg.seeds:
        def make(seed=seed):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, ocfg.max_points + 1))
            d = 2
            X = rng.uniform(0.0, 10.0, size=(n, d))
            base = SumNormsParams(X, ocfg.gamma, np.full((n, n), tspec.alpha1))
            W = rng.standard_normal(n * d)
            H_fd = fd_hessian(lambda w: grad_sum_norms(base, w), W, h=1e-3)
            H = np.kron(hessian_sum_norms(base), np.eye(d))
            rel = float(np.max(np.abs(H_fd - H)) / np.max(np.abs(H)))
            data = Dataset(X, np.zeros(n, dtype=int), X.mean(axis=0, keepdims=True))
            aug = SumNormsParams(np.vstack([X, apply_transform(tspec, data)]), ocfg.gamma,
                                 alpha_pair_weights(data, tspec))
            gain = spectral_gain(base, aug)
            dense_b = float(np.linalg.eigvalsh(hessian_sum_norms(base))[0])
            dense_a = float(np.linalg.eigvalsh(hessian_sum_norms(aug))[0])
            agree = abs(gain.lambda_min_base - dense_b) <= 1e-8 and abs(gain.lambda_min_aug - dense_a) <= 1e-8
            return ResultRow("hessian_check", f"n={n}", 0.0, seed, final_distance=rel,
                             lambda_min_baseline=gain.lambda_min_base,
                             lambda_min_augmented=gain.lambda_min_aug,
                             passed=bool(rel <= cfg.epsilon and gain.ordered and agree))
        rows.append(_guarded(make, "hessian_check", "instance", 0.0, seed))
    return rows


RUNNERS = {
    "noise_sweep": _noise_sweep,
    "rate_check": _rate_check,
    "unchanged_optima": _unchanged_optima,
    "graduated_compare": _graduated_compare,
    "hessian_check": _hessian_check,
}


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run every arm of ``cfg`` and return rows in canonical order."""
    rows = RUNNERS[cfg.experiment](cfg)
    return sorted(rows, key=ResultRow.sort_key)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def build_manifest(rows, cfg: Optional[ExperimentConfig] = None) -> dict:
    rows = list(rows)
    return {
        "tool": "augclust",
        "version": __version__,
        "config": None if cfg is None else cfg.resolved(),
        "seeds": [] if cfg is None else list(cfg.seeds),
        "n_rows": len(rows),
        "n_passed": sum(r.passed for r in rows),
        "n_errors": sum(r.error is not None for r in rows),
        "all_passed": all(r.passed for r in rows),
        "row_passed": [bool(r.passed) for r in rows],
    }


def write_results(rows, path, cfg: Optional[ExperimentConfig] = None) -> dict:
    """Write ``results.csv`` and ``manifest.json`` into directory ``path``.

    Output is a pure function of the rows and config, so identical runs give
    byte-identical files. Returns the manifest.
    """
    rows = list(rows)
    kinds = {r.experiment for r in rows}
    if len(kinds) > 1:
        raise ValueError(f"rows mix experiment kinds {sorted(kinds)}")
    out = Path(path)
    manifest = build_manifest(rows, cfg)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_bytes(rows_to_csv(rows).encode("utf-8"))
        text = json.dumps(manifest, sort_keys=True, indent=2, allow_nan=True) + "\n"
        (out / "manifest.json").write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return manifest
