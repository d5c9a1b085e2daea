"""Stochastic variational Gaussian process regression, one model per output.

Implements the inducing-point evidence lower bound

    ELBO = (N / n_batch) * sum_i E_{q(f_i)}[log N(y_i | f_i, noise)] - KL[q(u) || p(u)]

with q(u) = N(m_u, S_u), S_u kept as a lower-triangular factor with positive
diagonal, and the predictive moments

    mu_f    = K_xz Kzz^-1 m_u
    sigma_f = k_xx - K_xz Kzz^-1 K_zx + K_xz Kzz^-1 S_u Kzz^-1 K_zx.

Supported kernels (ARD, r = sqrt(sum_j ((x_j - x'_j)/l_j)^2)):

    matern32:             sigma2 * (1 + sqrt(3) r) * exp(-sqrt(3) r)
    squared_exponential:  sigma2 * exp(-r^2 / 2)

Hyperparameters are optimized in log space; inducing locations, the
variational mean and the covariance factor are optimized directly
(unwhitened). Gradients are derived by hand; both kernels share the chain
structure dK/dz = -M * (z - x)/l^2 with a kernel-specific prefactor M, which
the finite-difference tests verify end to end. The observation noise is held
fixed during training.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .design import Dataset
from .errors import (IllConditionedKernelError, InvalidArgumentError,
                     TrainingDivergedError)
from .optim import Adam
from .predictive import PredictionSet, PredictiveDistribution
from .transforms import (TransformPipeline, apply_boxcox, apply_standardize,
                         fit_pipeline, pushforward_gaussian)

JITTER_BASE = 1e-8
JITTER_MAX = 1e-4
KERNEL_KINDS = ("matern32", "squared_exponential")
SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class Kernel:
    """ARD stationary kernel with positive variance and lengthscales."""

    kind: str
    variance: float
    lengthscales: np.ndarray

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidArgumentError(f"unknown kernel kind {self.kind!r}")
        object.__setattr__(self, "lengthscales",
                           np.asarray(self.lengthscales, dtype=float))
        if self.variance <= 0 or np.any(self.lengthscales <= 0):
            raise InvalidArgumentError("kernel hyperparameters must be > 0")


def _scaled_sqdist(A: np.ndarray, B: np.ndarray, ls: np.ndarray) -> np.ndarray:
    As, Bs = A / ls, B / ls
    d2 = (As * As).sum(1)[:, None] + (Bs * Bs).sum(1)[None, :] - 2.0 * As @ Bs.T
    return np.maximum(d2, 0.0)


def kernel_matrix(k: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Cross-covariance matrix K(A, B)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != k.lengthscales.size or B.shape[1] != k.lengthscales.size:
        raise InvalidArgumentError("input dimension does not match lengthscales")
    r2 = _scaled_sqdist(A, B, k.lengthscales)
    if k.kind == "matern32":
        r = np.sqrt(r2)
        return k.variance * (1.0 + SQRT3 * r) * np.exp(-SQRT3 * r)
    return k.variance * np.exp(-0.5 * r2)


def kernel_eval(k: Kernel, x1: np.ndarray, x2: np.ndarray) -> float:
    return float(kernel_matrix(k, np.atleast_2d(x1), np.atleast_2d(x2))[0, 0])


def _prefactor(k: Kernel, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """M such that dK/dA_d = -M * (A_d - B_d) / l_d^2 for both kernels."""
    r2 = _scaled_sqdist(A, B, k.lengthscales)
    if k.kind == "matern32":
        return 3.0 * k.variance * np.exp(-SQRT3 * np.sqrt(r2))
    return k.variance * np.exp(-0.5 * r2)


def _chol_jitter(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky with escalating diagonal jitter, 1e-8 up to 1e-4."""
    jitter = JITTER_BASE
    while jitter <= JITTER_MAX:
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(K.shape[0]))
            return L, jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise IllConditionedKernelError(
        f"kernel matrix not positive definite with jitter up to {JITTER_MAX:g}")


@dataclass
class SvgpBlock:
    """Variational state for one output dimension."""

    kind: str
    log_variance: np.ndarray        # shape (1,)
    log_lengthscales: np.ndarray    # shape (d,)
    Z: np.ndarray                   # shape (m, d)
    m_u: np.ndarray                 # shape (m,)
    L_strict: np.ndarray            # shape (m, m), strictly-lower part used
    log_diag: np.ndarray            # shape (m,)
    noise_var: float
    log: list[float] = field(default_factory=list)

    @property
    def kernel(self) -> Kernel:
        return Kernel(self.kind, float(np.exp(self.log_variance[0])),
                      np.exp(self.log_lengthscales))

    @property
    def m(self) -> int:
        return self.Z.shape[0]

    def s_factor(self) -> np.ndarray:
        return np.tril(self.L_strict, -1) + np.diag(np.exp(self.log_diag))

    def params_list(self) -> list[np.ndarray]:
        return [self.log_variance, self.log_lengthscales, self.Z,
                self.m_u, self.L_strict, self.log_diag]

    def copy(self) -> "SvgpBlock":
        return SvgpBlock(self.kind, self.log_variance.copy(),
                         self.log_lengthscales.copy(), self.Z.copy(),
                         self.m_u.copy(), self.L_strict.copy(),
                         self.log_diag.copy(), self.noise_var, list(self.log))

    @classmethod
    def create(cls, kind: str, variance: float, lengthscales: np.ndarray,
               Z: np.ndarray, noise_var: float,
               s_init_scale: float = 1.0) -> "SvgpBlock":
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        m = Z.shape[0]
        return cls(kind, np.log([variance]),
                   np.log(np.asarray(lengthscales, dtype=float)),
                   Z.copy(), np.zeros(m), np.zeros((m, m)),
                   np.full(m, np.log(s_init_scale)), noise_var)

    def set_s_factor(self, SL: np.ndarray) -> None:
        d = np.diag(SL)
        if np.any(d <= 0):
            raise InvalidArgumentError("S factor diagonal must be positive")
        self.L_strict = np.tril(SL, -1)
        self.log_diag = np.log(d)


@dataclass
class SvgpModel:
    blocks: list[SvgpBlock]
    pipeline: TransformPipeline | None = None
    output_names: list[str] | None = None
    units: list[str] | None = None
    seed: int | None = None

    @property
    def n_outputs(self) -> int:
        return len(self.blocks)

    def copy(self) -> "SvgpModel":
        return SvgpModel([b.copy() for b in self.blocks], self.pipeline,
                         self.output_names, self.units, self.seed)

    def resolved_names(self) -> tuple[list[str], list[str]]:
        names = self.output_names or [f"y{i}" for i in range(self.n_outputs)]
        units = self.units or [""] * self.n_outputs
        return names, units


@dataclass(frozen=True)
class SvgpConfig:
    kernel: str = "matern32"
    n_inducing: int = 100
    inducing_strategy: str = "random-subset"
    steps: int = 4000
    batch_size: int = 100
    learning_rate: float = 0.01
    seed: int = 0
    noise_fraction: float = 1e-5    # noise_var = fraction * mean |transformed y|
    noise_override: float | None = None

    def __post_init__(self):
        if self.batch_size < 1 or self.n_inducing < 1 or self.steps < 0:
            raise InvalidArgumentError("non-positive SVGP config value")


def init_inducing(X: np.ndarray, m: int, strategy: str = "random-subset",
                  seed: int = 0) -> np.ndarray:
    """Pick m inducing locations from (standardized) training inputs."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if m > n:
        raise InvalidArgumentError(f"m ({m}) cannot exceed n ({n})")
    if strategy == "random-subset":
        rng = np.random.default_rng(seed)
        return X[rng.choice(n, size=m, replace=False)].copy()
    if strategy == "kmeans":
        from scipy.cluster.vq import kmeans2
        centroids, _ = kmeans2(X, m, iter=20, seed=seed, minit="++")
        return centroids
    raise InvalidArgumentError(f"unknown inducing strategy {strategy!r}")


def _elbo_grad_block(block: SvgpBlock, Xb: np.ndarray, yb: np.ndarray,
                     n_total: int, want_grad: bool = True
                     ) -> tuple[float, list[np.ndarray] | None]:
    """ELBO and gradients for one output block on one batch.

    Gradient list is ordered like ``block.params_list()``.
    """
    kern = block.kernel
    sig2 = kern.variance
    ls = kern.lengthscales
    Z, m_u = block.Z, block.m_u
    m, d = Z.shape
    b = Xb.shape[0]
    noise = block.noise_var
    c = n_total / b

    Kmm_raw = kernel_matrix(kern, Z, Z)
    L, jitter = _chol_jitter(Kmm_raw)
    Kmn = kernel_matrix(kern, Z, Xb)
    SL = block.s_factor()
    S = SL @ SL.T

    A = cho_solve((L, True), Kmn)              # Kzz^-1 Kzx, (m, b)
    alpha = cho_solve((L, True), m_u)          # Kzz^-1 m_u, (m,)
    mu = Kmn.T @ alpha                         # (b,)
    V = S @ A                                  # (m, b)
    B = cho_solve((L, True), V)                # Kzz^-1 S Kzz^-1 Kzx, (m, b)
    q2 = np.einsum("ji,ji->i", Kmn, A)
    q3 = np.einsum("ji,ji->i", A, V)
    sigf2 = sig2 - q2 + q3                     # (b,)

    resid = yb - mu
    e_term = c * float(
        -0.5 * b * np.log(2.0 * np.pi * noise)
        - ((resid * resid).sum() + sigf2.sum()) / (2.0 * noise))

    Kinv_S = cho_solve((L, True), S)
    kl = 0.5 * (float(np.trace(Kinv_S)) + float(m_u @ alpha) - m
                - 2.0 * float(block.log_diag.sum())
                + 2.0 * float(np.log(np.diag(L)).sum()))
    elbo_val = e_term - kl
    if not want_grad:
        return elbo_val, None

    w = -c / (2.0 * noise)                     # d elbo / d sigf2_i
    g_mu = c * resid / noise                   # d elbo / d mu_i

    # variational parameters
    g_mu_u = A @ g_mu - alpha
    Sinv = solve_triangular(SL, np.eye(m), lower=True)
    Sinv = Sinv.T @ Sinv
    Kinv = cho_solve((L, True), np.eye(m))
    G_S = w * (A @ A.T) - 0.5 * Kinv + 0.5 * Sinv
    G_SL = 2.0 * G_S @ SL                      # G_S is symmetric
    g_L_strict = np.tril(G_SL, -1)
    g_log_diag = np.diag(G_SL) * np.diag(SL)

    # gradients on the kernel matrices
    Ag = A @ g_mu
    G_n = np.outer(alpha, g_mu) + 2.0 * w * (B - A)
    Kinv_S_Kinv = cho_solve((L, True), Kinv_S.T)
    G_m = (-np.outer(Ag, alpha) + w * (A @ A.T) - w * (A @ B.T + B @ A.T)
           + 0.5 * (Kinv_S_Kinv + np.outer(alpha, alpha) - Kinv))

    # chain into log variance: dK/dlog sig2 = K (jitter excluded), plus k_xx
    g_log_var = float((G_m * Kmm_raw).sum() + (G_n * Kmn).sum()
                      + w * b * sig2)

    # chain into lengthscales and Z through both kernel matrices
    M_mm = _prefactor(kern, Z, Z)
    M_mn = _prefactor(kern, Z, Xb)
    T_mm = G_m * M_mm
    T_mn = G_n * M_mn
    inv_ls2 = 1.0 / (ls * ls)

    g_log_ls = np.empty(d)
    g_Z = np.empty_like(Z)
    Ts_mm = T_mm + T_mm.T                      # Z appears on both sides of Kzz
    row_mm = Ts_mm.sum(axis=1)
    row_mn = T_mn.sum(axis=1)
    for dim in range(d):
        zd, xd = Z[:, dim], Xb[:, dim]
        diff_mm = zd[:, None] - zd[None, :]
        diff_mn = zd[:, None] - xd[None, :]
        g_log_ls[dim] = inv_ls2[dim] * (
            float((T_mm * diff_mm * diff_mm).sum())
            + float((T_mn * diff_mn * diff_mn).sum()))
        g_Z[:, dim] = -inv_ls2[dim] * (
            row_mm * zd - Ts_mm @ zd + row_mn * zd - T_mn @ xd)

    grads = [np.array([g_log_var]), g_log_ls, g_Z, g_mu_u, g_L_strict,
             g_log_diag]
    return elbo_val, grads


def elbo(model: SvgpModel, Xt: np.ndarray, Yt: np.ndarray,
         n_total: int | None = None) -> float:
    """Total evidence lower bound over all output blocks (transformed space)."""
    Xt = np.atleast_2d(np.asarray(Xt, dtype=float))
    Yt = np.atleast_2d(np.asarray(Yt, dtype=float))
    if Xt.shape[0] == 0:
        raise InvalidArgumentError("empty batch")
    n_total = Xt.shape[0] if n_total is None else n_total
    total = 0.0
    for j, block in enumerate(model.blocks):
        val, _ = _elbo_grad_block(block, Xt, Yt[:, j], n_total,
                                  want_grad=False)
        total += val
    return total


def init(ds: Dataset, config: SvgpConfig) -> SvgpModel:
    """Fit transforms, choose inducing points, build prior-initialized blocks."""
    pipeline = fit_pipeline(ds.X, ds.Y, ds.input_names)
    Xt = apply_standardize(pipeline.input, ds.X)
    Yt = apply_boxcox(pipeline.output, ds.Y)
    d = Xt.shape[1]
    blocks = []
    for j in range(Yt.shape[1]):
        noise = (config.noise_override if config.noise_override is not None
                 else config.noise_fraction * float(np.abs(Yt[:, j]).mean()))
        Z = init_inducing(Xt, config.n_inducing, config.inducing_strategy,
                          seed=config.seed + j)
        blocks.append(SvgpBlock.create(config.kernel, 1.0, np.ones(d), Z,
                                       noise, s_init_scale=0.3))
    units_map = ds.meta.get("output_units", {})
    return SvgpModel(blocks, pipeline, list(ds.output_names),
                     [units_map.get(n, "") for n in ds.output_names],
                     seed=config.seed)


def train(model: SvgpModel, ds: Dataset, config: SvgpConfig) -> SvgpModel:
    """Adam on the negative ELBO, independently per output block."""
    model = model.copy()
    if model.pipeline is None:
        raise InvalidArgumentError("model has no fitted transform pipeline")
    Xt = apply_standardize(model.pipeline.input, ds.X)
    Yt = apply_boxcox(model.pipeline.output, ds.Y)
    n = Xt.shape[0]
    bsize = min(config.batch_size, n)
    for j, block in enumerate(model.blocks):
        rng = np.random.default_rng([config.seed, j])
        params = block.params_list()
        opt = Adam(params, lr=config.learning_rate)
        y = Yt[:, j]
        for step in range(config.steps):
            idx = rng.choice(n, size=bsize, replace=False)
            val, grads = _elbo_grad_block(block, Xt[idx], y[idx], n)
            if not np.isfinite(val):
                raise TrainingDivergedError(
                    f"non-finite ELBO for output {j} at step {step}",
                    epoch=step, batch=step)
            opt.step([-g for g in grads])
            block.log.append(val)
    return model


def predict(model: SvgpModel, x: np.ndarray, include_noise: bool = False
            ) -> PredictiveDistribution | PredictionSet:
    """Posterior moments in original units (epistemic only by default)."""
    if model.pipeline is None:
        raise InvalidArgumentError("model has no fitted transform pipeline")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    Xt = apply_standardize(model.pipeline.input, X)
    n = Xt.shape[0]
    k = model.n_outputs
    lat_mean = np.empty((n, k))
    lat_var = np.empty((n, k))
    for j, block in enumerate(model.blocks):
        kern = block.kernel
        Kmm_raw = kernel_matrix(kern, block.Z, block.Z)
        L, _ = _chol_jitter(Kmm_raw)
        Kmn = kernel_matrix(kern, block.Z, Xt)
        A = cho_solve((L, True), Kmn)
        SL = block.s_factor()
        V = (SL.T @ A)
        mu = Kmn.T @ cho_solve((L, True), block.m_u)
        q2 = np.einsum("ji,ji->i", Kmn, A)
        q3 = np.einsum("ji,ji->i", V, V)
        var = np.maximum(kern.variance - q2 + q3, 0.0)
        if include_noise:
            var = var + block.noise_var
        lat_mean[:, j] = mu
        lat_var[:, j] = var
    mean, var, clipped = pushforward_gaussian(model.pipeline.output,
                                              lat_mean, lat_var)
    names, units = model.resolved_names()
    ps = PredictionSet(mean, var, names, units, mc_samples_used=0,
                       range_clipped=clipped, latent_mean=lat_mean,
                       latent_var=lat_var, boxcox=model.pipeline.output)
    return ps.point(0) if single else ps
