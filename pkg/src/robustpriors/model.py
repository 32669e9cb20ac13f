"""Linear-regression data handling and the joint log-posterior.

The model is ``y_i = x_i . beta + sigma * eps_i`` with standardized errors
``eps_i ~ f`` and the product prior

    pi(beta | sigma) = prod_j (lam_j / sigma) g_j((lam_j / sigma)(beta_j - mu_j)),

together with a prior ``pi(sigma)`` on the scale.  All posterior evaluation
happens in the unconstrained coordinates ``(beta, nu)`` with
``nu = log(sigma)``; the Jacobian ``e^nu`` of that substitution is included,
and sigma-space densities are only ever produced by transforming draws.

`PosteriorTarget` is the single formula source: the two-parameter simulation
target (orthogonal standardized covariates, zero least-squares estimate) is
built through `reduced_target` as an intercept-only instance of exactly the
same code path.

A note on scale conventions: in `reduced_target` the user-facing ``lam2``
follows the simulation-study convention where the prior inverse-scale is
``lam2 * sqrt(n)``; the constructor applies the ``sqrt(n)`` factor itself.
`CoefficientPrior` built directly takes the raw inverse-scale multiplier
with no such factor.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .priors import CTN, CoefficientPrior, Normal
from .specfun import LOG_INV_SQRT_2PI

__all__ = [
    "DataError", "RegressionData", "StandardizeTransform", "standardize",
    "ols_fit", "load_csv", "JeffreysSigma", "InverseGammaSigmaSq",
    "PowerAdjustedSigma", "PosteriorTarget", "reduced_target",
]


class DataError(ValueError):
    """Raised for malformed or degenerate input data."""


@dataclass
class RegressionData:
    """Response vector and design matrix with a leading intercept column.

    ``standardized`` asserts that every non-intercept column has mean 0 and
    mean square 1 and that ``y`` does too (checked to 1e-8).
    """

    y: np.ndarray
    X: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        if self.y.ndim != 1 or self.X.ndim != 2:
            raise DataError("y must be a vector and X a matrix")
        n, p = self.X.shape
        if len(self.y) != n:
            raise DataError(f"y has length {len(self.y)} but X has {n} rows")
        if not (n >= p >= 1):
            raise DataError(f"need n >= p >= 1, got n={n}, p={p}")
        if not np.all(self.X[:, 0] == 1.0):
            raise DataError("first column of X must be the all-ones intercept")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.X))):
            raise DataError("data must be finite")
        if self.standardized:
            tol = 1e-8
            ok = abs(self.y.mean()) <= tol and abs((self.y ** 2).mean() - 1) <= tol
            for j in range(1, p):
                col = self.X[:, j]
                ok = ok and abs(col.mean()) <= tol
                ok = ok and abs((col ** 2).mean() - 1) <= tol
            if not ok:
                raise DataError("standardized flag set but moments are off")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class StandardizeTransform:
    """Per-column centering/scaling applied by `standardize`, for back-mapping."""

    y_mean: float
    y_scale: float
    col_means: np.ndarray
    col_scales: np.ndarray


def standardize(data):
    """Center and scale to the simulation-study convention.

    Every non-intercept column and the response end up with mean 0 and mean
    square 1 (population convention).  Returns the transformed data plus the
    transform record.  Already-standardized input round-trips unchanged.
    """
    if data.n < 2:
        raise DataError("standardization needs at least two rows")
    X = data.X.copy()
    col_means = np.zeros(data.p)
    col_scales = np.ones(data.p)
    for j in range(1, data.p):
        col = X[:, j]
        m = col.mean()
        s = np.sqrt(((col - m) ** 2).mean())
        if s == 0.0:
            raise DataError(f"column {j} is constant; cannot standardize")
        X[:, j] = (col - m) / s
        col_means[j] = m
        col_scales[j] = s
    ym = data.y.mean()
    ys = np.sqrt(((data.y - ym) ** 2).mean())
    if ys == 0.0:
        raise DataError("response is constant; cannot standardize")
    y = (data.y - ym) / ys
    out = RegressionData(y=y, X=X, standardized=True)
    return out, StandardizeTransform(ym, ys, col_means, col_scales)


def ols_fit(data):
    """Least-squares coefficients via the normal equations.

    With orthogonal standardized covariates this reduces to
    ``beta_hat_j = (1/n) sum_i x_ij y_i`` componentwise.
    """
    XtX = data.X.T @ data.X
    Xty = data.X.T @ data.y
    if np.linalg.matrix_rank(XtX) < data.p:
        raise DataError("design matrix is rank deficient")
    return np.linalg.solve(XtX, Xty)


def load_csv(path):
    """Read a regression dataset from CSV.

    Expects a header row containing a ``y`` column; every other column is a
    numeric covariate.  An intercept column is prepended automatically.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "y" not in header:
            raise DataError(f"{path}: no column named 'y' in header {header}")
        y_idx = header.index("y")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    y = arr[:, y_idx]
    covs = np.delete(arr, y_idx, axis=1)
    X = np.column_stack([np.ones(len(y)), covs])
    names = [h for i, h in enumerate(header) if i != y_idx]
    data = RegressionData(y=y, X=X)
    return data, names


# ---------------------------------------------------------------------------
# Priors on sigma, parameterized by nu = log(sigma).  Each returns the log
# of pi(sigma = e^nu) without the change-of-variables Jacobian, which the
# target adds exactly once.
# ---------------------------------------------------------------------------

class JeffreysSigma:
    """Improper scale prior pi(sigma) proportional to 1/sigma."""

    def log_density_nu(self, nu):
        return -np.asarray(nu, dtype=float)

    def dlog_dnu(self, nu):
        # Scalar; broadcasts against batched nu.
        return -1.0

    def __repr__(self):
        return "JeffreysSigma()"


class InverseGammaSigmaSq:
    """Prior under which sigma^2 is inverse-gamma(shape, scale)."""

    def __init__(self, shape, scale):
        if not (shape > 0 and scale > 0):
            raise ValueError("shape and scale must be positive")
        self.shape = float(shape)
        self.scale = float(scale)

    def log_density_nu(self, nu):
        nu = np.asarray(nu, dtype=float)
        # density of sigma: 2 * b^a / Gamma(a) * sigma^(-2a-1) * exp(-b/sigma^2)
        return -(2 * self.shape + 1) * nu - self.scale * np.exp(-2 * nu)

    def dlog_dnu(self, nu):
        nu = np.asarray(nu, dtype=float)
        return -(2 * self.shape + 1) + 2 * self.scale * np.exp(-2 * nu)

    def __repr__(self):
        return f"InverseGammaSigmaSq({self.shape}, {self.scale})"


class PowerAdjustedSigma:
    """A base sigma prior multiplied by sigma^power.

    The positive-power form is the full-information correction that cancels
    the constant-tail trace; the negative-power form is the limiting density
    left behind by unresolved scaling conflicts.
    """

    def __init__(self, base, power):
        self.base = base
        self.power = int(power)

    def log_density_nu(self, nu):
        return self.base.log_density_nu(nu) + self.power * np.asarray(nu, dtype=float)

    def dlog_dnu(self, nu):
        return self.base.dlog_dnu(nu) + self.power

    def __repr__(self):
        return f"PowerAdjustedSigma({self.base!r}, {self.power})"


def _is_jeffreys_like(sigma_prior):
    while isinstance(sigma_prior, PowerAdjustedSigma):
        sigma_prior = sigma_prior.base
    return isinstance(sigma_prior, JeffreysSigma)


class PosteriorTarget:
    """Joint unnormalized log-posterior of (beta, nu) and its gradient.

    ``priors`` is one entry per design column: a `CoefficientPrior`, or
    ``None`` for the improper flat prior (the benchmark choice).  The error
    family defaults to standard normal, in which case the likelihood is
    evaluated through the Gram-matrix sufficient statistics; any other
    family goes through per-observation residuals.

    Instances are immutable after construction and evaluation is pure, so a
    single target can serve many chains concurrently.
    """

    def __init__(self, data, priors, sigma_prior=None, error_family=None):
        self.data = data
        self.priors = list(priors)
        if len(self.priors) != data.p:
            raise ValueError(
                f"need {data.p} coefficient priors, got {len(self.priors)}")
        for pr in self.priors:
            if pr is not None and not isinstance(pr, CoefficientPrior):
                raise TypeError(f"bad prior entry {pr!r}")
        self.sigma_prior = sigma_prior if sigma_prior is not None else JeffreysSigma()
        self.error_family = error_family if error_family is not None else Normal()
        self._use_gram = isinstance(self.error_family, Normal)

        self._XtX = data.X.T @ data.X
        self._Xty = data.X.T @ data.y
        self._yty = float(data.y @ data.y)
        self._n = data.n
        self._p = data.p
        self._active = [(j, pr) for j, pr in enumerate(self.priors)
                        if pr is not None]

        self._check_properness()

    @property
    def n(self):
        return self.data.n

    @property
    def p(self):
        return self.data.p

    @property
    def dim(self):
        return self.data.p + 1

    @property
    def start_point(self):
        """Least-squares coefficients and log residual scale, for chain warm starts."""
        beta = np.linalg.solve(self._XtX, self._Xty)
        resid = self.data.y - self.data.X @ beta
        rms = float(np.sqrt((resid ** 2).mean()))
        nu0 = np.log(rms) if rms > 0 else 0.0
        return np.concatenate([beta, [nu0]])

    def _check_properness(self):
        has_ctn = any(pr is not None and isinstance(pr.family, CTN)
                      for pr in self.priors)
        if not has_ctn:
            return
        sp = self.sigma_prior
        if isinstance(sp, InverseGammaSigmaSq):
            return
        if _is_jeffreys_like(sp) and self.n > self.p + 2:
            return
        warnings.warn(
            "constant-tailed coefficient priors are improper; the sigma prior "
            "should satisfy integral(sigma^-p * pi(sigma)) < infinity, or use "
            "n > p + 2 with the Jeffreys prior, to guarantee a proper posterior",
            UserWarning, stacklevel=3)

    # -- evaluation ---------------------------------------------------------

    def _split(self, beta, nu):
        B = np.atleast_2d(np.asarray(beta, dtype=float))
        v = np.atleast_1d(np.asarray(nu, dtype=float))
        if B.shape[0] != v.shape[0]:
            if B.shape[0] == 1:
                B = np.broadcast_to(B, (v.shape[0], B.shape[1]))
            elif v.shape[0] == 1:
                v = np.broadcast_to(v, (B.shape[0],))
            else:
                raise ValueError("beta and nu batch sizes do not match")
        if B.shape[1] != self.p:
            raise ValueError(f"beta must have length {self.p}")
        return B, v

    def log_posterior(self, beta, nu):
        """Unnormalized log joint density of (beta, nu), Jacobian included.

        Rows with non-finite coordinates (or overflowing intermediates)
        evaluate to -inf rather than raising, so trajectory integrators can
        treat them as divergences.
        """
        B, v = self._split(beta, nu)
        scalar = np.ndim(nu) == 0 and np.ndim(beta) == 1
        out = self._logpdf_rows(B, v)
        return float(out[0]) if scalar and B.shape[0] == 1 else out

    def _logpdf_rows(self, B, v):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ok, inv_sigma, z_list = self._prepare(B, v)
            clean = ok is None
            if not clean:
                B = np.where(ok[:, None], B, 0.0)
                v = np.where(ok, v, 0.0)
                inv_sigma = np.exp(-v)
                z_list = [pr.lam * inv_sigma * (B[:, j] - pr.mu)
                          for j, pr in self._active]

            out = v + self.sigma_prior.log_density_nu(v)
            out = out + self._log_likelihood(B, v, inv_sigma)
            for (j, pr), z in zip(self._active, z_list):
                out = out + (np.log(pr.lam) - v + pr.family.log_density(z))
        if not clean:
            out = np.where(ok, out, -np.inf)
        return np.where(np.isnan(out), -np.inf, out)

    def _prepare(self, B, v):
        """Scale terms plus a row mask (or None if every row is evaluable)."""
        inv_sigma = np.exp(-v)
        z_list = [pr.lam * inv_sigma * (B[:, j] - pr.mu)
                  for j, pr in self._active]
        ok = np.isfinite(B).all(axis=1) & np.isfinite(v)
        for z in z_list:
            ok &= np.isfinite(z)
        return (None if ok.all() else ok), inv_sigma, z_list

    def _log_likelihood(self, B, v, inv_sigma):
        if self._use_gram:
            S = (self._yty - 2.0 * B @ self._Xty
                 + ((B @ self._XtX) * B).sum(axis=1))
            return (-self._n * v - 0.5 * S * inv_sigma * inv_sigma
                    + self._n * LOG_INV_SQRT_2PI)
        R = (self.data.y[None, :] - B @ self.data.X.T) * inv_sigma[:, None]
        rbad = ~np.all(np.isfinite(R), axis=1)
        if np.any(rbad):
            R = np.where(rbad[:, None], 0.0, R)
        ll = -self._n * v + self.error_family.log_density(R).sum(axis=1)
        return np.where(rbad, -np.inf, ll) if np.any(rbad) else ll

    def grad_log_posterior(self, beta, nu):
        """Analytic gradient of `log_posterior` with respect to (beta, nu).

        At prior kinks the interior branch value is used (the kink set has
        null measure).  Non-finite rows yield a zero gradient.
        """
        B, v = self._split(beta, nu)
        scalar = np.ndim(nu) == 0 and np.ndim(beta) == 1
        out = self._grad_rows(B, v)
        return out[0] if scalar and B.shape[0] == 1 else out

    def _grad_rows(self, B, v):
        m = B.shape[0]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ok, inv_sigma, z_list = self._prepare(B, v)
            clean = ok is None
            if not clean:
                B = np.where(ok[:, None], B, 0.0)
                v = np.where(ok, v, 0.0)
                inv_sigma = np.exp(-v)
                z_list = [pr.lam * inv_sigma * (B[:, j] - pr.mu)
                          for j, pr in self._active]

            gv = 1.0 + self.sigma_prior.dlog_dnu(v)
            if self._use_gram:
                inv2 = inv_sigma * inv_sigma
                BX = B @ self._XtX
                S = self._yty - 2.0 * B @ self._Xty + (BX * B).sum(axis=1)
                gB = (self._Xty[None, :] - BX) * inv2[:, None]
                gv = gv - self._n + S * inv2
            else:
                R = (self.data.y[None, :] - B @ self.data.X.T) * inv_sigma[:, None]
                R = np.where(np.isfinite(R), R, 0.0)
                fg = self.error_family.grad_log_density(R)
                gB = -(fg @ self.data.X) * inv_sigma[:, None]
                gv = gv - self._n - (R * fg).sum(axis=1)

            for (j, pr), z in zip(self._active, z_list):
                fam_grad = pr.family.grad_log_density(z)
                gB[:, j] += fam_grad * pr.lam * inv_sigma
                gv += -1.0 - z * fam_grad

        out = np.empty((m, self._p + 1))
        out[:, :self._p] = gB
        out[:, self._p] = gv
        if not clean:
            out = np.where(ok[:, None], out, 0.0)
        return np.where(np.isfinite(out), out, 0.0)

    def log_posterior_sigma(self, beta, sigma):
        """Joint log density in the original (beta, sigma) coordinates.

        Everything internal works in nu = log(sigma); this helper removes
        the change-of-variables Jacobian again for callers who want the
        sigma-space density.
        """
        sig = np.asarray(sigma, dtype=float)
        if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
            raise ValueError(f"sigma must be positive and finite, got {sigma}")
        nu = np.log(sig)
        return self.log_posterior(beta, nu) - nu

    # -- flat coordinate interface for samplers and quadrature --------------

    def logpdf(self, q):
        """Log density over packed coordinates ``q = (beta_1..beta_p, nu)``."""
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        return self._logpdf_rows(q[:, :self._p], q[:, self._p])

    def grad_logpdf(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        return self._grad_rows(q[:, :self._p], q[:, self._p])

    def __repr__(self):
        fams = [pr.family.name if pr is not None else "flat" for pr in self.priors]
        return (f"PosteriorTarget(n={self.n}, p={self.p}, priors={fams}, "
                f"sigma={self.sigma_prior!r}, error={self.error_family!r})")


def _standardized_pattern(n):
    # Deterministic response with mean 0 and mean square 1.
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    y = y - y.mean()
    norm = np.sqrt((y ** 2).sum())
    return y * np.sqrt(n) / norm


def reduced_target(n, mu2=0.0, lambda2=1.0, family=None, sigma_power=0,
                   sigma_prior=None):
    """The two-parameter simulation target as an intercept-only model.

    With a single all-ones design column and a standardized response the
    general likelihood collapses to exactly the reduced form
    ``-(n+1) nu - n (1 + beta^2) / (2 e^{2 nu}) + log g(...)`` used in the
    sweeps, so no second formula path exists.

    ``family=None`` selects the improper flat benchmark prior on the
    coefficient.  The prior inverse-scale is ``lambda2 * sqrt(n)``
    (simulation-study convention).  ``sigma_power`` multiplies the Jeffreys
    prior by ``sigma^power`` (+1 is the constant-tail correction, -1 the
    scaling-conflict limit).
    """
    if n < 4:
        raise ValueError("reduced target needs n >= 4 for a proper benchmark")
    y = _standardized_pattern(n)
    X = np.ones((n, 1))
    data = RegressionData(y=y, X=X, standardized=True)
    if family is None:
        priors = [None]
    else:
        priors = [CoefficientPrior(mu=mu2, lam=lambda2 * np.sqrt(n), family=family)]
    if sigma_prior is None:
        sigma_prior = JeffreysSigma()
    if sigma_power != 0:
        sigma_prior = PowerAdjustedSigma(sigma_prior, sigma_power)
    return PosteriorTarget(data, priors, sigma_prior=sigma_prior)
