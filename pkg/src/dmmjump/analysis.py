"""TTS statistics, histograms, distribution fits and scaling fits.

Histogram fits use unweighted least squares of the bin-normalized model
curves against counts at bin centers:

    exponential:      f(x) = N_inst * w / a * exp(-x / a)
    inverse Gaussian: f(x) = N_inst * w * sqrt(b / (2 pi x^3)) * exp(-b (x - a)^2 / (2 a^2 x))

with ``a`` the mean and ``b`` the shape parameter.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1

LM_MAX_ITER = 200
LM_RTOL = 1e-9


class MedianUndefinedError(ValueError):
    """Half or more of the runs hit the cutoff; the median is not identified."""


class FitError(RuntimeError):
    def __init__(self, message: str, last_params: dict | None = None):
        super().__init__(message)
        self.last_params = last_params


class Family(str, Enum):
    EXPONENTIAL = "exponential"
    INVERSE_GAUSSIAN = "inverse_gaussian"
    POWER_LAW = "power_law"
    EXP_SCALING = "exp_scaling"


@dataclass
class TtsSampleSet:
    """Per-run TTS values; censored runs carry the cutoff time."""

    samples: np.ndarray
    censored: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.censored = np.asarray(self.censored, dtype=bool)
        if self.samples.shape != self.censored.shape or self.samples.ndim != 1:
            raise ValueError("samples and censored flags must be 1-d and equally long")

    @classmethod
    def from_values(cls, values: Iterable[float], censored: Iterable[bool] | None = None):
        values = np.asarray(list(values), dtype=np.float64)
        if censored is None:
            censored = np.zeros(values.shape, dtype=bool)
        return cls(values, np.asarray(list(censored), dtype=bool))

    @classmethod
    def from_results(cls, results, dt: float | None = None) -> "TtsSampleSet":
        return cls(np.array([r.tts for r in results], dtype=np.float64),
                   np.array([not r.solved for r in results], dtype=bool))

    @property
    def n_inst(self) -> int:
        return int(self.samples.size)

    @property
    def censored_count(self) -> int:
        return int(self.censored.sum())

    @property
    def uncensored(self) -> np.ndarray:
        return self.samples[~self.censored]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tts", "censored"])
        for t, c in zip(self.samples.tolist(), self.censored.tolist()):
            w.writerow([repr(t), int(c)])
        return buf.getvalue()


def read_tts_csv(text: str) -> TtsSampleSet:
    """Read a CSV with at least ``tts`` and ``censored`` columns."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"tts", "censored"} <= set(reader.fieldnames):
        raise ValueError("TTS CSV needs 'tts' and 'censored' columns")
    vals, cens = [], []
    for row in reader:
        vals.append(float(row["tts"]))
        cens.append(row["censored"].strip().lower() in ("1", "true"))
    return TtsSampleSet.from_values(vals, cens)


def median_tts(s: TtsSampleSet) -> float:
    """Sample median with censored runs ranked as +inf."""
    if s.n_inst == 0:
        raise MedianUndefinedError("no samples")
    if 2 * s.censored_count >= s.n_inst:
        raise MedianUndefinedError(
            f"median undefined at this cutoff: {s.censored_count}/{s.n_inst} runs censored")
    x = np.sort(np.where(s.censored, np.inf, s.samples))
    n = x.size
    if n % 2:
        return float(x[n // 2])
    return float(0.5 * (x[n // 2 - 1] + x[n // 2]))


def nmtts(modified: TtsSampleSet, unmodified: TtsSampleSet) -> float:
    return median_tts(modified) / median_tts(unmodified)


def acceleration_factor(v_jump: float) -> float:
    """Predicted switching-time ratio ``1 - v_jump / 2`` for rail-to-rail transit."""
    if not 0 <= v_jump <= 2:
        raise ValueError(f"v_jump must lie in [0, 2], got {v_jump}")
    return 1.0 - v_jump / 2.0


@dataclass
class Histogram:
    w: float
    origin: float
    counts: np.ndarray
    n_inst: int
    censored_count: int = 0

    @property
    def centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.counts.size) + 0.5) * self.w

    def trimmed(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers and counts between the first and last occupied bins."""
        nz = np.flatnonzero(self.counts)
        if nz.size == 0:
            return np.empty(0), np.empty(0)
        sl = slice(nz[0], nz[-1] + 1)
        return self.centers[sl], self.counts[sl].astype(np.float64)

    def mean_var(self) -> tuple[float, float]:
        x, y = self.trimmed()
        tot = y.sum()
        mean = float((x * y).sum() / tot)
        return mean, float((y * (x - mean) ** 2).sum() / tot)


def histogram(s: TtsSampleSet, w: float, origin: float = 0.0) -> Histogram:
    """Half-open bins ``[origin + k w, origin + (k+1) w)``; censored runs excluded."""
    if not w > 0:
        raise ValueError(f"bin width must be positive, got {w}")
    x = s.uncensored
    if np.any(x < origin):
        raise ValueError("samples below the histogram origin")
    if x.size == 0:
        counts = np.zeros(0, dtype=np.int64)
    else:
        k = np.floor((x - origin) / w).astype(np.int64)
        counts = np.bincount(k)
    return Histogram(float(w), float(origin), counts, s.n_inst, s.censored_count)


@dataclass
class FitResult:
    family: Family
    params: dict[str, float]
    stderr: dict[str, float]
    rss: float
    r2: float
    n_inst: int | None = None
    w: float | None = None
    converged: bool = True
    iterations: int = 0
    domain_ok: bool = True
    censored_count: int = 0
    method: str = "lsq"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "family": self.family.value,
            "method": self.method,
            "parameters": self.params,
            "stderr": self.stderr,
            "rss": self.rss,
            "r2": self.r2,
            "n_inst": self.n_inst,
            "w": self.w,
            "converged": self.converged,
            "iterations": self.iterations,
            "domain_ok": self.domain_ok,
            "censored_count": self.censored_count,
        }
        d.update(self.extra)
        return d


# -- model curves ------------------------------------------------------------

def exp_curve(x, a, n_inst, w):
    return n_inst * w / a * np.exp(-np.asarray(x) / a)


def invgauss_curve(x, a, b, n_inst, w):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        return n_inst * w * np.sqrt(b / (2 * np.pi * x**3)) * np.exp(-b * (x - a) ** 2 / (2 * a**2 * x))


def _exp_jac(x, p, scale):
    (a,) = p
    f = exp_curve(x, a, *scale)
    return (f * (x / a**2 - 1 / a))[:, None]


def _ig_jac(x, p, scale):
    a, b = p
    f = invgauss_curve(x, a, b, *scale)
    da = f * b * (x - a) / a**3
    db = f * (0.5 / b - (x - a) ** 2 / (2 * a**2 * x))
    return np.stack([da, db], axis=1)


def levenberg_marquardt(model: Callable, jac: Callable, x: np.ndarray, y: np.ndarray,
                        p0: Sequence[float], max_iter: int = LM_MAX_ITER, rtol: float = LM_RTOL):
    """Damped Gauss-Newton for ``min ||y - model(x, p)||^2``.

    Returns ``(p, cov, rss, iterations, converged)``; ``cov`` is the
    linearized covariance ``s^2 (J^T J)^-1`` with ``s^2 = rss / (n - k)``.
    """
    p = np.asarray(p0, dtype=np.float64)
    r = y - model(x, p)
    cost = float(r @ r)
    if not math.isfinite(cost):
        raise FitError("model is not finite at the initial guess", dict(enumerate(p.tolist())))
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = jac(x, p)
        A = J.T @ J
        g = J.T @ r
        stalled = True
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(np.diag(A) + 1e-300), g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            pn = p + step
            rn = y - model(x, pn)
            cn = float(rn @ rn)
            if math.isfinite(cn) and cn <= cost:
                stalled = False
                break
            lam *= 10
        if stalled:
            # no downhill step at any damping: stationary to machine precision
            converged = True
            break
        small = np.all(np.abs(step) <= rtol * (np.abs(p) + rtol))
        p, r, cost = pn, rn, cn
        lam = max(lam / 10, 1e-12)
        if small:
            converged = True
            break
    J = jac(x, p)
    dof = max(x.size - p.size, 1)
    try:
        cov = np.linalg.inv(J.T @ J) * (cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((p.size, p.size), np.nan)
    return p, cov, cost, it, converged


def _r2(y, rss):
    tss = float(((y - y.mean()) ** 2).sum())
    return 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0)


def fit_exponential(h: Histogram) -> FitResult:
    x, y = h.trimmed()
    if np.count_nonzero(y) < 3:
        raise FitError("exponential fit needs at least 3 nonempty bins")
    scale = (h.n_inst, h.w)
    a0, _ = h.mean_var()
    p, cov, rss, it, ok = levenberg_marquardt(
        lambda x, p: exp_curve(x, p[0], *scale), lambda x, p: _exp_jac(x, p, scale), x, y, [a0])
    if not ok:
        raise FitError(f"no convergence in {LM_MAX_ITER} iterations", {"a": float(p[0])})
    return FitResult(Family.EXPONENTIAL, {"a": float(p[0])},
                     {"a": float(math.sqrt(abs(cov[0, 0])))}, rss, _r2(y, rss),
                     h.n_inst, h.w, ok, it, bool(p[0] > 0), h.censored_count)


def fit_inverse_gaussian(h: Histogram) -> FitResult:
    x, y = h.trimmed()
    if np.count_nonzero(y) < 4:
        raise FitError("inverse-Gaussian fit needs at least 4 nonempty bins")
    if np.any(x <= 0):
        raise FitError("inverse-Gaussian fit needs positive bin centers")
    scale = (h.n_inst, h.w)
    a0, var0 = h.mean_var()
    b0 = a0**3 / var0
    p, cov, rss, it, ok = levenberg_marquardt(
        lambda x, p: invgauss_curve(x, p[0], p[1], *scale), lambda x, p: _ig_jac(x, p, scale),
        x, y, [a0, b0])
    params = {"a": float(p[0]), "b": float(p[1])}
    if not ok:
        raise FitError(f"no convergence in {LM_MAX_ITER} iterations", params)
    se = np.sqrt(np.abs(np.diag(cov)))
    return FitResult(Family.INVERSE_GAUSSIAN, params, {"a": float(se[0]), "b": float(se[1])},
                     rss, _r2(y, rss), h.n_inst, h.w, ok, it,
                     bool(p[0] > 0 and p[1] > 0), h.censored_count)


def fit_exponential_mle(s: TtsSampleSet, h: Histogram) -> FitResult:
    """Maximum-likelihood variant (uncensored samples only); goodness against ``h``."""
    x = s.uncensored
    a = float(x.mean())
    x_c, y = h.trimmed()
    rss = float(((y - exp_curve(x_c, a, h.n_inst, h.w)) ** 2).sum())
    return FitResult(Family.EXPONENTIAL, {"a": a}, {"a": a / math.sqrt(x.size)}, rss, _r2(y, rss),
                     h.n_inst, h.w, censored_count=s.censored_count, method="mle")


def fit_inverse_gaussian_mle(s: TtsSampleSet, h: Histogram) -> FitResult:
    x = s.uncensored
    if np.any(x <= 0):
        raise FitError("inverse-Gaussian MLE needs positive samples")
    n = x.size
    a = float(x.mean())
    b = float(n / np.sum(1.0 / x - 1.0 / a))
    x_c, y = h.trimmed()
    rss = float(((y - invgauss_curve(x_c, a, b, h.n_inst, h.w)) ** 2).sum())
    return FitResult(Family.INVERSE_GAUSSIAN, {"a": a, "b": b},
                     {"a": math.sqrt(a**3 / (b * n)), "b": b * math.sqrt(2.0 / n)},
                     rss, _r2(y, rss), h.n_inst, h.w, censored_count=s.censored_count, method="mle")


def fit_curve_table(h: Histogram, fit: FitResult) -> str:
    """CSV of ``bin_center,count,fitted_value`` over the histogram's bins."""
    x = h.centers
    if fit.family is Family.EXPONENTIAL:
        f = exp_curve(x, fit.params["a"], h.n_inst, h.w)
    else:
        f = invgauss_curve(x, fit.params["a"], fit.params["b"], h.n_inst, h.w)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["bin_center", "count", "fitted_value"])
    for xc, c, fv in zip(x.tolist(), h.counts.tolist(), f.tolist()):
        wr.writerow([repr(xc), c, repr(fv)])
    return buf.getvalue()


def fit_scaling(points: Sequence[tuple[float, float]], family: Family | str = Family.POWER_LAW
                ) -> FitResult:
    """Linear least squares of ``log(tts)`` against ``log(N)`` or ``N``.

    Reports ``exponent`` (power law) or rate (exponential scaling, also under
    ``exponent``) and ``prefactor``; R^2 is computed in log space.
    """
    family = Family(family)
    if family not in (Family.POWER_LAW, Family.EXP_SCALING):
        raise ValueError(f"not a scaling family: {family}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("scaling fit needs at least 3 (N, tts) points")
    if np.any(pts <= 0):
        raise ValueError("scaling fit needs positive N and tts")
    n, t = pts[:, 0], pts[:, 1]
    xs = np.log(n) if family is Family.POWER_LAW else n
    ys = np.log(t)
    X = np.stack([np.ones_like(xs), xs], axis=1)
    coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
    resid = ys - X @ coef
    rss = float(resid @ resid)
    dof = pts.shape[0] - 2
    cov = np.linalg.inv(X.T @ X) * (rss / dof if dof > 0 else 0.0)
    se = np.sqrt(np.abs(np.diag(cov)))
    c = math.exp(coef[0])
    return FitResult(family, {"exponent": float(coef[1]), "prefactor": c},
                     {"exponent": float(se[1]), "prefactor": float(c * se[0])},
                     rss, _r2(ys, rss), extra={"points": pts.tolist()})
