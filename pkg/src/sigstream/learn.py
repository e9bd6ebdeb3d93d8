"""Signature features as a linear basis for learning on streams.

Feature vectors are the coordinate iterated integrals up to a depth; their
shuffle structure makes them an algebra, so linear models in these features
approximate generic smooth functionals of the path.  Provides ridge and
LASSO fits, two-class score reports (KS / ROC / AUC / accuracy), regression
from input-stream signatures to expected output-stream signatures, and the
synthetic two-class stream task used to exercise the pipeline end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import DegenerateReportError, DimensionMismatchError, DomainError
from .streams import Stream, lead_lag, log_signature, signature, time_augment
from .tensor_algebra import Word, words_of_degree

__all__ = [
    "FeatureMatrix",
    "LinearModel",
    "ClassificationReport",
    "ConditionalLawModel",
    "featurize",
    "featurize_logsig",
    "fit_ridge",
    "fit_lasso",
    "lasso_max_penalty",
    "lasso_kkt_residual",
    "classification_report",
    "score_and_report",
    "fit_conditional_law",
    "coordinate_r2",
    "two_class_streams",
    "stability_selection",
]

_TRANSFORMS = {
    "none": lambda s: s,
    "time": time_augment,
    "leadlag": lead_lag,
}


def feature_words(dim: int, depth: int) -> list[Word]:
    out = []
    for k in range(depth + 1):
        out.extend(words_of_degree(dim, k))
    return out


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows are streams, columns are signature coordinates (empty word first)."""

    X: np.ndarray
    words: tuple
    dim: int
    depth: int
    transform: str

    def column_of(self, word: Word) -> int:
        base = sum(self.dim**k for k in range(word.degree))
        return base + word.index(self.dim)


def featurize(streams, depth: int, transform: str = "none") -> FeatureMatrix:
    """Signature coordinates up to ``depth`` for each stream, one row per stream."""
    mapped = _transformed(streams, transform)
    d = mapped[0].dimension
    rows = np.empty((len(mapped), sum(d**k for k in range(depth + 1))))
    for i, s in enumerate(mapped):
        sig = signature(s, depth)
        rows[i] = np.concatenate(sig.levels)
    return FeatureMatrix(rows, tuple(feature_words(d, depth)), d, depth, transform)


def featurize_logsig(streams, depth: int, transform: str = "none") -> FeatureMatrix:
    """Log-signature (Lyndon-coordinate) features, with a leading constant column.

    An alternative to raw signature coordinates: far fewer columns, but the
    shuffle-product linearity of pointwise products no longer applies.
    """
    mapped = _transformed(streams, transform)
    first = log_signature(mapped[0], depth)
    rows = np.empty((len(mapped), 1 + first.values.size))
    rows[:, 0] = 1.0
    rows[0, 1:] = first.values
    for i, s in enumerate(mapped[1:], start=1):
        rows[i, 1:] = log_signature(s, depth).values
    words = (Word(()),) + tuple(b.word for b in first.basis)
    return FeatureMatrix(rows, words, mapped[0].dimension, depth, transform)


def _transformed(streams, transform):
    if transform not in _TRANSFORMS:
        raise DomainError(f"unknown transform {transform!r}")
    streams = list(streams)
    if not streams:
        raise DomainError("no streams to featurize")
    dims = {s.dimension for s in streams}
    if len(dims) != 1:
        raise DimensionMismatchError(f"streams have mixed dimensions {sorted(dims)}")
    return [_TRANSFORMS[transform](s) for s in streams]


@dataclass(eq=False)
class LinearModel:
    """Linear functional of signature features; the empty-word column is the intercept."""

    coefficients: np.ndarray
    method: str
    lam: float
    words: tuple | None = None
    converged: bool = True
    n_iter: int = 0
    feature_means: np.ndarray | None = None
    feature_scales: np.ndarray | None = None

    def predict(self, X) -> np.ndarray:
        X = X.X if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
        return X @ self.coefficients

    @property
    def active_set(self) -> np.ndarray:
        return np.nonzero(self.coefficients[1:])[0] + 1


def _as_array(X):
    return X.X if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)


def _words_of(X):
    return X.words if isinstance(X, FeatureMatrix) else None


def fit_ridge(X, y, lam: float = 0.0) -> LinearModel:
    """Ridge regression with the intercept (empty-word column) unpenalized.

    Solved through the SVD of the centred feature block, so lam = 0 returns
    the minimum-norm least-squares solution on rank-deficient inputs.
    """
    A = _as_array(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if A.shape[0] != y.size:
        raise DimensionMismatchError("row count of X must match len(y)")
    if lam < 0:
        raise DomainError("lam must be >= 0")
    body = A[:, 1:]
    mu = body.mean(axis=0)
    yc = y - y.mean()
    u, s, vt = np.linalg.svd(body - mu, full_matrices=False)
    if lam == 0.0:
        filt = np.divide(1.0, s, out=np.zeros_like(s), where=s > s.max(initial=0) * 1e-12)
    else:
        filt = s / (s**2 + lam)
    beta = vt.T @ (filt * (u.T @ yc))
    coef = np.concatenate([[y.mean() - mu @ beta], beta])
    return LinearModel(coef, "ridge", lam, words=_words_of(X))


def _standardize(A):
    body = A[:, 1:]
    mu = body.mean(axis=0)
    sigma = body.std(axis=0)
    usable = sigma > 0
    z = np.zeros_like(body)
    z[:, usable] = (body[:, usable] - mu[usable]) / sigma[usable]
    return z, mu, sigma, usable


def lasso_max_penalty(X, y) -> float:
    """Smallest lam that zeroes every penalized coefficient (standardized columns)."""
    A = _as_array(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    z, _, _, _ = _standardize(A)
    yc = y - y.mean()
    return float(np.abs(z.T @ yc).max() / y.size)


def fit_lasso(
    X, y, lam: float, max_iter: int = 10_000, tol: float = 1e-10
) -> LinearModel:
    """LASSO by cyclic coordinate descent with soft thresholding.

    Objective: (1/2n) |y - X beta|^2 + lam |beta|_1 over standardized
    feature columns (intercept unpenalized; standardization recorded and
    inverted on output).  Iterates until the largest coefficient change per
    sweep drops below ``tol``; if ``max_iter`` sweeps do not converge the
    model is returned with ``converged=False``.
    """
    A = _as_array(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if A.shape[0] != y.size:
        raise DimensionMismatchError("row count of X must match len(y)")
    if lam < 0:
        raise DomainError("lam must be >= 0")
    n = y.size
    z, mu, sigma, usable = _standardize(A)
    yc = y - y.mean()
    p = z.shape[1]
    beta = np.zeros(p)
    residual = yc.copy()
    converged = False
    sweeps = 0
    cols = [z[:, j] for j in range(p)]
    for sweeps in range(1, max_iter + 1):
        biggest = 0.0
        for j in range(p):
            if not usable[j]:
                continue
            zj = cols[j]
            old = beta[j]
            rho = (zj @ residual) / n + old  # z columns have unit variance
            new = np.sign(rho) * max(abs(rho) - lam, 0.0)
            if new != old:
                residual += zj * (old - new)
                beta[j] = new
                biggest = max(biggest, abs(new - old))
        if biggest < tol:
            converged = True
            break
    raw = np.zeros(p)
    raw[usable] = beta[usable] / sigma[usable]
    intercept = y.mean() - mu @ raw
    coef = np.concatenate([[intercept], raw])
    return LinearModel(
        coef,
        "lasso",
        lam,
        words=_words_of(X),
        converged=converged,
        n_iter=sweeps,
        feature_means=mu,
        feature_scales=sigma,
    )


def lasso_kkt_residual(model: LinearModel, X, y) -> tuple[float, float]:
    """(worst zero-coefficient violation, worst active-coefficient violation).

    Checks the stationarity conditions of the standardized objective:
    |g_j| <= lam for beta_j = 0 and g_j = lam sign(beta_j) otherwise, with
    g the (1/n) X^T residual gradient.
    """
    if model.method != "lasso":
        raise DomainError("KKT residuals are defined for LASSO models")
    A = _as_array(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    z, mu, sigma, usable = _standardize(A)
    yc = y - y.mean()
    beta_std = model.coefficients[1:] * sigma
    grad = z.T @ (yc - z @ beta_std) / y.size
    zero = (beta_std == 0) & usable
    active = (beta_std != 0) & usable
    worst_zero = float(np.maximum(np.abs(grad[zero]) - model.lam, 0.0).max()) if zero.any() else 0.0
    worst_active = (
        float(np.abs(grad[active] - model.lam * np.sign(beta_std[active])).max())
        if active.any()
        else 0.0
    )
    return worst_zero, worst_active


# -- classification reporting --------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    """Two-class separation summary of a real-valued score."""

    ks: float
    auc: float
    accuracy: float
    roc: np.ndarray  # rows (false positive rate, true positive rate)

    def __post_init__(self):
        arr = np.asarray(self.roc, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "roc", arr)


def roc_points(scores, labels) -> np.ndarray:
    """ROC curve by descending threshold sweep over unique scores, ties grouped."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = pos[order].astype(float)
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    cut = np.concatenate([distinct, [scores.size - 1]])
    tp = np.concatenate([[0.0], np.cumsum(sorted_pos)[cut]])
    fp = np.concatenate([[0.0], np.cumsum(1.0 - sorted_pos)[cut]])
    return np.column_stack([fp / n_neg, tp / n_pos])


def trapezoid_auc(roc: np.ndarray) -> float:
    return float(np.trapezoid(roc[:, 1], roc[:, 0]))


def classification_report(scores, labels, threshold: float = 0.5) -> ClassificationReport:
    """KS, AUC, accuracy-at-threshold and the ROC curve for binary labels."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(int)
    if not set(np.unique(labels)) <= {0, 1}:
        raise DomainError("labels must be 0/1")
    if len(np.unique(labels)) < 2:
        raise DegenerateReportError("need both classes to build a report")
    ks = float(scipy.stats.ks_2samp(scores[labels == 1], scores[labels == 0]).statistic)
    roc = roc_points(scores, labels)
    auc = trapezoid_auc(roc)
    accuracy = float(np.mean((scores >= threshold).astype(int) == labels))
    return ClassificationReport(ks, auc, accuracy, roc)


def score_and_report(
    model: LinearModel, X_learn, y_learn, X_test, y_test
) -> tuple[ClassificationReport, ClassificationReport]:
    """In-sample and out-of-sample reports for a fitted score model."""
    return (
        classification_report(model.predict(X_learn), y_learn),
        classification_report(model.predict(X_test), y_test),
    )


# -- conditional-law regression --------------------------------------------------


@dataclass(eq=False)
class ConditionalLawModel:
    """Linear map from input-signature features to expected output signatures."""

    coefficients: np.ndarray  # (n_features_in, n_features_out)
    dim_in: int
    depth_in: int
    dim_out: int
    depth_out: int
    transform: str
    lam: float

    def predict(self, inputs) -> np.ndarray:
        if isinstance(inputs, (FeatureMatrix, np.ndarray)):
            X = _as_array(inputs)
        else:
            X = featurize(inputs, self.depth_in, self.transform).X
        return X @ self.coefficients


def fit_conditional_law(
    pairs, depth_in: int, depth_out: int, lam: float = 0.0, transform: str = "none"
) -> ConditionalLawModel:
    """Regress output-stream signatures on input-stream signatures.

    One ridge fit per output coordinate (all solved in a single SVD pass);
    the predicted vector estimates E[S(output) | S(input)].
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise DomainError("need at least two stream pairs")
    inputs = featurize([a for a, _ in pairs], depth_in, transform)
    outputs = featurize([b for _, b in pairs], depth_out, transform)
    A, Y = inputs.X, outputs.X
    body = A[:, 1:]
    mu = body.mean(axis=0)
    y_mean = Y.mean(axis=0)
    u, s, vt = np.linalg.svd(body - mu, full_matrices=False)
    if lam == 0.0:
        filt = np.divide(1.0, s, out=np.zeros_like(s), where=s > s.max(initial=0) * 1e-12)
    else:
        filt = s / (s**2 + lam)
    beta = vt.T @ (filt[:, None] * (u.T @ (Y - y_mean)))
    intercept = y_mean - mu @ beta
    coef = np.vstack([intercept, beta])
    return ConditionalLawModel(
        coef,
        inputs.dim,
        depth_in,
        outputs.dim,
        depth_out,
        transform,
        lam,
    )


def coordinate_r2(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    """Per-coordinate R^2; coordinates with (near) zero variance report NaN."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    ss_res = ((y_true - y_pred) ** 2).sum(axis=0)
    centred = y_true - y_true.mean(axis=0)
    ss_tot = (centred**2).sum(axis=0)
    scale = (y_true**2).sum(axis=0) + 1e-300
    out = np.full(y_true.shape[1], np.nan)
    meaningful = ss_tot > 1e-12 * scale
    out[meaningful] = 1.0 - ss_res[meaningful] / ss_tot[meaningful]
    return out


# -- synthetic two-class stream task ---------------------------------------------


def two_class_streams(
    n_per_class: int,
    n_steps: int = 64,
    strength: float = 0.8,
    seed: int = 0,
) -> tuple[list[Stream], np.ndarray]:
    """Two classes of 2-D streams distinguished only by temporal ordering.

    In class 1 the second coordinate follows the first with a one-step lag;
    in class 0 it leads by one step.  Marginal scales match by construction
    and each stream is standardized per coordinate (mean-zero, unit-variance
    increments, Brownian 1/sqrt(n) scaling), so level-1 features carry no
    signal; the classes separate through the planted Levy-area drift.
    Returns (streams, labels) interleaved deterministically for the seed.
    """
    if not 0.0 <= strength <= 1.0:
        raise DomainError("strength must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, 1.0, n_steps + 1)
    streams, labels = [], []
    for label in (0, 1):
        for _ in range(n_per_class):
            base = rng.standard_normal(n_steps + 2)
            noise = rng.standard_normal(n_steps)
            lead = base[1:-1]
            partner = base[2:] if label == 0 else base[:-2]
            follow = strength * partner + np.sqrt(1.0 - strength**2) * noise
            inc = np.column_stack([lead, follow])
            inc = (inc - inc.mean(axis=0)) / inc.std(axis=0)
            inc /= np.sqrt(n_steps)
            points = np.vstack([np.zeros(2), np.cumsum(inc, axis=0)])
            streams.append(Stream(times, points))
            labels.append(label)
    return streams, np.array(labels)


def stability_selection(
    X, y, lam: float, n_rounds: int = 50, fraction: float = 0.5, seed: int = 0
) -> np.ndarray:
    """Selection frequency of each penalized feature over LASSO refits on subsamples.

    A plain repeated-subsampling wrapper around ``fit_lasso``; frequencies
    near 1 indicate features selected robustly at this penalty.
    """
    A = _as_array(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    rng = np.random.default_rng(seed)
    n = y.size
    take = max(2, int(round(fraction * n)))
    counts = np.zeros(A.shape[1] - 1)
    for _ in range(n_rounds):
        rows = rng.choice(n, size=take, replace=False)
        model = fit_lasso(A[rows], y[rows], lam)
        counts += model.coefficients[1:] != 0.0
    return counts / n_rounds
