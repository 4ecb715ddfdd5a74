"""Linear soft-margin SVM with sigmoid probability calibration.

Training solves the L1-loss dual by coordinate descent over the box
0 <= alpha <= C with the bias folded in as a constant feature, visiting
samples in a fixed cyclic order so results are deterministic.  The decision
function is the plain dot product plus bias; features are never standardized,
so the geometry of the landscape vectors is preserved.

Calibration follows the classic regularized sigmoid fit: smoothed targets
t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2) and Newton iterations with a
backtracking line search on held-out decision values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import CalibrationError, TrainingError
from .landscape import LandscapeVector, SampleGrid

KKT_TOL = 1e-7
MAX_EPOCHS = 20000


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Feature matrix of stacked landscape vectors with +-1 labels."""

    X: np.ndarray          # (n_samples, n_features)
    y: np.ndarray          # (n_samples,) values in {-1, +1}
    grid: SampleGrid | None = None
    depth: int | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2 or len(X) == 0:
            raise ValueError("need a nonempty 2-d feature matrix")
        if y.shape != (len(X),):
            raise ValueError("labels do not match samples")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_vectors(cls, vectors: list[LandscapeVector], labels) -> "LabeledSet":
        if not vectors:
            raise ValueError("empty vector list")
        grid, depth = vectors[0].grid, vectors[0].depth
        for v in vectors[1:]:
            if v.depth != depth or v.grid != grid:
                raise ValueError("landscape vectors disagree on grid or depth")
        X = np.stack([v.entries for v in vectors])
        return cls(X=X, y=np.asarray(labels, dtype=np.float64), grid=grid, depth=depth)

    def __len__(self) -> int:
        return len(self.X)

    def subset(self, idx) -> "LabeledSet":
        return LabeledSet(X=self.X[idx], y=self.y[idx], grid=self.grid, depth=self.depth)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float     # percent correctly allocated
    calibration: float  # mean probability assigned to the true class, percent


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """Weights, bias, and sigmoid calibration of a trained linear SVM."""

    w: np.ndarray
    b: float
    C: float
    platt: tuple[float, float] | None = None  # (A, B), probability 1/(1+exp(A f + B))

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Labels in {-1, +1}; the boundary itself maps to +1."""
        return np.where(self.decision(X) >= 0, 1.0, -1.0)

    def prob_positive(self, X: np.ndarray) -> np.ndarray:
        if self.platt is None:
            raise ValueError("model is not calibrated")
        a, b = self.platt
        z = a * self.decision(X) + b
        # stable sigmoid on both tails
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
        out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
        return out


def train_svm(data: LabeledSet, C: float = 1.0, tol: float = KKT_TOL,
              max_epochs: int = MAX_EPOCHS) -> ClassifierModel:
    """Dual coordinate descent for the L1-loss linear SVM.

    Converges when the largest projected-gradient violation over one sweep
    drops below ``tol``; the fixed sweep order makes training deterministic.
    """
    if C <= 0:
        raise ValueError("cost C must be positive")
    y = data.y
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("training needs both classes")
    if np.all(np.ptp(data.X, axis=0) == 0.0):
        raise TrainingError("degenerate data: all training vectors are identical")

    n, dim = data.X.shape
    Xa = np.hstack([data.X, np.ones((n, 1))])  # bias as a constant feature
    qii = np.einsum("ij,ij->i", Xa, Xa)
    alpha = np.zeros(n)
    w = np.zeros(dim + 1)

    for _ in range(max_epochs):
        worst = 0.0
        for i in range(n):
            g = y[i] * (Xa[i] @ w) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                worst = max(worst, abs(pg))
                new = min(max(a - g / qii[i], 0.0), C)
                if new != a:
                    w += (new - a) * y[i] * Xa[i]
                    alpha[i] = new
        if worst < tol:
            break
    else:
        raise TrainingError(f"dual coordinate descent did not reach tol={tol} "
                            f"within {max_epochs} epochs")

    return ClassifierModel(w=w[:dim].copy(), b=float(w[dim]), C=float(C))


def dual_objective(data: LabeledSet, model: ClassifierModel, alpha: np.ndarray) -> float:
    """Dual objective value at alpha, for cross-checking solvers."""
    Xa = np.hstack([data.X, np.ones((len(data.X), 1))])
    q = (Xa * data.y[:, None]) @ (Xa * data.y[:, None]).T
    return float(alpha.sum() - 0.5 * alpha @ q @ alpha)


def primal_objective(data: LabeledSet, model: ClassifierModel) -> float:
    """0.5 ||w, b||^2 + C * hinge, the quantity the dual bounds from below."""
    margins = 1.0 - data.y * model.decision(data.X)
    hinge = np.maximum(margins, 0.0).sum()
    return float(0.5 * (model.w @ model.w + model.b**2) + model.C * hinge)


def fit_sigmoid(scores: np.ndarray, labels: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Newton fit of p(y=+1 | f) = 1/(1 + exp(A f + B)) with smoothed targets."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n_pos = int(np.sum(labels > 0))
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise CalibrationError("calibration needs both classes")

    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(labels > 0, hi, lo)

    min_step, sigma, tol = 1e-10, 1e-12, 1e-5
    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))

    def nll(a_, b_):
        z = a_ * scores + b_
        # t*z + log(1 + exp(-z)) evaluated stably on both tails
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)),
                                     (t - 1.0) * z + np.log1p(np.exp(z)))))

    fval = nll(a, b)
    for _ in range(max_iter):
        z = a * scores + b
        p = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))
        q = 1.0 - p
        d2 = p * q
        h11 = float(np.sum(scores * scores * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(scores * d2))
        d1 = t - p
        g1 = float(np.sum(scores * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < tol and abs(g2) < tol:
            return a, b
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            na, nb = a + step * da, b + step * db
            nf = nll(na, nb)
            if nf < fval + 1e-4 * step * gd:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            raise CalibrationError("sigmoid line search failed")
    raise CalibrationError(f"sigmoid fit did not converge in {max_iter} iterations")


def platt_calibrate(model: ClassifierModel, holdout: LabeledSet) -> tuple[float, float]:
    """Fit (A, B) on held-out decision values; A < 0 for a positively oriented model."""
    if len(holdout) == 0:
        raise ValueError("empty holdout set")
    return fit_sigmoid(model.decision(holdout.X), holdout.y)


def _fold_indices(y: np.ndarray, folds: int) -> list[np.ndarray]:
    """Deterministic stratified folds: round-robin within each class in input order."""
    assignment = np.empty(len(y), dtype=np.int64)
    for cls in (-1.0, 1.0):
        members = np.nonzero(y == cls)[0]
        assignment[members] = np.arange(len(members)) % folds
    return [np.nonzero(assignment == f)[0] for f in range(folds)]


def train_calibrated(data: LabeledSet, C: float = 1.0, folds: int = 3) -> ClassifierModel:
    """Final model trained on all data; sigmoid fit on pooled out-of-fold scores."""
    scores = np.empty(len(data))
    for fold in _fold_indices(data.y, folds):
        rest = np.setdiff1d(np.arange(len(data)), fold)
        part = train_svm(data.subset(rest), C=C)
        scores[fold] = part.decision(data.X[fold])
    a, b = fit_sigmoid(scores, data.y)
    final = train_svm(data, C=C)
    return replace(final, platt=(a, b))


def evaluate(model: ClassifierModel, test: LabeledSet) -> EvalReport:
    """Percent accuracy and percent mean probability on the true class."""
    if len(test) == 0:
        raise ValueError("empty test set")
    correct = model.predict(test.X) == test.y
    p_pos = model.prob_positive(test.X)
    p_true = np.where(test.y > 0, p_pos, 1.0 - p_pos)
    return EvalReport(
        accuracy=100.0 * float(np.mean(correct)),
        calibration=100.0 * float(np.mean(p_true)),
    )


def write_model(model: ClassifierModel, grid: SampleGrid, depth: int, path) -> None:
    """Text format: ``N,K,C,A,B,bias`` header plus sparse ``index,value`` weights."""
    if model.platt is None:
        raise ValueError("write_model expects a calibrated model")
    a, b = model.platt
    lines = [
        "N,K,C,A,B,bias",
        ",".join(
            [str(grid.n_intervals), str(depth)]
            + [format(x, ".17g") for x in (model.C, a, b, model.b)]
        ),
        "index,value",
    ]
    idx = np.nonzero(model.w)[0]
    lines += [f"{int(i)},{format(model.w[i], '.17g')}" for i in idx]
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> tuple[ClassifierModel, int, int]:
    """Model plus the (N, K) it was trained for."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 3 or lines[0] != "N,K,C,A,B,bias" or lines[2] != "index,value":
        raise ValueError(f"{path}: not a model file")
    n_str, k_str, c_str, a_str, b_str, bias_str = lines[1].split(",")
    n, k = int(n_str), int(k_str)
    w = np.zeros(2 * (n + 1) * k)
    for ln in lines[3:]:
        i_str, val_str = ln.split(",")
        w[int(i_str)] = float(val_str)
    model = ClassifierModel(
        w=w, b=float(bias_str), C=float(c_str), platt=(float(a_str), float(b_str))
    )
    return model, n, k
