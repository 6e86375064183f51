"""Decision rules on a pot-pot (or depth-depth) plot.

All rules are homogeneous: scaling the whole plot by a positive constant does
not change any decision.  Ties are resolved toward the class with the larger
prior and then toward the smaller class index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .potentials import PotPotPlot

DIAGONAL = "diagonal"
KNN = "knn"
ALPHA = "alpha"


@dataclass(frozen=True)
class SeparatorKind:
    """What to train on a plot; ``k_max=None`` uses :func:`default_k_max`."""

    name: str = DIAGONAL
    k_max: int | None = None
    max_degree: int = 3
    aggregation: str = "ovo"
    degree_folds: int = 10

    def __post_init__(self):
        if self.name not in (DIAGONAL, KNN, ALPHA):
            raise ValueError(f"unknown separator {self.name!r}")
        if self.aggregation not in ("ovo", "ova"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if not 1 <= self.max_degree <= 3:
            raise ValueError("alpha degree must lie in 1..3")


def default_k_max(n: int) -> int:
    # grows to infinity while k_max / n -> 0
    return max(1, min(n - 1, int(2 * math.sqrt(n))))


def _preference(priors) -> np.ndarray:
    """Class indices (0-based) ordered by descending prior, then ascending index."""
    priors = np.asarray(priors, dtype=float)
    return np.array(sorted(range(priors.size), key=lambda i: (-priors[i], i)))


def _argmax_with_priors(scores: np.ndarray, priors) -> np.ndarray:
    """Row-wise argmax (1-based labels) with ties resolved by prior, then index."""
    order = _preference(priors)
    return order[np.argmax(scores[:, order], axis=1)] + 1


# ---------------------------------------------------------------------------
# diagonal


@dataclass(frozen=True)
class Diagonal:
    priors: np.ndarray

    def classify(self, z) -> np.ndarray:
        return _argmax_with_priors(np.atleast_2d(np.asarray(z, dtype=float)), self.priors)


def classify_diagonal(z, priors=None) -> int:
    z = np.asarray(z, dtype=float)
    if priors is None:
        priors = np.full(z.shape[-1], 1.0 / z.shape[-1])
    return int(Diagonal(np.asarray(priors)).classify(z[None, :])[0])


# ---------------------------------------------------------------------------
# k-NN on the plot


def _plot_scale(z: np.ndarray) -> float:
    m = float(np.max(z)) if z.size else 0.0
    return m if m > 0 else 1.0


def _vote(neighbor_labels: np.ndarray, q: int, priors) -> np.ndarray:
    """Majority label per row and prefix length.

    ``neighbor_labels`` has shape (m, K); the result (m, K) holds the vote
    winner among the first k neighbours for every k = 1..K.
    """
    m, kk = neighbor_labels.shape
    counts = np.zeros((m, kk, q), dtype=np.int64)
    for c in range(q):
        counts[:, :, c] = np.cumsum(neighbor_labels == c + 1, axis=1)
    # counts are integers, so adding a fractional preference rank only breaks ties
    pref = np.empty(q)
    pref[_preference(priors)] = np.arange(q, 0, -1) / (q + 1.0)
    return np.argmax(counts + pref, axis=2) + 1


@dataclass(frozen=True)
class KnnPlot:
    k: int
    reference: np.ndarray  # scaled reference rows
    labels: np.ndarray
    priors: np.ndarray
    scale: float
    loo_errors: np.ndarray | None = None

    def classify(self, z) -> np.ndarray:
        zq = np.atleast_2d(np.asarray(z, dtype=float)) / self.scale
        d2 = ((zq[:, None, :] - self.reference[None, :, :]) ** 2).sum(axis=2)
        nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return _vote(self.labels[nn], self.reference.shape[1], self.priors)[:, -1]


def knn_loo_errors(plot: PotPotPlot, k_max: int) -> np.ndarray:
    """Leave-one-out misclassification counts for k = 1..k_max."""
    z = plot.z / _plot_scale(plot.z)
    d2 = ((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k_max]
    pred = _vote(plot.labels[nn], plot.q, plot.priors)
    return (pred != plot.labels[:, None]).sum(axis=0)


def train_knn_plot(plot: PotPotPlot, k_max: int | None = None) -> KnnPlot:
    if plot.n == 0:
        raise ValueError("empty plot")
    if k_max is None:
        k_max = default_k_max(plot.n)
    if not 1 <= k_max < plot.n:
        raise ValueError(f"k_max must lie in 1..n-1 (n={plot.n}), got {k_max}")
    errors = knn_loo_errors(plot, k_max)
    k = int(np.argmin(errors)) + 1  # first minimum = smallest k
    scale = _plot_scale(plot.z)
    return KnnPlot(k, plot.z / scale, plot.labels, plot.priors, scale, errors)


def classify_knn_plot(sep: KnnPlot, z) -> int:
    return int(sep.classify(np.asarray(z, dtype=float)[None, :])[0])


# ---------------------------------------------------------------------------
# exact line through the origin


_MIN_GAP = 1e-12


def _realized_errors(cx, sx, f, g, y, zero_positive: bool) -> np.ndarray:
    score = cx[:, None] * f + sx[:, None] * g
    positive = np.where(score == 0, zero_positive, score > 0)
    return ((positive & (y < 0)) | (~positive & (y > 0))).sum(axis=1)


def _batch_origin_search(f: np.ndarray, g: np.ndarray, y: np.ndarray, zero_positive: bool):
    """Best origin line for each row of the (P, n) feature pairs ``(f, g)``.

    ``y`` holds +1 (positive class) / -1.  A point is positive when
    ``c f + s g > 0``; a zero score takes the class ``zero_positive`` selects.
    Every point contributes two events to an angular sweep of the normal
    ``(c, s)``.  Candidates are the midpoints of the open gaps between events
    and the event directions themselves, where the line passes through data
    points (normals there are exact quarter turns of a point, so collinear
    points score exactly 0).  Returns ``(c, s, errors)``; errors are recounted
    from the returned normals, and a gap wins ties because it keeps a margin.
    """
    f = np.atleast_2d(f)
    g = np.atleast_2d(g)
    p, n = f.shape
    rows = np.arange(p)
    at_origin = (f == 0) & (g == 0)
    if at_origin.all(axis=1).any():
        raise ValueError("all points at origin")
    phi = np.arctan2(g, f)
    two_pi = 2 * math.pi
    enter = np.mod(phi - math.pi / 2, two_pi)
    leave = np.mod(phi + math.pi / 2, two_pi)
    yy = np.broadcast_to(y, (p, n)).astype(np.int64)
    d_enter = np.where(at_origin, 0, -yy)
    d_leave = np.where(at_origin, 0, yy)
    # origin points get dummy events stacked on an existing angle
    anchor = enter[rows, np.argmax(~at_origin, axis=1)][:, None]
    enter = np.where(at_origin, anchor, enter)
    leave = np.where(at_origin, anchor, leave)

    angles = np.concatenate([enter, leave], axis=1)
    deltas = np.concatenate([d_enter, d_leave], axis=1)
    is_enter = np.concatenate([np.ones((p, n), bool), np.zeros((p, n), bool)], axis=1)
    order = np.argsort(angles, axis=1, kind="stable")
    angles = np.take_along_axis(angles, order, axis=1)
    deltas = np.take_along_axis(deltas, order, axis=1)
    is_enter = np.take_along_axis(is_enter, order, axis=1)

    widths = np.empty_like(angles)
    widths[:, :-1] = angles[:, 1:] - angles[:, :-1]
    widths[:, -1] = angles[:, 0] + two_pi - angles[:, -1]
    mids = angles + widths / 2

    wrap = mids[:, -1]
    err_wrap = _realized_errors(np.cos(wrap), np.sin(wrap), f, g, yy, zero_positive)
    csum = np.cumsum(deltas, axis=1)
    errs = err_wrap[:, None] + csum
    errs[:, -1] = err_wrap
    big = np.iinfo(np.int64).max
    gap_errs = np.where(widths > _MIN_GAP, errs, big)
    best_gap = gap_errs.min(axis=1)
    # among optimal gaps take the widest (largest angular margin), then the first
    k = np.argmax(np.where(gap_errs == best_gap[:, None], widths, -1.0), axis=1)
    t_gap = mids[rows, k]
    c_gap, s_gap = np.cos(t_gap), np.sin(t_gap)

    # exactly on an event angle the points on the line score 0: with
    # zero_positive the entering ones already count as positive, otherwise
    # the leaving ones already count as negative
    same = np.zeros_like(is_enter)
    same[:, 1:] = angles[:, 1:] - angles[:, :-1] <= _MIN_GAP
    idx = np.broadcast_to(np.arange(2 * n), (p, 2 * n))
    first = np.maximum.accumulate(np.where(same, 0, idx), axis=1)
    ends_here = np.ones_like(same)
    ends_here[:, :-1] = ~same[:, 1:]
    last = np.minimum.accumulate(np.where(ends_here, idx, 2 * n)[:, ::-1], axis=1)[:, ::-1]
    on_line = is_enter if zero_positive else ~is_enter
    esum = np.cumsum(np.where(on_line, deltas, 0), axis=1)
    zero = np.zeros((p, 1), dtype=np.int64)
    csum0 = np.concatenate([zero, csum], axis=1)
    esum0 = np.concatenate([zero, esum], axis=1)
    at_event = (err_wrap[:, None] + np.take_along_axis(csum0, first, axis=1)
                + np.take_along_axis(esum0, last + 1, axis=1) - np.take_along_axis(esum0, first, axis=1))
    e = np.argmin(at_event, axis=1)
    # the event's own point fixes an exact normal: a quarter turn of (f, g)
    point = np.mod(order[rows, e], n)
    fe, ge = f[rows, point], g[rows, point]
    norm = np.hypot(fe, ge)
    norm = np.where(norm > 0, norm, 1.0)
    sign = np.where(order[rows, e] < n, 1.0, -1.0)  # enter: (g, -f); leave: (-g, f)
    c_ev, s_ev = sign * ge / norm, -sign * fe / norm

    err_gap = _realized_errors(c_gap, s_gap, f, g, yy, zero_positive)
    err_ev = _realized_errors(c_ev, s_ev, f, g, yy, zero_positive)
    use_ev = err_ev < err_gap
    return (np.where(use_ev, c_ev, c_gap), np.where(use_ev, s_ev, s_gap),
            np.where(use_ev, err_ev, err_gap))


def _count_errors(score: np.ndarray, y: np.ndarray, zero_positive: bool) -> int:
    positive = np.where(score == 0, zero_positive, score > 0)
    return int(((positive & (y < 0)) | (~positive & (y > 0))).sum())


def exact_origin_line_search(points2d, zero_positive: bool = True) -> tuple[float, int]:
    """Minimise misclassifications over all lines through the origin.

    ``points2d`` rows are ``(u, v, label)`` with label 1 on the positive side.
    Returns the angle ``theta`` of the normal ``(cos theta, sin theta)`` and the
    error count.
    """
    arr = np.asarray(points2d, dtype=float)
    f, g = arr[:, 0], arr[:, 1]
    y = np.where(arr[:, 2] == 1, 1, -1)
    if np.all((f == 0) & (g == 0)):
        raise ValueError("all points at origin")
    c, s, err = _batch_origin_search(f[None, :], g[None, :], y, zero_positive)
    return float(math.atan2(s[0], c[0])) % (2 * math.pi), int(err[0])


# ---------------------------------------------------------------------------
# alpha-procedure


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[int, int]
    weight: float


def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    return [(a, deg - a) for deg in range(1, degree + 1) for a in range(deg, -1, -1)]


@dataclass(frozen=True)
class Alpha:
    """Polynomial discriminant ``sum w * z1^a * z2^b``; nonnegative values mean class 1."""

    degree: int
    monomials: tuple[Monomial, ...]
    priors: np.ndarray
    scale: float
    training_errors: tuple[int, ...] = ()

    def discriminant(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float)) / self.scale
        out = np.zeros(z.shape[0])
        for m in self.monomials:
            a, b = m.exponents
            out += m.weight * z[:, 0] ** a * z[:, 1] ** b
        return out

    def classify(self, z) -> np.ndarray:
        s = self.discriminant(z)
        zero_label = 1 if self.priors[0] >= self.priors[1] else 2
        return np.where(s > 0, 1, np.where(s < 0, 2, zero_label))


def _alpha_fit(z: np.ndarray, y: np.ndarray, degree: int, zero_positive: bool):
    """Run the alpha-procedure on a pre-scaled plot; returns (weights, exponents, errors)."""
    exps = monomial_exponents(degree)
    feats = np.stack([z[:, 0] ** a * z[:, 1] ** b for a, b in exps])
    norms = np.abs(feats).max(axis=1)
    usable = norms > 0
    exps = [e for e, u in zip(exps, usable) if u]
    feats = feats[usable] / norms[usable, None]
    norms = norms[usable]
    nf = len(exps)
    if nf == 0:
        raise ValueError("degenerate plot")
    if nf == 1:
        # one informative feature: sign of it, or its negation
        errs = [_count_errors(s * feats[0], y, zero_positive) for s in (1.0, -1.0)]
        w = np.array([1.0 if errs[0] <= errs[1] else -1.0])
        return w / norms, exps, [min(errs)]

    pairs = list(combinations(range(nf), 2))
    ia = np.array([p[0] for p in pairs])
    ib = np.array([p[1] for p in pairs])
    cs, sn, err = _batch_origin_search(feats[ia], feats[ib], y, zero_positive)
    best = int(np.argmin(err))  # first pair on ties: (z1, z2) leads the list
    weights = np.zeros(nf)
    weights[ia[best]] = cs[best]
    weights[ib[best]] = sn[best]
    current = weights @ feats
    cur_err = _count_errors(current, y, zero_positive)
    history = [cur_err]
    remaining = [i for i in range(nf) if i not in (ia[best], ib[best])]

    while remaining and cur_err > 0:
        scale = np.abs(current).max()
        if scale == 0:
            break
        r = current / scale
        rem = np.array(remaining)
        cs, sn, err = _batch_origin_search(np.broadcast_to(r, (rem.size, r.size)), feats[rem], y,
                                           zero_positive)
        k = int(np.argmin(err))
        cand = cs[k] * r + sn[k] * feats[rem[k]]
        cand_err = _count_errors(cand, y, zero_positive)
        if cand_err >= cur_err:
            break
        weights = cs[k] * weights / scale
        weights[rem[k]] += sn[k]
        current = cand
        cur_err = cand_err
        history.append(cur_err)
        remaining.remove(int(rem[k]))
    return weights / norms, exps, history


def _stratified_folds(labels: np.ndarray, k: int) -> np.ndarray:
    """Deterministic fold ids: round-robin within each class in data order."""
    fold = np.empty(labels.shape[0], dtype=int)
    offset = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        fold[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return fold


def _train_alpha_degree(plot: PotPotPlot, degree: int) -> Alpha:
    scale = _plot_scale(plot.z)
    z = plot.z / scale
    y = np.where(plot.labels == 1, 1, -1)
    zero_positive = bool(plot.priors[0] >= plot.priors[1])
    w, exps, hist = _alpha_fit(z, y, degree, zero_positive)
    # orientation: class 1 should sit mostly on the nonnegative side
    s = sum(wi * z[:, 0] ** a * z[:, 1] ** b for wi, (a, b) in zip(w, exps))
    if _count_errors(-s, y, zero_positive) < _count_errors(s, y, zero_positive):
        w = -w
    monos = tuple(Monomial(e, float(wi)) for e, wi in zip(exps, w) if wi != 0)
    return Alpha(degree, monos, plot.priors, scale, tuple(hist))


def select_alpha_degree(plot: PotPotPlot, max_degree: int, folds: int = 10) -> tuple[int, np.ndarray]:
    """Cross-validated degree on the plot; returns (degree, misclassification counts per degree)."""
    if max_degree == 1:
        return 1, np.zeros(1, dtype=int)
    k = min(folds, plot.n)
    fold = _stratified_folds(plot.labels, k)
    errors = np.zeros(max_degree, dtype=int)
    for f in range(k):
        test = fold == f
        train = ~test
        if not test.any():
            continue
        sub = PotPotPlot(plot.z[train], plot.labels[train], plot.priors)
        if np.unique(sub.labels).size < 2:
            errors += int(test.sum())
            continue
        for p in range(1, max_degree + 1):
            try:
                sep = _train_alpha_degree(sub, p)
            except ValueError:
                errors[p - 1] += int(test.sum())
                continue
            errors[p - 1] += int((sep.classify(plot.z[test]) != plot.labels[test]).sum())
    return int(np.argmin(errors)) + 1, errors


def train_alpha(plot: PotPotPlot, max_degree: int = 3, folds: int = 10) -> Alpha:
    if plot.q != 2:
        raise ValueError("the alpha-procedure separates two classes; aggregate for q > 2")
    if not 1 <= max_degree <= 3:
        raise ValueError("max_degree must lie in 1..3")
    if np.ptp(plot.z, axis=0).max() == 0:
        raise ValueError("degenerate plot: all points identical")
    degree, _ = select_alpha_degree(plot, max_degree, folds)
    return _train_alpha_degree(plot, degree)


def classify_alpha(sep: Alpha, z) -> int:
    return int(sep.classify(np.asarray(z, dtype=float)[None, :])[0])


# ---------------------------------------------------------------------------
# more than two classes


@dataclass(frozen=True)
class OneVsOne:
    """Majority vote of pairwise separators, each on its pair's two plot columns."""

    pairs: tuple[tuple[int, int], ...]
    separators: tuple
    priors: np.ndarray

    def classify(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        votes = np.zeros((z.shape[0], self.priors.size))
        for (a, b), sep in zip(self.pairs, self.separators):
            win = sep.classify(z[:, [a - 1, b - 1]])
            votes[:, a - 1] += win == 1
            votes[:, b - 1] += win == 2
        return _argmax_with_priors(votes, self.priors)


@dataclass(frozen=True)
class OneVsAll:
    """Class ``j`` against the pooled rest, plotted as ``(z_j, sum of other z)``.

    Among classes whose separator claims the point, the one with the largest
    potential margin ``z_j - sum_{k != j} z_k`` wins; if none claims it, the
    largest margin overall decides.
    """

    separators: tuple
    priors: np.ndarray

    def classify(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        total = z.sum(axis=1)
        q = z.shape[1]
        claims = np.zeros((z.shape[0], q), dtype=bool)
        margins = np.empty((z.shape[0], q))
        for j, sep in enumerate(self.separators):
            rest = total - z[:, j]
            claims[:, j] = sep.classify(np.column_stack([z[:, j], rest])) == 1
            margins[:, j] = z[:, j] - rest
        any_claim = claims.any(axis=1)
        score = np.where(claims | ~any_claim[:, None], margins, -np.inf)
        return _argmax_with_priors(score, self.priors)


def _binary_plot(z, labels, priors_pair) -> PotPotPlot:
    return PotPotPlot(z, labels, np.asarray(priors_pair, dtype=float))


def train_one_vs_one(plot: PotPotPlot, binary: SeparatorKind) -> OneVsOne:
    pairs, seps = [], []
    for a, b in combinations(range(1, plot.q + 1), 2):
        mask = (plot.labels == a) | (plot.labels == b)
        sub_labels = np.where(plot.labels[mask] == a, 1, 2)
        sub = _binary_plot(plot.z[mask][:, [a - 1, b - 1]], sub_labels,
                           [plot.priors[a - 1], plot.priors[b - 1]])
        pairs.append((a, b))
        seps.append(train_separator(binary, sub))
    return OneVsOne(tuple(pairs), tuple(seps), plot.priors)


def train_one_vs_all(plot: PotPotPlot, binary: SeparatorKind) -> OneVsAll:
    seps = []
    total = plot.z.sum(axis=1)
    for j in range(1, plot.q + 1):
        zz = np.column_stack([plot.z[:, j - 1], total - plot.z[:, j - 1]])
        lab = np.where(plot.labels == j, 1, 2)
        p = plot.priors[j - 1]
        seps.append(train_separator(binary, _binary_plot(zz, lab, [p, 1 - p])))
    return OneVsAll(tuple(seps), plot.priors)


def classify_multiclass(model, aggregation: str, z) -> int:
    """Classify one plot row with an aggregated separator (``ovo`` or ``ova``)."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] <= 2:
        raise ValueError("aggregation is for q > 2")
    expected = OneVsOne if aggregation == "ovo" else OneVsAll
    if not isinstance(model, expected):
        raise TypeError(f"model is not a {expected.__name__} aggregate")
    return int(model.classify(z[None, :])[0])


def train_separator(kind: SeparatorKind, plot: PotPotPlot):
    """Train the separator ``kind`` on ``plot``; anything with ``.classify(z)`` comes back."""
    if kind.name == DIAGONAL:
        return Diagonal(plot.priors)
    if kind.name == KNN:
        return train_knn_plot(plot, kind.k_max if kind.k_max is None else min(kind.k_max, plot.n - 1))
    if plot.q == 2:
        return train_alpha(plot, kind.max_degree, kind.degree_folds)
    if kind.aggregation == "ovo":
        return train_one_vs_one(plot, kind)
    return train_one_vs_all(plot, kind)
