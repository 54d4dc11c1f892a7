"""Two-class Gaussian-mixture classifier.

Per class, a diagonal-covariance mixture is fit by EM on z-scored features
(statistics from the training split only).  Means are initialized by
farthest-point seeding from a seeded generator, every M-step floors the
variances, and the whole fit is deterministic given the seed.  The component
count is grid-searched on a stratified 80:20 split of the training data.

Decision rule: argmax of class log-likelihood plus log prior; exact ties go
to speech so confusion matrices are reproducible.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, InputError

LABELS = ("speech", "music")
DEFAULT_K_GRID = (1, 2, 4, 8, 16, 32)

_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # floored at 1e-8

    def apply(self, X):
        return (X - self.mean) / self.std


@dataclass(eq=False)
class Mixture:
    weights: np.ndarray  # (K,), on the simplex
    means: np.ndarray  # (K, d)
    vars: np.ndarray  # (K, d), floored
    log_prior: float


@dataclass(eq=False)
class GmmModel:
    feature_kind: str
    standardizer: Standardizer
    classes: dict  # label -> Mixture
    train_meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.standardizer.mean.size


@dataclass(frozen=True)
class ClassScore:
    log_lik_speech: float
    log_lik_music: float
    decision: str
    margin: float  # speech posterior score minus music posterior score


def _logsumexp(a, axis=-1):
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def _log_densities(X, mix):
    """(n, K) log N(x | m_k, diag v_k)."""
    lv = np.log(mix.vars)
    out = np.empty((X.shape[0], mix.weights.size))
    for k in range(mix.weights.size):
        z = (X - mix.means[k]) ** 2 / mix.vars[k]
        out[:, k] = -0.5 * (z.sum(axis=1) + lv[k].sum() + X.shape[1] * _LOG2PI)
    return out


def _estep(X, mix):
    """Responsibilities and the mean per-sample log-likelihood."""
    logjoint = _log_densities(X, mix) + np.log(mix.weights)
    ll = _logsumexp(logjoint, axis=1)
    resp = np.exp(logjoint - ll[:, None])
    return resp, ll.mean()


def _farthest_point_init(X, K, rng):
    """First center uniform at random, then repeatedly the point farthest
    from the chosen set (deterministic argmax, first index on ties)."""
    centers = [int(rng.integers(X.shape[0]))]
    if K > 1:
        d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
        for _ in range(K - 1):
            nxt = int(np.argmax(d2))
            centers.append(nxt)
            d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[np.array(centers)].copy()


def _fit_mixture(X, K, rng, log_prior, max_iter=200, tol=1e-6):
    n, d = X.shape
    floor = np.maximum(1e-6 * X.var(axis=0), 1e-12)
    mix = Mixture(
        weights=np.full(K, 1.0 / K),
        means=_farthest_point_init(X, K, rng),
        vars=np.maximum(np.tile(X.var(axis=0), (K, 1)), floor),
        log_prior=log_prior,
    )
    trace = []
    for _ in range(max_iter):
        resp, ll = _estep(X, mix)
        trace.append(ll)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= tol * max(1.0, abs(trace[-1])):
            break
        for k in range(K):
            r = resp[:, k]
            nk = r.sum() + 1e-300
            mean = (r[:, None] * X).sum(axis=0) / nk
            var = (r[:, None] * (X - mean) ** 2).sum(axis=0) / nk
            mix.weights[k] = nk / n
            mix.means[k] = mean
            mix.vars[k] = np.maximum(var, floor)
        mix.weights /= mix.weights.sum()
    return mix, trace


def _collect(train):
    """Validate a labeled vector set and return (kind, {label: (n, d) array})."""
    if not train:
        raise InputError("empty training set")
    kinds = {f.kind for f in train}
    if len(kinds) != 1:
        raise InputError(f"mixed feature kinds in training set: {sorted(kinds)}")
    dims = {f.values.size for f in train}
    if len(dims) != 1:
        raise InputError(f"mixed feature dimensions in training set: {sorted(dims)}")
    by_label = {}
    for f in train:
        if f.label not in LABELS:
            raise InputError(f"unlabeled or unknown-label vector: {f.label!r}")
        by_label.setdefault(f.label, []).append(f.values)
    for label in LABELS:
        if label not in by_label:
            raise FitError(f"class {label!r} has no training vectors")
    return kinds.pop(), {lab: np.stack(v) for lab, v in by_label.items()}


def fit_gmm(train, K, seed=0):
    """Fit one K-component diagonal GMM per class on z-scored features."""
    kind, data = _collect(train)
    d = next(iter(data.values())).shape[1]
    for label in LABELS:
        if data[label].shape[0] < K * d:
            raise FitError(
                f"class {label!r} has {data[label].shape[0]} vectors; "
                f"K={K} with dim {d} needs at least {K * d}"
            )
    pooled = np.concatenate([data[lab] for lab in LABELS])
    std = Standardizer(
        mean=pooled.mean(axis=0), std=np.maximum(pooled.std(axis=0), 1e-8)
    )
    n_total = pooled.shape[0]
    classes = {}
    trace = {}
    rng = np.random.default_rng(seed)
    for label in LABELS:
        X = std.apply(data[label])
        log_prior = math.log(data[label].shape[0] / n_total)
        classes[label], trace[label] = _fit_mixture(X, K, rng, log_prior)
    return GmmModel(
        feature_kind=kind,
        standardizer=std,
        classes=classes,
        train_meta={"seed": seed, "k_grid": [K], "chosen_k": K, "em_trace": trace},
    )


def _stratified_indices(labels, frac, rng):
    train_idx, val_idx = [], []
    for lab in LABELS:
        idx = np.array([i for i, l in enumerate(labels) if l == lab])
        n_tr = min(max(round(frac * idx.size), 1), idx.size - 1)
        perm = rng.permutation(idx.size)
        train_idx.extend(idx[perm[:n_tr]])
        val_idx.extend(idx[perm[n_tr:]])
    return sorted(train_idx), sorted(val_idx)


def grid_search(train, grid=DEFAULT_K_GRID, seed=0):
    """Pick K from the grid by macro-F on a stratified 80:20 split of the
    training data (ties to the smaller K), then refit on all of it.
    Infeasible grid entries are skipped with a warning."""
    from .evaluate import confusion_matrix, f_score  # deferred: module cycle

    grid = list(grid)
    if not grid:
        raise FitError("empty K grid")
    kind, data = _collect(train)
    d = next(iter(data.values())).shape[1]
    rng = np.random.default_rng(seed)
    labels = [f.label for f in train]
    tr_idx, val_idx = _stratified_indices(labels, 0.8, rng)
    inner_train = [train[i] for i in tr_idx]
    inner_val = [train[i] for i in val_idx]
    inner_counts = {
        lab: sum(1 for f in inner_train if f.label == lab) for lab in LABELS
    }
    best_k, best_f, skipped, validation = None, -1.0, [], {}
    for K in sorted(set(grid)):
        if any(inner_counts[lab] < K * d for lab in LABELS):
            skipped.append(K)
            continue
        model = fit_gmm(inner_train, K, seed)
        pred = [score(model, f).decision for f in inner_val]
        fval = f_score(confusion_matrix([f.label for f in inner_val], pred))
        validation[K] = fval
        if fval > best_f:
            best_k, best_f = K, fval
    if skipped:
        warnings.warn(
            f"grid entries {skipped} skipped: fewer than K*d={d}*K training "
            "vectors in a class"
        )
    if best_k is None:
        raise FitError(f"no feasible K in grid {grid} for {d}-dim features")
    model = fit_gmm(train, best_k, seed)
    model.train_meta.update(
        {"k_grid": grid, "chosen_k": best_k, "validation_f": validation, "skipped": skipped}
    )
    return model


def _class_log_liks(model, values):
    x = model.standardizer.apply(values[None, :])
    return {
        lab: float(_logsumexp(_log_densities(x, mix) + np.log(mix.weights), axis=1)[0])
        for lab, mix in model.classes.items()
    }


def score(model, f):
    """Bayes decision on one feature vector."""
    if f.kind != model.feature_kind:
        raise InputError(f"model expects {model.feature_kind}, got {f.kind}")
    if f.values.size != model.dim:
        raise InputError(f"model expects dim {model.dim}, got {f.values.size}")
    ll = _class_log_liks(model, f.values)
    post = {lab: ll[lab] + model.classes[lab].log_prior for lab in LABELS}
    margin = post["speech"] - post["music"]
    return ClassScore(
        log_lik_speech=ll["speech"],
        log_lik_music=ll["music"],
        decision="speech" if margin >= 0 else "music",
        margin=margin,
    )


def late_fuse_score(models, fs):
    """Combine per-feature models by a dimension-normalized sum of class
    scores (log-likelihood plus log prior, divided by that model's feature
    dimension so no single feature dominates)."""
    expected = ("sps_p", "sps_zcr", "sps_scg")
    if sorted(models) != sorted(expected) or sorted(fs) != sorted(expected):
        raise InputError(f"late fusion needs models/features for kinds {expected}")
    prov = {(fs[k].source_id, fs[k].interval_index) for k in fs}
    if len(prov) != 1:
        raise InputError(f"provenance mismatch in late fusion: {sorted(prov)}")
    fused = {lab: 0.0 for lab in LABELS}
    for kind in expected:
        model, f = models[kind], fs[kind]
        if f.kind != model.feature_kind:
            raise InputError(f"model/feature kind mismatch for {kind}")
        ll = _class_log_liks(model, f.values)
        for lab in LABELS:
            fused[lab] += (ll[lab] + model.classes[lab].log_prior) / model.dim
    margin = fused["speech"] - fused["music"]
    return ClassScore(
        log_lik_speech=fused["speech"],
        log_lik_music=fused["music"],
        decision="speech" if margin >= 0 else "music",
        margin=margin,
    )


# ---------------------------------------------------------------------------
# model file format: versioned plain text, 17 significant digits

def _fmt(values):
    return " ".join(f"{v:.17g}" for v in np.atleast_1d(values))


def model_to_text(model):
    meta = model.train_meta
    lines = [
        "spsgmm v1",
        "meta",
        f"feature_kind {model.feature_kind}",
        f"dim {model.dim}",
        f"seed {meta.get('seed', 0)}",
        "k_grid " + ",".join(str(k) for k in meta.get("k_grid", [])),
        f"chosen_k {meta.get('chosen_k', model.classes['speech'].weights.size)}",
        "standardizer",
        f"mean {_fmt(model.standardizer.mean)}",
        f"std {_fmt(model.standardizer.std)}",
    ]
    for label in LABELS:
        mix = model.classes[label]
        lines.append(f"class {label}")
        lines.append(f"log_prior {mix.log_prior:.17g}")
        lines.append(f"weights {_fmt(mix.weights)}")
        lines.append("means")
        for row in mix.means:
            lines.append(_fmt(row))
        lines.append("vars")
        for row in mix.vars:
            lines.append(_fmt(row))
    return "\n".join(lines) + "\n"


def model_from_text(text):
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "spsgmm v1":
        raise InputError("not a spsgmm v1 model file")
    meta = {"k_grid": []}
    std_fields = {}
    classes = {}
    i = 1
    current = None  # (label, mixture fields)
    mode = None
    while i < len(lines):
        line = lines[i]
        head, _, rest = line.partition(" ")
        if head == "meta":
            mode = "meta"
        elif head == "standardizer":
            mode = "standardizer"
        elif head == "class":
            if rest not in LABELS:
                raise InputError(f"unknown class {rest!r} in model file")
            current = {"label": rest}
            classes[rest] = current
            mode = "class"
        elif mode == "meta":
            if head == "k_grid":
                meta["k_grid"] = [int(k) for k in rest.split(",") if k]
            elif head in ("seed", "chosen_k", "dim"):
                meta[head] = int(rest)
            else:
                meta[head] = rest
        elif mode == "standardizer":
            std_fields[head] = np.array([float(v) for v in rest.split()])
        elif mode == "class":
            if head in ("means", "vars"):
                rows = []
                K = current["weights"].size
                for _ in range(K):
                    i += 1
                    rows.append([float(v) for v in lines[i].split()])
                current[head] = np.array(rows)
            elif head == "log_prior":
                current[head] = float(rest)
            elif head == "weights":
                current[head] = np.array([float(v) for v in rest.split()])
            else:
                raise InputError(f"unexpected line in model file: {line!r}")
        else:
            raise InputError(f"unexpected line in model file: {line!r}")
        i += 1
    missing = [lab for lab in LABELS if lab not in classes]
    if missing or "mean" not in std_fields or "std" not in std_fields:
        raise InputError(f"model file incomplete (missing {missing or 'standardizer'})")
    mixes = {
        lab: Mixture(
            weights=c["weights"],
            means=c["means"],
            vars=c["vars"],
            log_prior=c["log_prior"],
        )
        for lab, c in classes.items()
    }
    return GmmModel(
        feature_kind=meta.get("feature_kind", ""),
        standardizer=Standardizer(mean=std_fields["mean"], std=std_fields["std"]),
        classes=mixes,
        train_meta=meta,
    )


def save_model(model, path):
    from ._util import atomic_write_text

    atomic_write_text(path, model_to_text(model))


def load_model(path):
    with open(path, "r", encoding="utf-8") as f:
        return model_from_text(f.read())
