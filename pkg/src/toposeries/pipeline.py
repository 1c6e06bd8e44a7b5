"""End-to-end processing of series windows into topological features.

Every stage is a pure function of (series, config); batch helpers only add
ordering, optional process-level parallelism and per-series error capture.
"""

from __future__ import annotations

import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Callable, Sequence

import numpy as np

from .embedding import center, sliding_window
from .persistence import FieldSpec, PersistenceDiagram, reduce
from .represent import (
    SampledCurve,
    betti_curve,
    impute_curve_median,
    persistence_entropy,
    uniform_grid,
)
from .rips import ENCLOSING, distance_matrix, rips_filtration
from .signal import (
    SeriesError,
    TimeSeries,
    choose_bin_size,
    estimate_delay,
    estimate_dimension,
    impute_median,
    load_series,
    sample_windows,
)

AUTO = "auto"
ENTROPY_DIMS = ("0", "1", "combined")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Flat pipeline settings. ``tau`` and ``m`` accept ``"auto"``."""

    window_len: int = 500
    tau: int | str = 1
    m: int | str = 5
    max_dim: int = 2
    max_scale: float | str = ENCLOSING
    prime: int = 6972593
    silhouette_power: float = 1.0
    entropy_threshold: float = 0.98
    entropy_dims: str = "0"
    curve_resolution: int | None = None
    prominence: float = 5.0
    test_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        for name in ("window_len", "max_dim", "prime"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("tau", "m"):
            v = getattr(self, name)
            if v != AUTO and (not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v <= 0):
                raise ConfigError(f"{name} must be a positive integer or 'auto', got {v!r}")
        if self.max_scale != ENCLOSING:
            if isinstance(self.max_scale, str) or not self.max_scale > 0:
                raise ConfigError(f"max_scale must be positive or 'enclosing', got {self.max_scale!r}")
        if not self.silhouette_power > 0:
            raise ConfigError("silhouette_power must be positive")
        if not 0 < self.entropy_threshold <= 1:
            raise ConfigError("entropy_threshold must lie in (0, 1]")
        if self.entropy_dims not in ENTROPY_DIMS:
            raise ConfigError(f"entropy_dims must be one of {ENTROPY_DIMS}")
        if self.curve_resolution is not None and (
            not isinstance(self.curve_resolution, (int, np.integer)) or self.curve_resolution <= 0
        ):
            raise ConfigError("curve_resolution must be a positive integer")
        if not self.prominence > 1:
            raise ConfigError("prominence must exceed 1")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        try:
            FieldSpec(self.prime)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def resolution(self) -> int:
        return self.curve_resolution or self.window_len

    def to_dict(self) -> dict:
        d = asdict(self)
        d["curve_resolution"] = self.resolution
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if not isinstance(obj, dict) or any(isinstance(v, (dict, list)) for v in obj.values()):
            raise ConfigError("config must be a flat JSON object")
        return cls.from_dict(obj)

    def override(self, **kw) -> "PipelineConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Three equal-length channels for one window."""

    id: str
    raw: SampledCurve
    beta0: SampledCurve
    beta1: SampledCurve
    label: str = ""

    def __post_init__(self):
        if not len(self.raw) == len(self.beta0) == len(self.beta1):
            raise ValueError("feature channels differ in length")

    def channels(self, names: Sequence[str] = ("raw", "beta0", "beta1")) -> np.ndarray:
        return np.concatenate([getattr(self, n).values for n in names])

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "raw": self.raw.values.tolist(),
            "beta0": self.beta0.values.tolist(),
            "beta1": self.beta1.values.tolist(),
            "beta_grid": [float(self.beta0.grid[0]), float(self.beta0.grid[-1])],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureVector":
        r = len(obj["raw"])
        lo, hi = obj["beta_grid"]
        bgrid = uniform_grid(r, lo, hi)
        return cls(
            id=obj["id"],
            raw=SampledCurve(np.arange(r, dtype=float), obj["raw"]),
            beta0=SampledCurve(bgrid, obj["beta0"]),
            beta1=SampledCurve(bgrid, obj["beta1"]),
            label=obj.get("label") or "",
        )


# -- canonical output -----------------------------------------------------------


def _encode(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            raise ValueError("NaN cannot be exported")
        return "null" if math.isinf(x) else format(x, ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot export {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys, 17-significant-digit floats and ``null`` for infinity."""
    return _encode(obj) + "\n"


def write_text(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- per-series stages ------------------------------------------------------------


def _series_seed(seed: int, sid: str) -> int:
    return (int(seed) * 1_000_003 + zlib.crc32(sid.encode("utf-8"))) % (2**32)


def take_window(ts: TimeSeries, cfg: PipelineConfig) -> TimeSeries:
    """The series itself if it has ``window_len`` samples, else one seeded window."""
    if len(ts) == cfg.window_len:
        return ts
    if len(ts) < cfg.window_len:
        raise SeriesError(f"series {ts.id!r} has {len(ts)} samples, window needs {cfg.window_len}")
    (w,) = sample_windows(ts, cfg.window_len, 1, seed=_series_seed(cfg.seed, ts.id))
    return TimeSeries(w.values, w.missing, id=ts.id)


def embedding_params(ts: TimeSeries, cfg: PipelineConfig) -> tuple[int, int]:
    tau = estimate_delay(ts).tau if cfg.tau == AUTO else int(cfg.tau)
    m = estimate_dimension(ts, tau).m if cfg.m == AUTO else int(cfg.m)
    return tau, m


@dataclass(frozen=True)
class WindowDiagrams:
    id: str
    tau: int
    m: int
    max_scale: float
    diagrams: tuple[PersistenceDiagram, ...]


def window_diagrams(ts: TimeSeries, cfg: PipelineConfig) -> WindowDiagrams:
    """Impute, embed, center and compute Rips persistence of one window."""
    ts = impute_median(ts)
    tau, m = embedding_params(ts, cfg)
    pc = center(sliding_window(ts, m, tau))
    f = rips_filtration(distance_matrix(pc), max_dim=cfg.max_dim, max_scale=cfg.max_scale)
    dgms = reduce(f, FieldSpec(cfg.prime))
    return WindowDiagrams(ts.id, tau, m, float(f.max_scale), tuple(dgms))


def _entropy_source(wd: WindowDiagrams, dims: str) -> list[PersistenceDiagram]:
    if dims == "combined":
        return list(wd.diagrams)
    k = int(dims)
    if k >= len(wd.diagrams):
        raise SeriesError(f"no diagram of dimension {k}; raise max_dim")
    return [wd.diagrams[k]]


def window_entropy(wd: WindowDiagrams, dims: str = "0") -> float:
    """Normalised persistence entropy; infinite bars end at the filtration's max scale."""
    return persistence_entropy(_entropy_source(wd, dims), normalized=True, infinity_substitute=wd.max_scale)


def filter_decision(entropy: float, threshold: float) -> str:
    return "dropped" if entropy >= threshold else "kept"


def window_features(ts: TimeSeries, cfg: PipelineConfig, label: str = "") -> FeatureVector:
    ts = impute_median(take_window(ts, cfg))
    wd = window_diagrams(ts, cfg)
    r = cfg.resolution
    grid = uniform_grid(r, 0.0, wd.max_scale) if wd.max_scale > 0 else np.arange(r, dtype=float)
    curves = []
    for k in (0, 1):
        d = wd.diagrams[k] if k < len(wd.diagrams) else PersistenceDiagram(k)
        curves.append(impute_curve_median(betti_curve(d, grid)))
    x = ts.values
    if r == x.size:
        raw = x
    else:
        raw = np.interp(np.linspace(0, x.size - 1, r), np.arange(x.size), x)
    return FeatureVector(ts.id, SampledCurve(np.arange(r, dtype=float), raw), curves[0], curves[1], label)


def series_params(ts: TimeSeries, cfg: PipelineConfig | None = None) -> dict:
    """Delay/dimension report for one series.

    Both parameters are always estimated (``m`` at the estimated delay),
    whatever the config holds; ``cfg`` is accepted for a uniform batch call.
    """
    ts = impute_median(ts)
    bins = choose_bin_size(ts)
    de = estimate_delay(ts)
    dm = estimate_dimension(ts, de.tau)
    return {
        "id": ts.id,
        "bin_size": bins.bin_size,
        "bin_count": bins.bin_count,
        "tau": de.tau,
        "m": dm.m,
        "mi_degenerate": de.degenerate,
        "mi_profile": [[t, v] for t, v in de.mi_profile],
        "fnn_profile": [[k, v] for k, v in dm.fnn_profile],
    }


# -- batches -----------------------------------------------------------------------


def _guard(fn: Callable, item, *args):
    try:
        return True, fn(item, *args)
    except (SeriesError, ValueError, ArithmeticError) as exc:
        return False, f"{type(exc).__name__}: {exc}"


def run_batch(fn: Callable, items: Sequence, *args, workers: int = 1) -> list[tuple[bool, Any]]:
    """Apply ``fn(item, *args)`` to every item, capturing per-item failures.

    Results keep input order whatever the worker count.
    """
    if workers <= 1 or len(items) <= 1:
        return [_guard(fn, it, *args) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_guard, fn, it, *args) for it in items]
        return [f.result() for f in futs]


SERIES_SUFFIXES = (".csv", ".txt", ".tsv", ".dat")


def list_inputs(path: str | os.PathLike) -> list[str]:
    """Series files under ``path`` (a file or a directory), sorted by name."""
    path = os.fspath(path)
    if os.path.isfile(path):
        return [path]
    if not os.path.isdir(path):
        raise FileNotFoundError(f"input {path!r} does not exist")
    names = sorted(n for n in os.listdir(path) if n.lower().endswith(SERIES_SUFFIXES))
    return [os.path.join(path, n) for n in names]


def read_labels(path: str | os.PathLike) -> dict[str, str]:
    """Two-column ``id,class`` file; a header row ``id,...`` is skipped."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 2:
                raise ValueError(f"labels line {lineno}: expected 'id,class'")
            if lineno == 1 and parts[0].lower() == "id":
                continue
            out[parts[0]] = parts[1]
    return out


def load_one(path: str) -> TimeSeries:
    return load_series(path)


# -- baseline classifier -------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: dict
    degenerate: bool
    n_train: int
    n_test: int

    def to_dict(self) -> dict:
        return asdict(self)


def _matrix(records: Sequence[FeatureVector], channels: Sequence[str]) -> np.ndarray:
    lengths = {tuple(len(getattr(r, c)) for c in channels) for r in records}
    if len(lengths) != 1:
        raise ValueError("channel lengths differ between records")
    return np.stack([r.channels(channels) for r in records])


def nearest_neighbor_predict(train: np.ndarray, labels: Sequence[str], test: np.ndarray) -> list[str]:
    """1-NN by Euclidean distance; ties go to the earliest training record."""
    sq = (test**2).sum(1)[:, None] + (train**2).sum(1)[None, :] - 2.0 * test @ train.T
    return [labels[i] for i in np.argmin(sq, axis=1)]


def classification_report(y_true: Sequence[str], y_pred: Sequence[str], n_train: int = 0) -> ClassificationReport:
    classes = sorted(set(y_true) | set(y_pred))
    per = {}
    for c in classes:
        tp = sum(t == c and p == c for t, p in zip(y_true, y_pred))
        fp = sum(t != c and p == c for t, p in zip(y_true, y_pred))
        fn = sum(t == c and p != c for t, p in zip(y_true, y_pred))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per[c] = {"precision": prec, "recall": rec, "f1": f1, "support": tp + fn}
    acc = sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)
    return ClassificationReport(
        accuracy=acc,
        precision=float(np.mean([v["precision"] for v in per.values()])),
        recall=float(np.mean([v["recall"] for v in per.values()])),
        f1=float(np.mean([v["f1"] for v in per.values()])),
        per_class=per,
        degenerate=len(classes) < 2,
        n_train=n_train,
        n_test=len(y_true),
    )


def classify_baseline(
    train: Sequence[FeatureVector],
    test: Sequence[FeatureVector],
    channels: Sequence[str] = ("raw", "beta0", "beta1"),
) -> ClassificationReport:
    """1-NN on the concatenated channels, with macro-averaged metrics."""
    if not train or not test:
        raise ValueError("train and test sets must be nonempty")
    for r in list(train) + list(test):
        if not r.label:
            raise ValueError(f"record {r.id!r} has no label")
    xtr = _matrix(train, channels)
    xte = _matrix(test, channels)
    if xtr.shape[1] != xte.shape[1]:
        raise ValueError("train and test channel lengths differ")
    pred = nearest_neighbor_predict(xtr, [r.label for r in train], xte)
    return classification_report([r.label for r in test], pred, n_train=len(train))


def split_records(records: Sequence[FeatureVector], test_fraction: float, seed: int):
    """Per-class seeded split; each class keeps at least one training record."""
    by_class: dict[str, list[FeatureVector]] = {}
    for r in records:
        by_class.setdefault(r.label, []).append(r)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in sorted(by_class):
        group = sorted(by_class[label], key=lambda r: r.id)
        if not label:
            raise ValueError("unlabelled record in classification input")
        perm = rng.permutation(len(group))
        n_test = min(len(group) - 1, int(round(test_fraction * len(group))))
        test.extend(group[i] for i in perm[:n_test])
        train.extend(group[i] for i in perm[n_test:])
    if not test:
        raise ValueError("split produced an empty test set")
    return train, test
