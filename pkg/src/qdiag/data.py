"""Vibration-signal pipeline: ingest, downsample, segment, featurize, split.

A raw record is an acceleration trace with a sample rate and a class label
(baseline, outer_ring, inner_ring).  The pipeline decimates every record to
one common rate, slices it into fixed-length windows with a small overlap,
and reduces each window to five time-domain features: mean, population
variance, max absolute amplitude, peak-to-peak, and rms.  Min-max
normalization is fit on training data only and clamps at application time.

There is also a seeded synthetic generator that mimics a bearing test rig
well enough for the three classes to be separable by those features, so the
full training pipeline can run without any proprietary recordings.  Real
data comes in through a plain CSV bridge documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

LABELS = ("baseline", "outer_ring", "inner_ring")
LABEL_TO_INDEX = {name: i for i, name in enumerate(LABELS)}
# Two-letter display names used in confusion-matrix output.
SHORT_LABELS = {"baseline": "ND", "outer_ring": "OR", "inner_ring": "IR"}

FEATURE_NAMES = ("mean", "variance", "max_amplitude", "peak_to_peak", "rms")
NUM_FEATURES = len(FEATURE_NAMES)

DEFAULT_SEGMENT_LENGTH = 4000
DEFAULT_SEGMENT_OVERLAP = 200
DEFAULT_TARGET_RATE_HZ = 48828.0

FEATURE_CSV_HEADER = "mean,variance,max_amplitude,peak_to_peak,rms,label"


def _check_label(label: str) -> str:
    if label not in LABEL_TO_INDEX:
        raise ValueError(f"unknown label {label!r}, expected one of {LABELS}")
    return label


@dataclass
class RawSignal:
    """One vibration record: samples at a fixed rate, plus metadata."""

    samples: np.ndarray
    sample_rate_hz: float
    label: str
    load_lbs: float = 0.0

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D array")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        _check_label(self.label)


@dataclass(frozen=True)
class Segment:
    """Fixed-length window cut from one record, carrying its label."""

    samples: np.ndarray
    label: str


@dataclass(frozen=True)
class FeatureVector:
    """The five time-domain features of one segment."""

    mean: float
    variance: float
    max_amplitude: float
    peak_to_peak: float
    rms: float
    label: str

    def values(self) -> np.ndarray:
        return np.array(
            [self.mean, self.variance, self.max_amplitude, self.peak_to_peak, self.rms]
        )


@dataclass
class NormalizerParams:
    """Per-feature min/max bounds, fit on training data only."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self) -> None:
        self.minimum = np.asarray(self.minimum, dtype=np.float64)
        self.maximum = np.asarray(self.maximum, dtype=np.float64)
        if self.minimum.shape != self.maximum.shape or self.minimum.ndim != 1:
            raise ValueError("min and max must be 1-D arrays of equal length")
        if np.any(self.maximum < self.minimum):
            raise ValueError("per-feature max must be >= min")

    @property
    def num_features(self) -> int:
        return self.minimum.size


@dataclass
class Dataset:
    """Feature matrix with integer labels and an optional train/test split."""

    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("one label per feature row required")
        if self.train_mask is not None:
            self.train_mask = np.asarray(self.train_mask, dtype=bool)
            if self.train_mask.shape != self.labels.shape:
                raise ValueError("train mask must align with labels")

    def __len__(self) -> int:
        return self.features.shape[0]

    def _masked(self, want_train: bool) -> tuple[np.ndarray, np.ndarray]:
        if self.train_mask is None:
            raise ValueError("dataset has no train/test split yet")
        pick = self.train_mask if want_train else ~self.train_mask
        return self.features[pick], self.labels[pick]

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self._masked(True)

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self._masked(False)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(LABELS))


def downsample(signal: RawSignal, target_rate_hz: float) -> RawSignal:
    """Decimate to the target rate by keeping every k-th sample.

    No anti-alias filter is applied; this is deliberate plain decimation.
    The source rate must be an integer multiple of the target rate.
    """
    if not target_rate_hz > 0:
        raise ValueError(f"target rate must be positive, got {target_rate_hz}")
    ratio = signal.sample_rate_hz / target_rate_hz
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9:
        raise ValueError(
            f"sample rate {signal.sample_rate_hz} is not an integer multiple "
            f"of target rate {target_rate_hz} (ratio {ratio})"
        )
    if k == 1:
        return signal
    return replace(signal, samples=signal.samples[::k], sample_rate_hz=target_rate_hz)


def segment_signal(
    signal: RawSignal,
    length: int = DEFAULT_SEGMENT_LENGTH,
    overlap: int = DEFAULT_SEGMENT_OVERLAP,
) -> list[Segment]:
    """Slice into windows of `length` samples, consecutive ones sharing
    `overlap` samples; the trailing remainder is discarded."""
    if not (length > overlap >= 0):
        raise ValueError(f"need length > overlap >= 0, got {length}, {overlap}")
    n = signal.samples.size
    if n < length:
        raise ValueError(f"signal of {n} samples is shorter than a {length} window")
    stride = length - overlap
    count = (n - length) // stride + 1
    return [
        Segment(signal.samples[i * stride : i * stride + length], signal.label)
        for i in range(count)
    ]


def extract_features(seg: Segment) -> FeatureVector:
    """The five time-domain features of one window.

    Variance is the population variance, which makes rms^2 = variance +
    mean^2 an exact identity (handy as a pipeline cross-check).
    """
    x = np.asarray(seg.samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot featurize an empty segment")
    mean = float(np.mean(x))
    return FeatureVector(
        mean=mean,
        variance=float(np.mean((x - mean) ** 2)),
        max_amplitude=float(np.max(np.abs(x))),
        peak_to_peak=float(np.max(x) - np.min(x)),
        rms=float(np.sqrt(np.mean(x * x))),
        label=seg.label,
    )


def dataset_from_features(feature_vectors: list[FeatureVector]) -> Dataset:
    if not feature_vectors:
        raise ValueError("no feature vectors to assemble")
    rows = np.stack([fv.values() for fv in feature_vectors])
    labels = np.array([LABEL_TO_INDEX[fv.label] for fv in feature_vectors])
    return Dataset(rows, labels)


def signals_to_dataset(
    signals: list[RawSignal],
    target_rate_hz: float = DEFAULT_TARGET_RATE_HZ,
    length: int = DEFAULT_SEGMENT_LENGTH,
    overlap: int = DEFAULT_SEGMENT_OVERLAP,
) -> tuple[Dataset, list[int]]:
    """Run downsample -> segment -> featurize over a batch of records.

    Records too short to yield a single window are skipped, and their
    indices are returned so the caller can warn about them.  Dataset row
    order follows input order, never anything rate- or thread-dependent.
    """
    features: list[FeatureVector] = []
    skipped: list[int] = []
    for i, signal in enumerate(signals):
        reduced = downsample(signal, target_rate_hz)
        if reduced.samples.size < length:
            skipped.append(i)
            continue
        features.extend(extract_features(s) for s in segment_signal(reduced, length, overlap))
    if not features:
        raise ValueError("no signal was long enough to produce a single segment")
    return dataset_from_features(features), skipped


def fit_normalizer(features: np.ndarray) -> NormalizerParams:
    """Per-feature min/max over the given (training) rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise ValueError(
            f"normalizer needs at least 2 samples, got shape {features.shape}"
        )
    return NormalizerParams(features.min(axis=0), features.max(axis=0))


def apply_normalizer(params: NormalizerParams, features: np.ndarray) -> np.ndarray:
    """Min-max scale into [0, 1], clamping values outside the fit range.

    A degenerate feature (max == min during fit) maps to 0.5 everywhere.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[-1] != params.num_features:
        raise ValueError(
            f"expected {params.num_features} features, got {features.shape[-1]}"
        )
    span = params.maximum - params.minimum
    safe_span = np.where(span > 0.0, span, 1.0)
    scaled = (features - params.minimum) / safe_span
    scaled = np.clip(scaled, 0.0, 1.0)
    return np.where(span > 0.0, scaled, 0.5)


def split(dataset: Dataset, train_fraction: float = 0.8, seed: int = 0) -> Dataset:
    """Stratified seeded split; per class the train share rounds up."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train fraction must be in (0, 1), got {train_fraction}")
    counts = dataset.class_counts()
    for c, count in enumerate(counts):
        if count < 2:
            raise ValueError(
                f"class {LABELS[c]!r} has {count} sample(s), need at least 2 to split"
            )
    rng = np.random.default_rng(seed)
    mask = np.zeros(len(dataset), dtype=bool)
    for c in range(len(LABELS)):
        idx = np.flatnonzero(dataset.labels == c)
        rng.shuffle(idx)
        # ceil rounds the train share up; the epsilon keeps float fuzz in
        # fraction * count from tipping an exact integer over the edge.
        n_train = math.ceil(train_fraction * idx.size - 1e-9)
        if n_train == idx.size:  # rounding up must not empty the test side
            n_train -= 1
        mask[idx[:n_train]] = True
    return Dataset(dataset.features, dataset.labels, mask)


@dataclass
class SynthConfig:
    """Knobs of the synthetic rig; defaults give three separable classes."""

    signals_per_class: int = 6
    num_classes: int = 3
    duration_s: float = 6.0
    sample_rate_hz: float = 97656.0
    load_lbs: float = 270.0
    shaft_hz: float = 25.0
    shaft_amplitude: float = 1.0
    amplitude_jitter: float = 0.1  # relative, per signal and per impulse
    noise_std: float = 0.1
    outer_fault_hz: float = 81.0
    inner_fault_hz: float = 118.0
    outer_impulse_amplitude: float = 1.2
    inner_impulse_amplitude: float = 2.2
    inner_modulation_depth: float = 0.5
    ring_hz: float = 2500.0
    ring_decay_s: float = 0.001

    def validate(self) -> None:
        if self.signals_per_class < 1:
            raise ValueError("signals_per_class must be at least 1")
        if not 1 <= self.num_classes <= len(LABELS):
            raise ValueError(f"num_classes must be in [1, {len(LABELS)}]")
        positive = {
            "duration_s": self.duration_s,
            "sample_rate_hz": self.sample_rate_hz,
            "shaft_hz": self.shaft_hz,
            "shaft_amplitude": self.shaft_amplitude,
            "outer_fault_hz": self.outer_fault_hz,
            "inner_fault_hz": self.inner_fault_hz,
            "outer_impulse_amplitude": self.outer_impulse_amplitude,
            "inner_impulse_amplitude": self.inner_impulse_amplitude,
            "ring_hz": self.ring_hz,
            "ring_decay_s": self.ring_decay_s,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0.0 <= self.amplitude_jitter < 1.0:
            raise ValueError("amplitude_jitter must lie in [0, 1)")
        if not 0.0 <= self.inner_modulation_depth <= 1.0:
            raise ValueError("inner_modulation_depth must lie in [0, 1]")


def _ring_kernel(config: SynthConfig) -> np.ndarray:
    """Exponentially decaying burst excited by each fault impact."""
    n = max(int(round(8.0 * config.ring_decay_s * config.sample_rate_hz)), 2)
    t = np.arange(n) / config.sample_rate_hz
    return np.exp(-t / config.ring_decay_s) * np.sin(2.0 * np.pi * config.ring_hz * t)


def _add_impulses(
    out: np.ndarray,
    config: SynthConfig,
    rng: np.random.Generator,
    fault_hz: float,
    amplitude: float,
    modulation_depth: float,
    shaft_phase: float,
) -> None:
    """Add a jittered impulse train with ringing, in place."""
    kernel = _ring_kernel(config)
    period = 1.0 / fault_hz
    times = np.arange(0.5 * period, config.duration_s, period)
    times = times + rng.uniform(-0.1, 0.1, size=times.size) * period
    heights = amplitude * (
        1.0 + config.amplitude_jitter * rng.uniform(-1.0, 1.0, size=times.size)
    )
    if modulation_depth > 0.0:
        # Impulse strength follows the load zone once per shaft revolution.
        heights = heights * (
            1.0
            + modulation_depth
            * np.sin(2.0 * np.pi * config.shaft_hz * times + shaft_phase)
        )
    n = out.size
    for t, h in zip(times, heights):
        start = int(round(t * config.sample_rate_hz))
        if start >= n:
            continue
        stop = min(start + kernel.size, n)
        out[start:stop] += h * kernel[: stop - start]


def _synth_one(config: SynthConfig, rng: np.random.Generator, label: str) -> RawSignal:
    n = int(round(config.duration_s * config.sample_rate_hz))
    t = np.arange(n) / config.sample_rate_hz
    shaft_phase = rng.uniform(0.0, 2.0 * np.pi)
    amplitude = config.shaft_amplitude * (
        1.0 + config.amplitude_jitter * rng.uniform(-1.0, 1.0)
    )
    out = amplitude * np.sin(2.0 * np.pi * config.shaft_hz * t + shaft_phase)
    if config.noise_std > 0.0:
        out = out + rng.normal(0.0, config.noise_std, size=n)
    if label == "outer_ring":
        _add_impulses(
            out, config, rng, config.outer_fault_hz,
            config.outer_impulse_amplitude, 0.0, shaft_phase,
        )
    elif label == "inner_ring":
        _add_impulses(
            out, config, rng, config.inner_fault_hz,
            config.inner_impulse_amplitude, config.inner_modulation_depth, shaft_phase,
        )
    return RawSignal(out, config.sample_rate_hz, label, config.load_lbs)


def synth_generate(config: SynthConfig, seed: int = 0) -> list[RawSignal]:
    """Seeded synthetic records, `signals_per_class` per class in label order."""
    config.validate()
    rng = np.random.default_rng(seed)
    signals = []
    for label in LABELS[: config.num_classes]:
        for _ in range(config.signals_per_class):
            signals.append(_synth_one(config, rng, label))
    return signals


# ---------------------------------------------------------------------------
# CSV bridge formats.  Signals: one block per record, block line 1 holding
# `<label>,<load_lbs>,<sample_rate_hz>`, then one sample per line, blocks
# separated by a blank line.  Features: fixed header, one row per sample,
# floats with 17 significant digits so the round-trip is bit-exact.
# ---------------------------------------------------------------------------


def save_signals_csv(signals: list[RawSignal], path) -> None:
    if not signals:
        raise ValueError("no signals to save")
    with open(path, "w", encoding="ascii") as fh:
        for i, signal in enumerate(signals):
            if i:
                fh.write("\n")
            fh.write(f"{signal.label},{signal.load_lbs!r},{signal.sample_rate_hz!r}\n")
            fh.write("\n".join(repr(float(v)) for v in signal.samples))
            fh.write("\n")


def _parse_float(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"line {line_no}: {what} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"line {line_no}: {what} must be finite, got {text!r}")
    return value


def load_signals_csv(path) -> list[RawSignal]:
    signals: list[RawSignal] = []
    header: tuple[str, float, float] | None = None
    samples: list[float] = []
    header_line = 0

    def flush() -> None:
        nonlocal header, samples
        if header is None:
            return
        if not samples:
            raise ValueError(f"line {header_line}: signal block has no samples")
        label, load, rate = header
        signals.append(RawSignal(np.array(samples), rate, label, load))
        header, samples = None, []

    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                flush()
                continue
            if header is None:
                parts = line.split(",")
                if len(parts) != 3:
                    raise ValueError(
                        f"line {line_no}: block header needs 3 fields "
                        f"(label,load_lbs,sample_rate_hz), got {len(parts)}"
                    )
                label = parts[0].strip()
                if label not in LABEL_TO_INDEX:
                    raise ValueError(
                        f"line {line_no}: unknown label {label!r}, "
                        f"expected one of {LABELS}"
                    )
                load = _parse_float(parts[1], line_no, "load_lbs")
                rate = _parse_float(parts[2], line_no, "sample_rate_hz")
                if rate <= 0:
                    raise ValueError(f"line {line_no}: sample rate must be positive")
                header = (label, load, rate)
                header_line = line_no
            else:
                if "," in line:
                    raise ValueError(
                        f"line {line_no}: expected one sample value, got {line!r}"
                    )
                samples.append(_parse_float(line, line_no, "sample"))
    flush()
    if not signals:
        raise ValueError(f"{path}: no signal blocks found")
    return signals


def save_features_csv(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(FEATURE_CSV_HEADER + "\n")
        for row, label in zip(dataset.features, dataset.labels):
            cells = [f"{v:.17g}" for v in row]
            cells.append(LABELS[label])
            fh.write(",".join(cells) + "\n")


def load_features_csv(path) -> Dataset:
    rows: list[list[float]] = []
    labels: list[int] = []
    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line_no == 1:
                if line != FEATURE_CSV_HEADER:
                    raise ValueError(
                        f"line 1: expected header {FEATURE_CSV_HEADER!r}, got {line!r}"
                    )
                continue
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != NUM_FEATURES + 1:
                raise ValueError(
                    f"line {line_no}: expected {NUM_FEATURES} feature columns "
                    f"plus a label, got {len(parts)} field(s)"
                )
            rows.append(
                [
                    _parse_float(cell, line_no, name)
                    for cell, name in zip(parts, FEATURE_NAMES)
                ]
            )
            label = parts[-1].strip()
            if label not in LABEL_TO_INDEX:
                raise ValueError(
                    f"line {line_no}: unknown label {label!r}, expected one of {LABELS}"
                )
            labels.append(LABEL_TO_INDEX[label])
    if not rows:
        raise ValueError(f"{path}: no feature rows found")
    return Dataset(np.array(rows), np.array(labels))
