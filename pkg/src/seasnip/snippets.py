"""Peak detection and snippet extraction around large pitch events.

A snippet is a fixed-length window of aligned channels (low-fidelity pitch
and heave plus the wave input) centered on a detected low-fidelity pitch
peak, optionally carrying the high-fidelity pitch window as the training
target. Relative-rank statistics link the amplitude ordering of
low-fidelity peaks to the timing of the high-fidelity record maximum and
drive the choice of how many peaks per record are worth keeping.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .hydro import MotionRecord
from .seaway import TimeSeries

DEFAULT_CHANNEL_ORDER = ("lf_pitch", "lf_heave", "wave")


@dataclass
class PeakSet:
    """Strict local maxima of a pitch series, in chronological order."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.size != self.values.size:
            raise ValueError("indices and values must have equal length")
        if self.indices.size > 1 and np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly increasing")

    def __len__(self) -> int:
        return self.indices.size


@dataclass
class Snippet:
    """One training/inference window; all channels share the same length."""

    channels: dict  # name -> np.ndarray, keys follow channel_order
    center_index: int
    start_index: int
    realization_id: str
    dt: float
    target: np.ndarray | None = None  # high-fidelity pitch window

    @property
    def window_length(self) -> int:
        return next(iter(self.channels.values())).size

    def input_matrix(self, channel_order=DEFAULT_CHANNEL_ORDER) -> np.ndarray:
        """Stack channels into a (window_length, n_channels) matrix."""
        return np.column_stack([self.channels[name] for name in channel_order])


@dataclass
class CoverageCurve:
    """Fraction of records whose HF maximum is matched by a top-k LF peak."""

    k_values: np.ndarray
    coverage: np.ndarray

    def __post_init__(self):
        self.k_values = np.asarray(self.k_values, dtype=np.int64)
        self.coverage = np.asarray(self.coverage, dtype=np.float64)
        if np.any(np.diff(self.coverage) < 0):
            raise ValueError("coverage must be nondecreasing in k")


def detect_peaks(
    pitch: TimeSeries,
    min_separation_seconds: float,
    exclude_ramp: bool = False,
    ramp_samples: int = 0,
) -> PeakSet:
    """Find strict local maxima at least ``min_separation_seconds`` apart.

    When two maxima fall within the separation distance only the larger is
    kept (ties resolved toward the earlier sample). A constant series has
    no strict maxima and yields an empty set.
    """
    v = pitch.values
    if v.size <= 2:
        raise ValueError("series too short for peak detection")
    start = ramp_samples if exclude_ramp else 0

    interior = np.arange(max(1, start + 1), v.size - 1)
    mask = (v[interior] > v[interior - 1]) & (v[interior] > v[interior + 1])
    cand = interior[mask]
    if cand.size == 0:
        return PeakSet(np.empty(0, dtype=np.int64), np.empty(0))

    sep = max(1, int(round(min_separation_seconds / pitch.dt)))
    # Greedy suppression from the largest down; earlier index wins ties.
    order = np.lexsort((cand, -v[cand]))
    kept: list[int] = []
    for idx in cand[order]:
        if all(abs(idx - k) >= sep for k in kept):
            kept.append(int(idx))
    kept.sort()
    kept_arr = np.asarray(kept, dtype=np.int64)
    return PeakSet(kept_arr, v[kept_arr])


def top_k(peaks: PeakSet, k: int) -> PeakSet:
    """The k largest peaks, returned in chronological order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(peaks) <= k:
        return PeakSet(peaks.indices.copy(), peaks.values.copy())
    order = np.lexsort((peaks.indices, -peaks.values))[:k]
    sel = np.sort(order)
    return PeakSet(peaks.indices[sel], peaks.values[sel])


def extract_snippet(
    record: MotionRecord,
    center: int,
    window_seconds: float,
    realization_id: str = "",
    hf_record: MotionRecord | None = None,
) -> Snippet:
    """Cut an aligned multi-channel window centered on ``center``.

    Windows that would overrun a record boundary are shifted inward so the
    full length is always preserved; ``center_index`` keeps the original
    peak location either way.
    """
    n = len(record)
    dt = record.dt
    length = int(round(window_seconds / dt)) + 1
    if n < length:
        raise ValueError(f"record length {n} shorter than window {length}")
    if not (0 <= center < n):
        raise ValueError("center outside record")
    start = center - (length - 1) // 2
    start = min(max(start, 0), n - length)
    stop = start + length
    channels = {
        "lf_pitch": record.pitch.values[start:stop].copy(),
        "lf_heave": record.heave.values[start:stop].copy(),
        "wave": record.wave.values[start:stop].copy(),
    }
    target = None
    if hf_record is not None:
        if len(hf_record) != n or hf_record.dt != dt:
            raise ValueError("hf_record is not aligned with record")
        target = hf_record.pitch.values[start:stop].copy()
    return Snippet(
        channels=channels,
        center_index=int(center),
        start_index=int(start),
        realization_id=realization_id,
        dt=dt,
        target=target,
    )


def relative_rank(
    lf_peaks: PeakSet,
    hf_pitch: TimeSeries,
    match_tolerance_seconds: float,
    ramp_samples: int = 0,
) -> int | None:
    """Amplitude rank of the LF peak that time-matches the HF maximum.

    Rank 1 means the largest LF peak is the one nearest in time (within
    tolerance) to the HF global maximum. Returns None when no LF peak lies
    within the tolerance.
    """
    if len(lf_peaks) == 0:
        raise ValueError("empty peak set")
    v = hf_pitch.values
    hf_idx = ramp_samples + int(np.argmax(v[ramp_samples:]))
    dist = np.abs(lf_peaks.indices - hf_idx)
    nearest = int(np.argmin(dist))
    if dist[nearest] * hf_pitch.dt > match_tolerance_seconds:
        return None
    # 1-based position of the matched peak in descending-amplitude order,
    # ties broken toward the earlier peak.
    order = np.lexsort((lf_peaks.indices, -lf_peaks.values))
    return int(np.nonzero(order == nearest)[0][0]) + 1


def coverage_curve(ranks: list[int | None], k_max: int = 30) -> CoverageCurve:
    """Coverage(k) = fraction of records with a match of rank <= k."""
    if not ranks:
        raise ValueError("no ranks provided")
    ks = np.arange(1, k_max + 1)
    matched = np.array([r for r in ranks if r is not None], dtype=np.int64)
    coverage = np.array([(matched <= k).sum() / len(ranks) for k in ks])
    return CoverageCurve(ks, coverage)


def choose_k(curve: CoverageCurve, threshold: float) -> tuple[int, bool]:
    """Smallest k whose coverage reaches ``threshold``.

    Returns (k, reached). When the threshold is never reached, k is the
    largest k in the curve and ``reached`` is False.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError("threshold must be in (0, 1]")
    hit = np.nonzero(curve.coverage >= threshold)[0]
    if hit.size == 0:
        return int(curve.k_values[-1]), False
    return int(curve.k_values[hit[0]]), True


@dataclass
class PredictedWindow:
    """A corrected pitch window positioned within its source record."""

    values: np.ndarray
    start_index: int
    center_index: int
    dt: float

    @property
    def peak_value(self) -> float:
        return float(np.max(self.values))

    @property
    def peak_index(self) -> int:
        """Sample index of the window maximum within the source record."""
        return self.start_index + int(np.argmax(self.values))


def select_best_output(windows: list[PredictedWindow]) -> PredictedWindow:
    """The window with the largest pitch maximum; ties go to the earliest."""
    if not windows:
        raise ValueError("no windows to select from")
    best = windows[0]
    for w in windows[1:]:
        if w.peak_value > best.peak_value or (
            w.peak_value == best.peak_value and w.center_index < best.center_index
        ):
            best = w
    return best


# ---------------------------------------------------------------------------
# on-disk snippet dataset: long-format CSV plus a JSON index


def write_snippet_dataset(csv_path, index_path, snippets: list[Snippet],
                          k: int, channel_order=DEFAULT_CHANNEL_ORDER) -> None:
    include_target = all(s.target is not None for s in snippets)
    with open(csv_path, "w") as fh:
        fh.write("realization_id,center_index,channel,sample_index,value\n")
        for s in snippets:
            names = list(channel_order) + (["hf_pitch"] if include_target else [])
            for name in names:
                col = s.target if name == "hf_pitch" else s.channels[name]
                for j, val in enumerate(col):
                    fh.write(
                        f"{s.realization_id},{s.center_index},{name},{j},{float(val)!r}\n"
                    )
    index = {
        "window_length": snippets[0].window_length if snippets else 0,
        "dt": snippets[0].dt if snippets else 0.0,
        "k": int(k),
        "channel_order": list(channel_order),
        "has_target": include_target,
        "snippets": [
            {
                "realization_id": s.realization_id,
                "center_index": s.center_index,
                "start_index": s.start_index,
            }
            for s in snippets
        ],
    }
    with open(index_path, "w") as fh:
        json.dump(index, fh, indent=1)


def read_snippet_dataset(csv_path, index_path) -> list[Snippet]:
    with open(index_path) as fh:
        index = json.load(fh)
    length = index["window_length"]
    order = index["channel_order"]
    has_target = index["has_target"]
    meta = {
        (m["realization_id"], m["center_index"]): m["start_index"]
        for m in index["snippets"]
    }

    table: dict[tuple, dict[str, np.ndarray]] = {}
    with open(csv_path) as fh:
        next(fh)  # header
        for line in fh:
            rid, center, channel, sample, value = line.rstrip("\n").split(",")
            key = (rid, int(center))
            cols = table.setdefault(key, {})
            col = cols.setdefault(channel, np.empty(length))
            col[int(sample)] = float(value)

    snippets = []
    for m in index["snippets"]:
        key = (m["realization_id"], m["center_index"])
        cols = table[key]
        snippets.append(
            Snippet(
                channels={name: cols[name] for name in order},
                center_index=key[1],
                start_index=meta[key],
                realization_id=key[0],
                dt=index["dt"],
                target=cols["hf_pitch"] if has_target else None,
            )
        )
    return snippets
