"""Linear-chain CRF over the three IOB classes.

Sequence scoring, log-partition (forward algorithm), posterior marginals,
analytic NLL gradients (forward-backward) and Viterbi decoding. The inner
dynamic programs run on a compiled Cython backend when available, with a
pure numpy fallback selected at import time.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .labeling import Label, LabelSequence

try:
    from . import _crf_cy as _kernels

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    from . import _crf_py as _kernels

    BACKEND = "python"

from . import _crf_py as _py_kernels

K = 3  # |{O, B, I}|

PARAMS_FORMAT_VERSION = 1


@dataclass
class CrfParams:
    """Transition scores (from-label x to-label) plus start/stop scores.

    Forbidden transitions (constrained mode: start->I and O->I) are pinned
    to -inf and never updated.
    """

    transitions: np.ndarray  # K x K
    start: np.ndarray  # K
    stop: np.ndarray  # K
    constrained: bool = False

    @classmethod
    def zeros(cls, constrained=False) -> "CrfParams":
        p = cls(np.zeros((K, K)), np.zeros(K), np.zeros(K), constrained)
        return p.apply_constraints() if constrained else p

    @classmethod
    def init_random(cls, seed: int, constrained=False) -> "CrfParams":
        rng = np.random.default_rng(seed)
        p = cls(
            rng.uniform(-0.1, 0.1, size=(K, K)),
            rng.uniform(-0.1, 0.1, size=K),
            rng.uniform(-0.1, 0.1, size=K),
            constrained,
        )
        return p.apply_constraints() if constrained else p

    def apply_constraints(self) -> "CrfParams":
        if self.constrained:
            self.start[Label.I] = -np.inf
            self.transitions[Label.O, Label.I] = -np.inf
        return self

    def copy(self) -> "CrfParams":
        return CrfParams(self.transitions.copy(), self.start.copy(), self.stop.copy(), self.constrained)

    def to_record(self) -> dict:
        return {
            "version": PARAMS_FORMAT_VERSION,
            "k": K,
            "transitions": [float(v) for v in self.transitions.ravel()],
            "start": [float(v) for v in self.start],
            "stop": [float(v) for v in self.stop],
            "constrained": self.constrained,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CrfParams":
        if rec.get("version") != PARAMS_FORMAT_VERSION:
            raise ValueError(f"unsupported CrfParams record version {rec.get('version')!r}")
        k = rec["k"]
        if k != K:
            raise ValueError(f"expected K={K}, record has K={k}")
        return cls(
            np.array(rec["transitions"], dtype=np.float64).reshape(k, k),
            np.array(rec["start"], dtype=np.float64),
            np.array(rec["stop"], dtype=np.float64),
            bool(rec["constrained"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CrfParams":
        return cls.from_record(json.loads(Path(path).read_text(encoding="utf-8")))


def _as_emissions(e) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 2 or e.shape[1] != K:
        raise ValueError(f"emission matrix must be L x {K}, got shape {e.shape}")
    if e.shape[0] < 1:
        raise ValueError("emission matrix must have at least one row")
    if not np.all(np.isfinite(e)):
        raise ValueError("emission matrix contains non-finite entries")
    return np.ascontiguousarray(e)


def _labels_array(y) -> np.ndarray:
    if isinstance(y, LabelSequence):
        y = y.labels
    return np.array([int(v) for v in y], dtype=np.int64)


def score_sequence(e, y, p: CrfParams) -> float:
    """Unnormalized log-score of one label path."""
    e = _as_emissions(e)
    ya = _labels_array(y)
    if len(ya) != e.shape[0]:
        raise ValueError(f"label sequence length {len(ya)} != emission rows {e.shape[0]}")
    s = p.start[ya[0]] + p.stop[ya[-1]] + e[np.arange(len(ya)), ya].sum()
    s += p.transitions[ya[:-1], ya[1:]].sum()
    return float(s)


def log_partition(e, p: CrfParams) -> float:
    """Log of the sum of exp(score) over all K^L label paths."""
    e = _as_emissions(e)
    return float(_kernels.forward_logz(e, p.transitions, p.start, p.stop))


def log_partition_backward(e, p: CrfParams) -> float:
    """Same quantity computed right-to-left (consistency diagnostic)."""
    e = _as_emissions(e)
    return float(_kernels.backward_logz(e, p.transitions, p.start, p.stop))


def nll(e, y, p: CrfParams) -> float:
    """Negative log-likelihood of path y; always >= 0."""
    return log_partition(e, p) - score_sequence(e, y, p)


def posterior_marginals(e, p: CrfParams) -> np.ndarray:
    """L x K matrix of P(y_t = k | e, p); rows sum to 1."""
    e = _as_emissions(e)
    marginals, _, _ = _kernels.forward_backward(e, p.transitions, p.start, p.stop)
    return np.asarray(marginals)


def nll_gradients(e, y, p: CrfParams):
    """Analytic gradients of nll(e, y, p).

    Returns (d/de: L x K array, d/dp: CrfParams-shaped object). Gradients
    are expected counts under the model minus observed counts; entries at
    constraint-pinned transitions are zero.
    """
    e = _as_emissions(e)
    ya = _labels_array(y)
    L = e.shape[0]
    if len(ya) != L:
        raise ValueError(f"label sequence length {len(ya)} != emission rows {L}")
    marginals, pairwise, _ = _kernels.forward_backward(e, p.transitions, p.start, p.stop)
    marginals = np.asarray(marginals)
    pairwise = np.asarray(pairwise)

    d_e = marginals.copy()
    d_e[np.arange(L), ya] -= 1.0

    d_trans = pairwise
    np.add.at(d_trans, (ya[:-1], ya[1:]), -1.0)
    d_start = marginals[0].copy()
    d_start[ya[0]] -= 1.0
    d_stop = marginals[-1].copy()
    d_stop[ya[-1]] -= 1.0
    if p.constrained:
        d_start[Label.I] = 0.0
        d_trans[Label.O, Label.I] = 0.0
    return d_e, CrfParams(d_trans, d_start, d_stop, p.constrained)


def viterbi_decode(e, p: CrfParams) -> tuple[LabelSequence, float]:
    """Highest-scoring label path and its score.

    Ties are broken toward the lower label index (O < B < I) at every
    choice, which makes the result the lexicographically smallest argmax.
    """
    e = _as_emissions(e)
    path, score = _kernels.viterbi(e, p.transitions, p.start, p.stop)
    labels = LabelSequence(tuple(Label(int(i)) for i in np.asarray(path)), "subword")
    return labels, float(score)


def python_backend():
    """The pure numpy kernel module (for benchmarks/backend tests)."""
    return _py_kernels


def active_backend():
    return _kernels
