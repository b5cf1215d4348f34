"""Patch energies: pointwise content term, finite-difference structure term.

For a target pixel ``t`` and a candidate centre ``c`` the sums run over the
offsets ``o`` of the patch (centre excluded) whose target-side pixel
``t + o`` is available, i.e. Known or already Filled, and is not ``t``
itself.  The target pixel never enters any term, so the energy never
depends on the value currently stored at ``t``.

Normalised forms, with ``n`` valid pairs and ``V = 2^W - 1``::

    e_c = sqrt(sum (I(t+o) - I(c+o))^2) / (sqrt(n) V)
    e_s = sum_k beta_k / (R_k (2^k V)^2) * S_k / (n * sum_k beta_k)

where ``S_k`` sums ``(D(t+o) - D(c+o))^2`` over every order-k direction that
is valid on both sides.  Both lie in ``[0, 1]`` and ``e_t = e_c + e_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import InpaintMask, PatchSpec, RasterImage, TrainingSet
from .findiff import delta, difference_map, direction_set, order_weight, range_divisor, ring_normalizer

DIAGNOSTIC_EPS = 1e-12


class IsolatedPixelError(ValueError):
    """The target has no available neighbour inside its patch."""


@dataclass(frozen=True)
class EnergyBreakdown:
    e_c_norm: float
    e_s_norm: float
    e_t: float
    valid_pair_count: int
    per_order: tuple = ()


@dataclass(frozen=True)
class MatchDiagnostics:
    content_probabilities: np.ndarray
    structure_probabilities: np.ndarray
    e_m_c: float
    e_m_s: float
    eps: float = DIAGNOSTIC_EPS


@dataclass(frozen=True)
class MatchResult:
    value: int
    e_t: float
    centers: list = field(default_factory=list)
    breakdown: EnergyBreakdown | None = None

    @property
    def tie_count(self) -> int:
        return len(self.centers)


def _plane(img) -> np.ndarray:
    if isinstance(img, RasterImage):
        if img.channels != 1:
            raise ValueError("energies are defined on single-channel images")
        return img.data
    return np.asarray(img)


def _bit_depth(img, bit_depth):
    if bit_depth is not None:
        return bit_depth
    return img.bit_depth if isinstance(img, RasterImage) else 8


def pointwise_distance(x, y):
    """Squared gap between two samples; the l2 norm is taken after summing."""
    d = x - y
    return d * d


def structure_coefficients(order: int, bit_depth: int = 8) -> list[float]:
    """Per-order weights applied to the raw squared sums ``S_k``."""
    if order <= 0:
        return []
    total_beta = sum(order_weight(k) for k in range(1, order + 1))
    return [order_weight(k) / (ring_normalizer(k) * range_divisor(k, bit_depth) ** 2 * total_beta)
            for k in range(1, order + 1)]


def normalize(content_sum, per_order, n, order: int, bit_depth: int = 8):
    """``(e_c, e_s)`` from raw sums; works on scalars and numpy arrays alike."""
    maxval = (1 << bit_depth) - 1
    e_c = np.sqrt(content_sum) / (np.sqrt(n) * maxval)
    e_s = 0.0
    for coef, s in zip(structure_coefficients(order, bit_depth), per_order):
        e_s = e_s + coef * s
    e_s = e_s / n
    return e_c, e_s


def default_tie_tolerance(order: int) -> float:
    # orders <= 2 only ever sample at integer or half-integer positions,
    # which keeps every sum exact in binary64
    return 0.0 if order <= 2 else 1e-9


def _target_availability(mask: InpaintMask, target) -> np.ndarray:
    avail = mask.available.copy()
    avail[target] = False
    return avail


def _check_candidate(plane, cand, spec: PatchSpec, reach: int):
    M, N = plane.shape
    r, s = cand
    if r - reach < 0 or s - reach < 0 or r + reach >= M or s + reach >= N:
        raise ValueError(f"candidate {cand} window leaves the image")


def content_energy(img, mask: InpaintMask, target, cand, spec: PatchSpec):
    """Sum of squared gaps over valid offsets and the number of valid pairs."""
    plane = _plane(img)
    _check_candidate(plane, cand, spec, spec.half_width)
    M, N = plane.shape
    i, j = target
    r, s = cand
    avail = mask.available
    total = 0
    count = 0
    for a, b in spec.offsets():
        p, q = i + a, j + b
        if not (0 <= p < M and 0 <= q < N) or not avail[p, q]:
            continue
        total += pointwise_distance(int(plane[p, q]), int(plane[r + a, s + b]))
        count += 1
    if count == 0:
        raise IsolatedPixelError(f"pixel {target} has no available neighbour")
    return total, count


def structure_energy(img, mask: InpaintMask, target, cand, spec: PatchSpec, order: int = 1,
                     bit_depth: int | None = None):
    """Weighted structure sum and the raw per-order squared sums ``S_k``."""
    if not 1 <= order <= 3:
        raise ValueError("maximum difference order must be in 1..3")
    plane = _plane(img)
    W = _bit_depth(img, bit_depth)
    _check_candidate(plane, cand, spec, spec.half_width + order)
    M, N = plane.shape
    i, j = target
    r, s = cand
    avail_t = _target_availability(mask, target)
    avail_c = mask.known
    per_order = [0] * order
    count = 0
    for a, b in spec.offsets():
        p, q = i + a, j + b
        if not (0 <= p < M and 0 <= q < N) or not avail_t[p, q]:
            continue
        count += 1
        for k in range(1, order + 1):
            for theta in direction_set(k):
                dt = delta(plane, avail_t, (p, q), theta, k)
                if dt is None:
                    continue
                dc = delta(plane, avail_c, (r + a, s + b), theta, k)
                if dc is None:
                    continue
                per_order[k - 1] += pointwise_distance(dt, dc)
    if count == 0:
        raise IsolatedPixelError(f"pixel {target} has no available neighbour")
    coefs = structure_coefficients(order, W)
    weighted = sum(c * v for c, v in zip(coefs, per_order))
    return weighted, per_order


def total_energy(img, mask: InpaintMask, target, cand, spec: PatchSpec, order: int = 1,
                 bit_depth: int | None = None) -> EnergyBreakdown:
    """Normalised content + structure energy; ``order=0`` keeps content only."""
    W = _bit_depth(img, bit_depth)
    c_sum, n = content_energy(img, mask, target, cand, spec)
    per_order = []
    if order > 0:
        _, per_order = structure_energy(img, mask, target, cand, spec, order, W)
    e_c, e_s = normalize(c_sum, per_order, n, order, W)
    e_c, e_s = float(e_c), float(e_s)
    return EnergyBreakdown(e_c, e_s, e_c + e_s, n, tuple(per_order))


class CandidateScorer:
    """Scores one target against every training-set candidate at once.

    Candidate windows lie in Known data, which is never rewritten, so their
    samples and difference maps are taken once from the image given here.
    """

    def __init__(self, img, tset: TrainingSet, spec: PatchSpec, order: int = 1,
                 bit_depth: int | None = None, mask: InpaintMask | None = None):
        plane = _plane(img)
        self.bit_depth = _bit_depth(img, bit_depth)
        self.spec = spec
        self.order = order
        self.tset = tset
        self.offsets = spec.offsets()
        self._plane0 = plane.astype(np.float64)
        self._rows = tset.rows
        self._cols = tset.cols
        self.directions = [(k, theta) for k in range(1, order + 1) for theta in direction_set(k)]
        known = None if mask is None else mask.known
        if self.directions:
            self._maps = np.stack([difference_map(plane, known, theta, k) for k, theta in self.directions])
        else:
            self._maps = np.zeros((0,) + plane.shape)
        self._coefs = np.array(structure_coefficients(order, self.bit_depth))
        if len(tset) and tset.reach < spec.half_width + order:
            raise ValueError("training set reach is too small for the requested order")

    def __len__(self):
        return len(self.tset)

    def target_terms(self, plane, mask: InpaintMask, target):
        """Valid offsets, target samples, and valid (offset, direction) differences."""
        M, N = plane.shape
        i, j = target
        avail = _target_availability(mask, target)
        offs, vals = [], []
        s_a, s_b, s_d, s_v, s_k = [], [], [], [], []
        for a, b in self.offsets:
            p, q = i + a, j + b
            if not (0 <= p < M and 0 <= q < N) or not avail[p, q]:
                continue
            offs.append((a, b))
            vals.append(float(plane[p, q]))
            for d_idx, (k, theta) in enumerate(self.directions):
                dt = delta(plane, avail, (p, q), theta, k)
                if dt is None:
                    continue
                s_a.append(a)
                s_b.append(b)
                s_d.append(d_idx)
                s_v.append(float(dt))
                s_k.append(k - 1)
        return offs, vals, (s_a, s_b, s_d, s_v, s_k)

    def raw_sums(self, plane, mask: InpaintMask, target):
        """``(content_sums, per_order_sums, n)`` with one row per candidate."""
        offs, vals, (s_a, s_b, s_d, s_v, s_k) = self.target_terms(plane, mask, target)
        n = len(offs)
        if n == 0:
            raise IsolatedPixelError(f"pixel {target} has no available neighbour")
        rows, cols = self._rows, self._cols
        A = np.array([o[0] for o in offs])
        B = np.array([o[1] for o in offs])
        cand = self._plane0[rows[:, None] + A[None, :], cols[:, None] + B[None, :]]
        diff = cand - np.array(vals)[None, :]
        content = (diff * diff).sum(axis=1)
        per_order = np.zeros((len(rows), self.order))
        if s_d:
            gathered = self._maps[np.array(s_d)[None, :],
                                  rows[:, None] + np.array(s_a)[None, :],
                                  cols[:, None] + np.array(s_b)[None, :]]
            sq = (gathered - np.array(s_v)[None, :]) ** 2
            sq = np.where(np.isnan(sq), 0.0, sq)
            onehot = np.zeros((len(s_k), self.order))
            onehot[np.arange(len(s_k)), s_k] = 1.0
            per_order = sq @ onehot
        return content, per_order, n

    def energies(self, plane, mask: InpaintMask, target, use_structure: bool = True):
        """``(e_c, e_s, n)`` arrays over all candidates."""
        content, per_order, n = self.raw_sums(plane, mask, target)
        order = self.order if use_structure else 0
        e_c, e_s = normalize(content, per_order.T if order else [], n, order, self.bit_depth)
        e_s = np.broadcast_to(np.asarray(e_s, dtype=np.float64), e_c.shape)
        return e_c, e_s, n


def _round_half_up_mean(values) -> int:
    values = [int(v) for v in values]
    return (2 * sum(values) + len(values)) // (2 * len(values))


def select_ties(e_t: np.ndarray, tie_tol: float) -> np.ndarray:
    """Indices of all candidates at the minimum, within a relative tolerance."""
    e_min = e_t.min()
    return np.flatnonzero(e_t <= e_min + tie_tol * abs(e_min))


def best_match(img, mask: InpaintMask, target, tset: TrainingSet, spec: PatchSpec, order: int = 1,
               tie_tol: float | None = None, scorer: CandidateScorer | None = None,
               use_structure: bool = True) -> MatchResult:
    """Minimum-energy candidates and the mean of their centre values."""
    if len(tset) == 0:
        raise ValueError("training set is empty")
    plane = _plane(img)
    if scorer is None:
        scorer = CandidateScorer(img, tset, spec, order, mask=mask)
    if tie_tol is None:
        tie_tol = default_tie_tolerance(order if use_structure else 0)
    e_c, e_s, n = scorer.energies(plane, mask, target, use_structure)
    e_t = e_c + e_s
    ties = select_ties(e_t, tie_tol)
    best = int(ties[0])
    centers = [(int(tset.rows[t]), int(tset.cols[t])) for t in ties]
    value = _round_half_up_mean(plane[r, c] for r, c in centers)
    breakdown = EnergyBreakdown(float(e_c[best]), float(e_s[best]), float(e_t[best]), n)
    return MatchResult(value, float(e_t[best]), centers, breakdown)


def content_similarity(x, y, bit_depth: int = 8) -> float:
    """``1 - |x - y| / maxval``: 1 for equal samples, 0 for opposite extremes."""
    return 1.0 - abs(x - y) / ((1 << bit_depth) - 1)


def structure_similarity(dx, dy, k: int, bit_depth: int = 8) -> float:
    """Same as :func:`content_similarity` for two order-k differences."""
    return 1.0 - abs(dx - dy) / range_divisor(k, bit_depth)


def _probabilities(norms, eps):
    return np.clip(np.asarray(norms, dtype=np.float64), eps, 1.0 - eps)


def _neg_product_of_logs(probs) -> float:
    if len(probs) == 0:
        return 0.0
    return float(-np.prod(np.log(1.0 - probs)))


def match_diagnostics(img, mask: InpaintMask, target, cand, spec: PatchSpec, order: int = 1,
                      eps: float = DIAGNOSTIC_EPS, bit_depth: int | None = None) -> MatchDiagnostics:
    """Pointwise match probabilities and their product-of-logs aggregates.

    Diagnostic only.  Probabilities are clamped into ``[eps, 1 - eps]`` so a
    perfect pair does not produce ``log(0)``.
    """
    plane = _plane(img)
    W = _bit_depth(img, bit_depth)
    M, N = plane.shape
    i, j = target
    r, s = cand
    avail_t = _target_availability(mask, target)
    content, structure = [], []
    for a, b in spec.offsets():
        p, q = i + a, j + b
        if not (0 <= p < M and 0 <= q < N) or not avail_t[p, q]:
            continue
        content.append(content_similarity(int(plane[p, q]), int(plane[r + a, s + b]), W))
        for k in range(1, order + 1):
            for theta in direction_set(k):
                dt = delta(plane, avail_t, (p, q), theta, k)
                dc = delta(plane, None, (r + a, s + b), theta, k)
                if dt is None or dc is None:
                    continue
                structure.append(structure_similarity(dt, dc, k, W))
    pc = _probabilities(content, eps)
    ps = _probabilities(structure, eps)
    return MatchDiagnostics(pc, ps, _neg_product_of_logs(pc), _neg_product_of_logs(ps), eps)
