"""Priority-ordered causal fill followed by raster refinement scans."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    InpaintMask,
    PatchSpec,
    RasterImage,
    build_training_set,
    boundary,
    merge_channels,
    split_channels,
)
from .energy import (
    CandidateScorer,
    IsolatedPixelError,
    MatchResult,
    default_tie_tolerance,
    select_ties,
)
from .priority import ConfidenceField, priority_star, propagate_confidence

log = logging.getLogger(__name__)

# relative slack when comparing neighbour energies before and after a recommit
DESCENT_SLACK = 1e-12


class EmptyTrainingSetError(ValueError):
    pass


class DeadlockError(RuntimeError):
    """Every boundary pixel is isolated, even after widening the patch once."""

    def __init__(self, message, missing=0, boundary_pixels=()):
        super().__init__(message)
        self.missing = missing
        self.boundary_pixels = list(boundary_pixels)


@dataclass(frozen=True)
class EngineConfig:
    half_width: int = 1
    order: int = 1
    max_scans: int = 10
    rel_tol: float = 1e-4
    initial_fill_value: int = 0
    invert_energy_priority: bool = False
    propagation: bool = True
    content_only: bool = False
    tset_rects: tuple = ()
    tset_region: np.ndarray | None = field(default=None, compare=False, repr=False)
    tie_tol: float | None = None
    global_recompute: bool = False

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError("patch half-width must be >= 1")
        if not 1 <= self.order <= 3:
            raise ValueError("difference order must be in 1..3")
        if self.max_scans < 1:
            raise ValueError("max_scans must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")

    @property
    def patch_side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def energy_order(self) -> int:
        return 0 if self.content_only else self.order


@dataclass(frozen=True)
class CommitRecord:
    scan: int
    pixel: tuple
    value: int
    e_t: float
    p_star: float
    tie_count: int
    centers: tuple = ()


@dataclass
class ScanTrace:
    scan_energies: list = field(default_factory=list)
    changed: list = field(default_factory=list)
    commits: list = field(default_factory=list)
    sources: dict = field(default_factory=dict)
    omega_size: int = 0
    tset_size: int = 0
    widened: bool = False

    @property
    def scans(self) -> int:
        return len(self.scan_energies)

    @property
    def converged_scan(self) -> int:
        """Last scan that changed any pixel."""
        last = 0
        for t, n in enumerate(self.changed, start=1):
            if n:
                last = t
        return last

    def commits_in_scan(self, scan: int) -> list:
        return [c for c in self.commits if c.scan == scan]


def _chebyshev_near(p, q, radius):
    return abs(p[0] - q[0]) <= radius and abs(p[1] - q[1]) <= radius


class _Engine:
    def __init__(self, img: RasterImage, mask: InpaintMask, cfg: EngineConfig):
        if img.channels != 1:
            raise ValueError("the engine works on single-channel images; split RGB first")
        mask.check_image(img)
        if mask.count_missing() == 0:
            raise ValueError("nothing to inpaint: the mask has no missing pixels")
        if not 0 <= cfg.initial_fill_value <= img.maxval:
            raise ValueError("initial fill value out of range")
        self.cfg = cfg
        self.bit_depth = img.bit_depth
        self.mask = mask.copy()
        self.work = img.to_array()
        self.work[self.mask.missing] = cfg.initial_fill_value
        self.omega = [tuple(p) for p in np.argwhere(self.mask.omega).tolist()]
        self.omega_set = set(self.omega)
        self.conf = ConfidenceField.initial(self.mask)
        self.tie_tol = cfg.tie_tol if cfg.tie_tol is not None else default_tie_tolerance(cfg.energy_order)
        self.trace = ScanTrace(omega_size=len(self.omega))
        self._setup(PatchSpec(cfg.half_width))

    def _setup(self, spec: PatchSpec):
        cfg = self.cfg
        self.spec = spec
        self.tset = build_training_set(self.mask, spec, cfg.order, cfg.tset_rects, cfg.tset_region)
        if len(self.tset) == 0:
            raise EmptyTrainingSetError(
                f"training set is empty for patch side {spec.side} and order {cfg.order}")
        self.trace.tset_size = len(self.tset)
        self.scorer = CandidateScorer(self.work, self.tset, spec, cfg.energy_order,
                                      bit_depth=self.bit_depth, mask=self.mask)
        self.radius = spec.half_width + max(cfg.energy_order, 1)

    def match(self, pixel) -> MatchResult:
        e_c, e_s, n = self.scorer.energies(self.work, self.mask, pixel)
        e_t = e_c + e_s
        ties = select_ties(e_t, self.tie_tol)
        rows, cols = self.tset.rows[ties], self.tset.cols[ties]
        vals = self.work[rows, cols].astype(np.int64)
        value = int((2 * vals.sum() + len(vals)) // (2 * len(vals)))
        centers = tuple(zip(rows.tolist(), cols.tolist()))
        return MatchResult(value, float(e_t[ties[0]]), list(centers))

    # -- scan 1 --------------------------------------------------------------

    def _evaluate(self, pixel):
        try:
            m = self.match(pixel)
        except IsolatedPixelError:
            m = None
        rec = priority_star(self.conf, self.work, self.mask, pixel, None if m is None else m.e_t,
                            self.spec, self.cfg.invert_energy_priority, self.bit_depth)
        return m, rec

    def fill_scan(self):
        cache: dict = {}
        while self.mask.count_missing():
            front = boundary(self.mask)
            if not front:
                raise DeadlockError("missing pixels have no available neighbour",
                                    self.mask.count_missing())
            best_key, best = None, None
            for p in front:
                if p not in cache:
                    cache[p] = self._evaluate(p)
                m, rec = cache[p]
                key = (rec.p_star, rec.c_patch, -p[0], -p[1])
                if best_key is None or key > best_key:
                    best_key, best = key, (p, m, rec)
            p, m, rec = best
            if rec.deferred:
                if self.trace.widened:
                    raise DeadlockError(
                        f"all {len(front)} boundary pixels are isolated after widening",
                        self.mask.count_missing(), front)
                log.warning("all boundary pixels isolated; widening patch to side %d",
                            self.spec.side + 2)
                self.trace.widened = True
                self._setup(PatchSpec(self.spec.half_width + 1))
                cache.clear()
                continue
            self.work[p] = m.value
            self.mask.commit(p)
            propagate_confidence(self.conf, self.mask, p, rec.c_patch, min(m.e_t / 2.0, 1.0),
                                 update_known=self.cfg.propagation)
            self.trace.commits.append(CommitRecord(1, p, m.value, m.e_t, rec.p_star,
                                                   m.tie_count, tuple(m.centers)))
            self.trace.sources[p] = tuple(m.centers)
            if self.cfg.global_recompute:
                cache.clear()
            else:
                for q in [q for q in cache if _chebyshev_near(p, q, self.radius)]:
                    del cache[q]

    # -- refinement ------------------------------------------------------------

    def total_energy(self, cache) -> float:
        total = 0.0
        for p in self.omega:
            if p not in cache:
                cache[p] = self.match(p)
            total += cache[p].e_t
        return total

    def _affected(self, p):
        R = self.radius
        M, N = self.work.shape
        out = []
        for i in range(max(p[0] - R, 0), min(p[0] + R + 1, M)):
            for j in range(max(p[1] - R, 0), min(p[1] + R + 1, N)):
                if (i, j) != p and (i, j) in self.omega_set:
                    out.append((i, j))
        return out

    def refine(self, scan: int, cache) -> int:
        """One raster pass; a recommit must not raise the energy of its neighbours.

        A pixel's own energy ignores its own value, so only the region pixels
        whose windows reach it can change.  Accepting a new value only when
        their summed best-match energy does not grow keeps the per-scan total
        non-increasing.
        """
        changed = 0
        for p in self.omega:
            m = cache.get(p)
            if m is None:
                m = cache[p] = self.match(p)
            if m.value == self.work[p]:
                self.trace.sources[p] = tuple(m.centers)
                continue
            affected = self._affected(p)
            before = 0.0
            for q in affected:
                if q not in cache:
                    cache[q] = self.match(q)
                before += cache[q].e_t
            old_value = self.work[p]
            self.work[p] = m.value
            trial = {q: self.match(q) for q in affected}
            after = sum(t.e_t for t in trial.values())
            if after <= before + DESCENT_SLACK * before:
                cache.update(trial)
                self.trace.sources[p] = tuple(m.centers)
                changed += 1
                self.trace.commits.append(CommitRecord(scan, p, m.value, m.e_t, math.nan,
                                                       m.tie_count, tuple(m.centers)))
            else:
                self.work[p] = old_value
        return changed

    def run(self):
        self.fill_scan()
        cache: dict = {}
        energy = self.total_energy(cache)
        self.trace.scan_energies.append(energy)
        self.trace.changed.append(len(self.omega))
        for scan in range(2, self.cfg.max_scans + 1):
            if energy <= 0.0:
                break
            changed = self.refine(scan, cache)
            new_energy = self.total_energy(cache)
            self.trace.scan_energies.append(new_energy)
            self.trace.changed.append(changed)
            if changed == 0:
                break
            if (energy - new_energy) / energy < self.cfg.rel_tol:
                break
            energy = new_energy
        return RasterImage(self.work, self.bit_depth), self.trace


def inpaint(img: RasterImage, mask: InpaintMask, cfg: EngineConfig | None = None):
    """Fill every missing pixel of a single-channel image.

    Returns the completed image and its :class:`ScanTrace`.
    """
    return _Engine(img, mask, cfg or EngineConfig()).run()


def inpaint_rgb(img: RasterImage, mask: InpaintMask, cfg: EngineConfig | None = None,
                luma_only: bool = False):
    """Per-channel inpainting joined at the end; returns ``(image, traces)``.

    ``luma_only`` runs the matcher once on the luma plane and averages the
    chosen source pixels in every channel.
    """
    cfg = cfg or EngineConfig()
    if img.channels == 1:
        out, trace = inpaint(img, mask, cfg)
        return out, [trace]
    if not luma_only:
        results = [inpaint(plane, mask, cfg) for plane in split_channels(img)]
        return merge_channels([r[0] for r in results]), [r[1] for r in results]
    rgb = img.data.astype(np.int64)
    luma = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    _, trace = inpaint(RasterImage(luma, img.bit_depth), mask, cfg)
    out = img.to_array()
    for p, centers in trace.sources.items():
        rows = [c[0] for c in centers]
        cols = [c[1] for c in centers]
        vals = rgb[rows, cols]
        out[p] = (2 * vals.sum(axis=0) + len(centers)) // (2 * len(centers))
    return RasterImage(out, img.bit_depth), [trace]


def energy_trend(trace: ScanTrace) -> list[tuple[int, float]]:
    return [(t, e) for t, e in enumerate(trace.scan_energies, start=1)]


def write_energy_csv(trace: ScanTrace, fh=None) -> str:
    """Write ``scan,total_e_t`` rows; returns the text when no handle is given."""
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["scan", "total_e_t"])
    for t, e in energy_trend(trace):
        w.writerow([t, repr(float(e))])
    return "" if fh is not None else out.getvalue()


def write_commit_csv(trace: ScanTrace, fh=None) -> str:
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["scan", "row", "col", "value", "e_t", "p_star", "ties"])
    for c in trace.commits:
        w.writerow([c.scan, c.pixel[0], c.pixel[1], c.value, repr(c.e_t), repr(c.p_star), c.tie_count])
    return "" if fh is not None else out.getvalue()


def causal_support(mask: InpaintMask, pixel, spec: PatchSpec) -> np.ndarray:
    """Boolean ``(2L+1)^2`` grid of window cells usable for matching ``pixel``."""
    L = spec.half_width
    M, N = mask.shape
    i, j = pixel
    avail = mask.available
    out = np.zeros((spec.side, spec.side), dtype=bool)
    for a in range(-L, L + 1):
        for b in range(-L, L + 1):
            p, q = i + a, j + b
            if (a, b) != (0, 0) and 0 <= p < M and 0 <= q < N:
                out[a + L, b + L] = avail[p, q]
    return out


def with_overrides(cfg: EngineConfig, **kw) -> EngineConfig:
    return replace(cfg, **kw)
