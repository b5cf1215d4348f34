"""Tie counting across support sizes and the chessboard configuration study."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import InpaintMask, PatchSpec, RasterImage, build_training_set
from .energy import CandidateScorer, default_tie_tolerance, normalize, select_ties

# variant name -> highest difference order included in the energy
VARIANTS = {"ec": 0, "ec+s1": 1, "ec+s2": 2, "ec+s3": 3}


def parse_variants(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    if not names:
        raise ValueError("no energy variants given")
    for v in names:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}; choose from {', '.join(VARIANTS)}")
    return names


def parse_sides(text: str) -> list[int]:
    """``start:stop:step`` (stop inclusive) or a comma list of odd sides."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(2)
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad side range {text!r}")
        sides = list(range(parts[0], parts[1] + 1, parts[2]))
    else:
        sides = [int(p) for p in text.split(",") if p.strip()]
    if not sides:
        raise ValueError(f"side range {text!r} is empty")
    for s in sides:
        PatchSpec.from_side(s)
    return sides


def trustability(ties: int, pool: int) -> float:
    """``1 - (ties - 1) / (pool - 1)``; a pool of one candidate is fully trusted."""
    if ties < 1 or ties > pool:
        raise ValueError("tie count must lie in 1..pool")
    if pool == 1:
        return 1.0
    return 1.0 - (ties - 1) / (pool - 1)


@dataclass(frozen=True)
class EquivalenceRow:
    side: int
    variant: str
    ties: int
    pool: int

    @property
    def trustability(self) -> float:
        return trustability(self.ties, self.pool)


@dataclass
class EquivalenceReport:
    probe: tuple
    rows: list[EquivalenceRow] = field(default_factory=list)

    def ties(self, variant: str) -> list[int]:
        return [r.ties for r in self.rows if r.variant == variant]

    def sides(self) -> list[int]:
        return sorted({r.side for r in self.rows})

    def variants(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.variant not in seen:
                seen.append(r.variant)
        return seen

    def lookup(self, side: int, variant: str) -> EquivalenceRow:
        for r in self.rows:
            if r.side == side and r.variant == variant:
                return r
        raise KeyError((side, variant))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["side", "variant", "ties", "trustability"])
        for r in self.rows:
            w.writerow([r.side, r.variant, r.ties, f"{r.trustability:.6f}"])
        return buf.getvalue()


def equivalence_scan(img: RasterImage, probe, sides, variants=("ec", "ec+s1")) -> EquivalenceReport:
    """Count candidates tied at the minimum energy when only ``probe`` is missing.

    Every variant at a given side is scored over the same training set, the
    one valid for the highest difference order requested, so the counts are
    directly comparable.
    """
    if img.channels != 1:
        raise ValueError("equivalence scan needs a single-channel image")
    probe = tuple(int(v) for v in probe)
    if not (0 <= probe[0] < img.height and 0 <= probe[1] < img.width):
        raise ValueError(f"probe {probe} lies outside the image")
    sides = list(sides)
    if not sides:
        raise ValueError("no support sides given")
    variants = list(variants)
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    top = max(max(VARIANTS[v] for v in variants), 1)
    mask = InpaintMask.from_pixels(img.shape, [probe])
    plane = img.to_array()
    report = EquivalenceReport(probe)
    for side in sides:
        spec = PatchSpec.from_side(side)
        tset = build_training_set(mask, spec, top)
        if len(tset) == 0:
            raise ValueError(f"support side {side} leaves no complete window in the image")
        scorer = CandidateScorer(plane, tset, spec, top, bit_depth=img.bit_depth, mask=mask)
        content, per_order, n = scorer.raw_sums(plane, mask, probe)
        for v in variants:
            k = VARIANTS[v]
            e_c, e_s = normalize(content, per_order[:, :k].T if k else [], n, k, img.bit_depth)
            e_t = e_c + e_s
            ties = select_ties(np.asarray(e_t, dtype=np.float64), default_tie_tolerance(k))
            report.rows.append(EquivalenceRow(side, v, len(ties), len(tset)))
    return report


@dataclass(frozen=True)
class ChessboardConfig:
    """The missing pixel sits at raster position ``index`` (1..9) of a 3x3 window."""

    index: int
    center: tuple
    points: tuple
    fills: tuple

    @property
    def name(self) -> str:
        return f"3.{self.index}"

    @property
    def offset(self) -> tuple:
        """Position of the missing pixel relative to the window centre."""
        a, b = divmod(self.index - 1, 3)
        return a - 1, b - 1


def window_matches(board: np.ndarray, center, skip, forbid) -> list[tuple]:
    """Window centres whose 3x3 block equals the one at ``center`` outside ``skip``.

    ``skip`` is the relative cell left out of the comparison; windows that
    contain ``forbid`` are not eligible.
    """
    M, N = board.shape
    ci, cj = center
    ref = board[ci - 1:ci + 2, cj - 1:cj + 2]
    keep = np.ones((3, 3), dtype=bool)
    keep[skip[0] + 1, skip[1] + 1] = False
    views = np.lib.stride_tricks.sliding_window_view(board, (3, 3))
    hit = np.all((views == ref) | ~keep, axis=(2, 3))
    out = []
    for r, c in zip(*np.nonzero(hit)):
        r, c = int(r) + 1, int(c) + 1
        if abs(r - forbid[0]) <= 1 and abs(c - forbid[1]) <= 1:
            continue
        out.append((r, c))
    return out


def chessboard_configs(board: RasterImage, missing) -> list[ChessboardConfig]:
    """Exact 3x3 matches for each of the nine placements of the missing pixel.

    For placement ``3.k`` the window is centred so that ``missing`` lies at
    its k-th cell in raster order.  Candidate points are the board pixels that
    would supply the fill, one per matching window.
    """
    plane = board.to_array()
    M, N = plane.shape
    mi, mj = missing
    configs = []
    for index in range(1, 10):
        a, b = divmod(index - 1, 3)
        off = (a - 1, b - 1)
        center = (mi - off[0], mj - off[1])
        if not (1 <= center[0] < M - 1 and 1 <= center[1] < N - 1):
            raise ValueError(f"placement 3.{index} puts the window outside the board")
        centers = window_matches(plane, center, off, missing)
        points = tuple((r + off[0], c + off[1]) for r, c in centers)
        fills = tuple(int(plane[p]) for p in points)
        configs.append(ChessboardConfig(index, center, points, fills))
    return configs


def locates_position(cfg: ChessboardConfig, cell: int, missing) -> bool:
    """True when every candidate point sits at the missing pixel's place within its cell."""
    want = (missing[0] % cell, missing[1] % cell)
    return bool(cfg.points) and all((r % cell, c % cell) == want for r, c in cfg.points)


def chessboard_csv(configs, cell: int, missing) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config", "candidates", "fill_values", "locates_position"])
    for cfg in configs:
        w.writerow([cfg.name, len(cfg.points), " ".join(str(v) for v in sorted(set(cfg.fills))),
                    int(locates_position(cfg, cell, missing))])
    return buf.getvalue()
