import numpy as np

from fdinpaint.analysis import EquivalenceReport, EquivalenceRow
from fdinpaint.plotting import plot_energy_trend, plot_equivalence, plot_panels


def test_energy_trend_figure(tmp_path):
    path = plot_energy_trend({"full": [3.0, 1.0, 0.5], "content": [3.0, 2.0]}, tmp_path / "sub" / "e.png")
    assert path.exists() and path.stat().st_size > 0


def test_equivalence_figure(tmp_path):
    rows = [EquivalenceRow(s, v, t, 50) for s, t in ((3, 20), (5, 4)) for v in ("ec", "ec+s1")]
    path = plot_equivalence(EquivalenceReport((1, 1), rows), tmp_path / "q.png")
    assert path.stat().st_size > 0


def test_panel_figure(tmp_path):
    gray = np.zeros((8, 8), dtype=np.uint8)
    rgb = np.zeros((8, 8, 3), dtype=np.uint8)
    assert plot_panels({"a": gray, "b": rgb}, tmp_path / "p.png").exists()
    assert plot_panels({"only": gray}, tmp_path / "one.png").exists()
