"""Colour previews of weight maps."""

from __future__ import annotations

from pathlib import Path

from .weightmaps import WeightMap


def plot_weightmap(weight_map: WeightMap, path: str | Path, *, title: str | None = None) -> Path:
    """Save a jet-coloured PNG where weight 1 is deep blue and the peak is red.

    matplotlib is imported on first use so the matchers never pay for it.
    """
    from matplotlib.figure import Figure  # noqa: PLC0415

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    peak = max(float(weight_map.weights.max()), 1.0 + 1e-9)
    figure = Figure(figsize=(max(3.0, weight_map.width / 8.0), max(2.0, weight_map.height / 8.0)))
    axes = figure.add_subplot()
    image = axes.imshow(weight_map.weights, cmap="jet", vmin=1.0, vmax=peak, interpolation="nearest")
    figure.colorbar(image, ax=axes)
    axes.set_title(title or f"{weight_map.kind} {weight_map.width}x{weight_map.height}")
    figure.savefig(target, format="png", dpi=100)
    return target
