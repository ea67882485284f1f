from .plots import PlotError, PlotSpec, geomean, render_grouped_bars, render_sweep

__all__ = ["PlotError", "PlotSpec", "geomean", "render_grouped_bars",
           "render_sweep"]
__version__ = "0.1.0"
