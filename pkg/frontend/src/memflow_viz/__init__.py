"""memflow-viz: figures from the solver lab's CSV artifacts.

Reads only the documented CSV schemas (trajectory runs, convergence studies,
bound reports) and renders static images: norm decay with two-sided
envelopes, log-log h-convergence with a fitted slope, and observed-versus-
envelope overlays with violations highlighted.
"""

from .figures import FigureSpec, plot_convergence, plot_decay, plot_envelopes
from .schemas import SchemaError, read_csv_table

__version__ = "0.1.0"
