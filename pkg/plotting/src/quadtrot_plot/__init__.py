"""Figure rendering for quadtrot telemetry CSV files."""

from .figures import (KINDS, EmptyInput, FigureSpec, SchemaError,
                      contact_runs, read_telemetry, render, render_all)

__version__ = "0.1.0"
