"""Figure rendering for sparseclifford ensemble outputs."""

from .render import monna_position, render
from .schema import SCHEMAS, SchemaError, load_table

__version__ = "0.1.0"
