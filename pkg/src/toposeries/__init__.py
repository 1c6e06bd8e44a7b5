"""Topological features for one-dimensional time series.

Delay embedding, Vietoris-Rips persistent homology over a prime field and
diagram summaries (Betti curves, silhouettes, persistence entropy).
"""

from .embedding import PointCloud, center, gen_periodic, gen_quasi_periodic, normalize_unit, sliding_window
from .persistence import FieldSpec, PersistenceDiagram, h0_unionfind, reduce
from .represent import (
    SampledCurve,
    betti_curve,
    landscape_fn,
    persistence_entropy,
    silhouette,
    to_point_set,
    torus_rank_check,
)
from .rips import DistanceMatrix, distance_matrix, rips_filtration
from .signal import (
    TimeSeries,
    estimate_delay,
    estimate_dimension,
    fnn_fraction,
    load_series,
    mutual_information,
)

__version__ = "0.1.0"
