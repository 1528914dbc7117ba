"""Availability of cached initial video segments in device-to-device networks."""

from .availability import (
    Intensity,
    ObjectiveSpec,
    availability_analytic,
    availability_per_content,
    objective_value,
    optimize_bruteforce,
    optimize_greedy,
    prob_eta_nodes,
)
from .caching import (
    CachePlacement,
    capacity_in_segments,
    place_complete_file,
    place_mpco,
    place_random,
    segment_size,
)
from .clustering import NOISE, Clustering, dbscan, dbscan_reference, sweep_epsilon
from .popularity import ZipfModel, sample_rank, top_k_mass, zipf_pmf
from .simulation import ScenarioConfig, run_experiment, run_replication, run_sweep
from .spatial import Area, PointSet, build_index, generate_ppp, generate_uniform, neighbors_within

__version__ = "0.1.0"
