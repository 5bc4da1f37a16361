"""City-size analysis: city extraction, road distances, and the spacing-out
and spatial common-power-law Monte Carlo tests."""

from ._core import (
    City,
    CitySet,
    DistanceMatrix,
    Error,
    __version__,
    build_distance_matrix,
    extract_cities,
    fit_cpl,
    fit_gi,
    gen_hierarchical_system,
    gen_iid_system,
    gen_spaced_system,
    global_hinterlands,
    great_circle_m,
    load_cities_csv,
    load_distance_matrix,
    run_cli,
    spacing_out_test,
    spatial_cpl_test,
    spatial_hierarchy_json,
    voronoi_partition,
)

__all__ = [
    "City",
    "CitySet",
    "DistanceMatrix",
    "Error",
    "__version__",
    "build_distance_matrix",
    "extract_cities",
    "fit_cpl",
    "fit_gi",
    "gen_hierarchical_system",
    "gen_iid_system",
    "gen_spaced_system",
    "global_hinterlands",
    "great_circle_m",
    "load_cities_csv",
    "load_distance_matrix",
    "run_cli",
    "spacing_out_test",
    "spatial_cpl_test",
    "spatial_hierarchy_json",
    "voronoi_partition",
]
