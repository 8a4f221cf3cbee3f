from .costmap import (
    CellState,
    CostMapParams,
    DegeneratePose,
    LidarScan,
    OccupancyCostMap,
    build_cost_map,
    extract_navigable,
)
from .heatmap import WaypointHeatmap, nms_heatmap
from .kmeans import KMeansResult, kmeans, lloyd
from .lidar import LidarWaypointParams, LidarWaypointResult, filter_centers, predict_waypoints_lidar, run_lidar_pipeline

__all__ = [
    "CellState",
    "CostMapParams",
    "DegeneratePose",
    "KMeansResult",
    "LidarScan",
    "LidarWaypointParams",
    "LidarWaypointResult",
    "OccupancyCostMap",
    "WaypointHeatmap",
    "build_cost_map",
    "extract_navigable",
    "filter_centers",
    "kmeans",
    "lloyd",
    "nms_heatmap",
    "predict_waypoints_lidar",
    "run_lidar_pipeline",
]
