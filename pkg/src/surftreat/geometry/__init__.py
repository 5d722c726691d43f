"""Point-cloud substrate: data model, I/O, indexing, transforms, features."""

from .cloud import (
    Aabb,
    CloudMeta,
    PointCloud,
    RigidTransform,
    SurfaceFrame,
    VIEW_AXIS,
    apply_transform,
    crop_box,
    estimate_rigid_transform,
    pca_frame,
    voxel_downsample,
)
from .features import estimate_normals, mean_point_spacing, median_point_spacing
from .index import SpatialIndex, build_index, knn, point_distances, radius_query
from .io import load_cloud, save_cloud

__all__ = [
    "Aabb",
    "CloudMeta",
    "PointCloud",
    "RigidTransform",
    "SurfaceFrame",
    "VIEW_AXIS",
    "SpatialIndex",
    "apply_transform",
    "build_index",
    "crop_box",
    "estimate_normals",
    "estimate_rigid_transform",
    "knn",
    "load_cloud",
    "mean_point_spacing",
    "median_point_spacing",
    "pca_frame",
    "point_distances",
    "radius_query",
    "save_cloud",
    "voxel_downsample",
]
