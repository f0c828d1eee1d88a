"""Multi-view 2D protein rendering and view-ensemble classification."""

from .cnn import NetworkSpec, TrainConfig, default_network_spec, predict, train
from .dataset import DatasetManifest, generate_synthetic_dataset, load_manifest
from .evaluation import FoldPlan, auc_macro_ovr, evaluate, stratified_kfold
from .fusion import EnsembleSpec, ScoreMatrix, average_views, oracle_accuracy, sum_rule_fuse
from .geometry import ribbon_frames, spline_through
from .multiview import (
    OrthoCamera,
    RotationGrid,
    ViewPose,
    fit_camera,
    fit_camera_family,
    pose_grid,
    pose_scene,
    rotation_matrix,
)
from .pdb import ProteinStructure, centroid, infer_bonds, parse_pdb, secondary_structure_of
from .pipeline import RunConfig, render_dataset, run_pipeline
from .raster import RenderConfig, render, write_image
from .representations import ColorScheme, RepresentationType, StyleConfig, build_scene, color_for
from .scene import Cylinder, Scene, Sphere, TriMesh

__version__ = "0.1.0"

__all__ = [
    "ColorScheme",
    "Cylinder",
    "DatasetManifest",
    "EnsembleSpec",
    "FoldPlan",
    "NetworkSpec",
    "OrthoCamera",
    "ProteinStructure",
    "RenderConfig",
    "RepresentationType",
    "RotationGrid",
    "RunConfig",
    "Scene",
    "ScoreMatrix",
    "Sphere",
    "StyleConfig",
    "TrainConfig",
    "TriMesh",
    "ViewPose",
    "auc_macro_ovr",
    "average_views",
    "build_scene",
    "centroid",
    "color_for",
    "default_network_spec",
    "evaluate",
    "fit_camera",
    "fit_camera_family",
    "generate_synthetic_dataset",
    "infer_bonds",
    "load_manifest",
    "oracle_accuracy",
    "parse_pdb",
    "pose_grid",
    "pose_scene",
    "predict",
    "render",
    "render_dataset",
    "ribbon_frames",
    "rotation_matrix",
    "run_pipeline",
    "secondary_structure_of",
    "spline_through",
    "stratified_kfold",
    "sum_rule_fuse",
    "train",
    "write_image",
]
