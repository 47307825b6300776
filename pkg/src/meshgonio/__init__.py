"""meshgonio: dihedral angle measurement on 3D surface meshes."""

from .core import (
    MeasurementParams,
    MeasurementResult,
    angle_between_plane_normals,
    measure,
    preview_segmentation,
)
from .linalg import eigen_sym3, pca_min_component, within_ss_split
from .mesh import (
    KnnGraph,
    TriangleMesh,
    build_knn_graph,
    estimate_normals,
    export_colored_mesh,
    load_mesh,
    save_ply,
)
from .patch import Patch, extract_patch_by_point, extract_patch_by_seed
from .session import (
    IovRecord,
    MeasurementRecord,
    Session,
    export_csv,
    iov,
    summarize_iov,
)
from .shapes import (
    WedgeSpec,
    label_accuracy,
    make_curved_ridge,
    make_rugose_wedge,
    make_wedge,
)

__version__ = "0.1.0"
