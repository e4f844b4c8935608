"""Medical image processing toolkit: geometric images, codecs, filters,
similarity metrics, rigid/FFD registration, optimizers, meshes, and a
slice-rendering service."""

from .image import Image, neighborhood_offsets
from .mesh import (
    Attribute,
    Mesh,
    box_mesh,
    cylinder_mesh,
    ellipsoid_mesh,
    plane_mesh,
    sphere_mesh,
)
from .frame import canonicalize_frame, inplane_axes, plane_frame
from .processing import (
    crop,
    gradient,
    rasterize_ellipse,
    rasterize_polygon,
    resample,
    reslice,
)
from .metrics import MetricContext, ncc_cost, nmi_cost, ssd_cost
from .transforms import (
    FfdState,
    ffd_initialize,
    matrix_to_rigid_params,
    rigid_params_to_matrix,
    transform_ffd,
    transform_rigid,
)
from .optimize import (
    MinimizeResult,
    ObjectiveSpec,
    RansacSpec,
    cg_minimize,
    lbfgs_minimize,
    ransac,
)
from .registration import (
    RegistrationProblem,
    RegistrationResult,
    difference_image,
    register,
)

__version__ = "0.1.0"
