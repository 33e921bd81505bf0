"""
flexsynth: flexible-body dynamics from a linear structural model.

The rigid-body motion embedded in the modal response is extracted every
step and the single-step responses are chained through a sequence of
inertial frames that follow the body.  A Newton-Euler rigid-body solver is
included as a reference.
"""
from .errors import (ConfigError, DegenerateGeometryError, DimensionError, DivergenceError,
                     FlexSynthError, ModelError, ModelFileError, NumericalError, RebaseRequired)
from .factory import (FactoryRecipe, load_model, make_lumped_grid, make_point_set,
                      mass_properties, plate_surrogate, save_model, triangle_body,
                      two_mass_axial)
from .loads import LoadEntry, LoadSpec
from .model import (ModalBasis, ModalState, ModalSystem, StructuralModel, build_modal_system,
                    compute_modes, inverse_modal_expand, modal_expand, modal_state_derivative,
                    project_force, rigid_modes_geometric)
from .rigid import RigidBodyProps, RigidState, rigid_derivative, simulate_rigid
from .rotation import (LogRotation, MarkerTriad, angular_acceleration_h, angular_velocity_g,
                       basis_from_markers, dexp_inv_rate, hat, rebase, relative_velocity_rate,
                       rotation_exp, vee)
from .synthesis import (FrameState, FrameSynthesizer, SimState, Trajectory,
                        extract_embedded_rbm, reconstruct_global, rk4_step, simulate,
                        simulate_fixed_frame, transform_state)

__version__ = "0.1.0"
