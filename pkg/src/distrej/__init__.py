"""Disturbance estimation and rejection for serial robot arms.

The estimator passes joint-angle and joint-torque measurements through
matched third-order filters and reads the lumped disturbance off the
inverse-dynamics residual. It needs no velocity measurements. Computed-torque
control subtracts the estimate. A generalized-momentum observer serves as the
velocity-consuming reference, and a plant simulator plus scenario harness
reproduce the comparison experiments.
"""

from ._backend import BACKEND, available_backends
from .baseline import MomentumObserverState, init_observer, observer_step
from .control import ControlGains, Reference, control_no_comp, control_with_comp
from .dynamics import (
    ArmModel,
    JointState,
    Link,
    bundled_arm,
    coriolis_matrix,
    forward_dynamics,
    gravity_vector,
    inverse_dynamics,
    load_arm,
    mass_matrix,
)
from .errors import (
    ComparisonError,
    ConfigurationError,
    DistRejError,
    DivergenceError,
    InvalidStateError,
    MeasurementError,
    SingularDynamicsError,
    TraceFileError,
)
from .estimator import DisturbanceEstimate, DisturbanceEstimator, estimator_step
from .filters import FilterBank, FilterParams, filter_step, frequency_response, init_filter_bank
from .plant import (
    Actuator,
    FrictionModel,
    InjectedDisturbance,
    PayloadEvent,
    PlantState,
    SensorModel,
    friction_torque,
    init_plant_state,
    plant_step,
    sense,
)
from .scenario import (
    RmseReport,
    ScenarioConfig,
    SimTrace,
    compare_report,
    export_trace,
    load_scenario,
    make_reference,
    run_scenario,
)

__version__ = "0.1.0"
