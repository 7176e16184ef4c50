"""Goal-oriented IoT deployment planning: KPI models, Monte-Carlo simulation
and epsilon-constrained placement optimisation."""

from .errors import GoiotError, Infeasible
from .kpi import ConfusionCounts, EnergyLedger, HardwareProfile, ModelConfig
from .optimizer import PlacementInstance, Solution, epsilon_sweep, solve_epsilon
from .scenario import Scenario, load_scenario
from .simcore import SimulationPlan, run_plan

__version__ = "0.1.0"
