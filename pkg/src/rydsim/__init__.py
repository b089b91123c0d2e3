"""Rydberg antiblockade gate simulator.

Builds time-dependent Hamiltonians for periodically driven Rydberg atoms,
propagates them (Schrödinger or Lindblad), scores phase gates, and runs the
error campaigns behind each scheme's robustness claims.
"""

from rydsim.campaigns import CampaignResult, SweepSpec, run_campaign
from rydsim.configuration import IntegratorConfig
from rydsim.errors import ConfigError, IntegrationError, RydsimError
from rydsim.gates import GateReport, GateTarget
from rydsim.propagation import Trajectory, evolve_lindblad, evolve_schrodinger
from rydsim.runner import error_report, gate_fidelity, run_scenario, sample_noise, simulate_scenario
from rydsim.schemes import Scheme, multiqubit_scenario, two_qubit_scenario
from rydsim.system import Scenario, assemble_hamiltonian

__all__ = [
    "CampaignResult",
    "ConfigError",
    "GateReport",
    "GateTarget",
    "IntegrationError",
    "IntegratorConfig",
    "RydsimError",
    "Scenario",
    "Scheme",
    "SweepSpec",
    "Trajectory",
    "assemble_hamiltonian",
    "error_report",
    "evolve_lindblad",
    "evolve_schrodinger",
    "gate_fidelity",
    "multiqubit_scenario",
    "run_campaign",
    "run_scenario",
    "sample_noise",
    "simulate_scenario",
    "two_qubit_scenario",
]
