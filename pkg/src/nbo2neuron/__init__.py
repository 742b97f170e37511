"""NbO2 Mott-memristor spiking neuron simulator and analysis toolkit."""

from .devices import (Branch, DeviceModelError, IVCurve, PiecewiseParams,
                      PiecewiseState, QuasiStaticError, RampSpec,
                      ThermalIMTParams, ThermalIMTState, piecewise_eval,
                      quasistatic_iv_sweep, thermal_conductance,
                      thermal_memristance, thermal_state_derivative)
from .circuit import (IntegrationError, IntegratorControl, NeuronParams,
                      NeuronState, Trace, fixed_point, integrate,
                      neuron_derivatives, simulate_network, warmup_kernels)
from .spikes import (BurstProfile, DetectorConfig, NeedsLongerTrace, Regime,
                     SpikeTrain, classify, detect_spikes, group_bursts)
from .boundaries import (BoundaryError, BoundaryLabel, BoundaryLine,
                         CircuitAnchors, all_boundaries, boundary_a_prime,
                         boundary_b_prime, boundary_c_prime,
                         boundary_residual, boundary_unprimed,
                         compare_boundaries)
from .sweeps import (ActivationCurve, PhaseDiagram, SweepControl,
                     activation_curve, capacitance_study, classify_point,
                     count_range_vs_c1, duty_frequency_study, fit_eu,
                     phase_diagram, refine_transition, region_connected)
from .network import (ChainConfig, Pattern, SynapseBank, burst_chain_config,
                      chain_simulate, perceptron_forward,
                      perceptron_neuron_params, single_spike_chain_config)
from .config import ConfigError, ExperimentConfig, available_presets

__version__ = "0.1.0"
