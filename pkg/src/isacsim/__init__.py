"""Simulation and learning-based channel estimation for a reflecting-surface
aided joint sensing/communication link.

The package synthesizes the physical channels, simulates the uplink pilot
protocol, provides least-squares baselines, and trains two small neural
networks (dense for the sensing echo, convolutional for the cascaded user
channels) with a self-contained numpy training loop.  ``experiments``
strings these into reproducible studies; ``service`` exposes the online
estimation surface over HTTP.
"""

__version__ = "0.1.0"

from .channel import (ChannelRealization, SystemConfig, draw_comm_channels,
                      draw_realization, draw_sensing_channel, path_loss_linear,
                      steering_vector)
from .dataset import (Dataset, Sample, augment_channel, generate_dataset,
                      load_dataset, preprocess, save_dataset, split)
from .estimators import EstimationReport, ls_comm, ls_sense, nmse
from .experiments import (ExperimentConfig, desk_profile, load_config,
                          paper_profile, run_eval, run_generate, run_sweep_l,
                          run_sweep_m, run_train)
from .neuralnet import (NetworkSpec, TrainConfig, build_ce_dnn, build_se_dnn,
                        forward, infer_channel, init_params, load_params,
                        save_params, train)
from .numerics import RngStream, dft_matrix, fro_norm_sq, pinv_square
from .protocol import (PilotConfig, SensingFrames, UserFrames, build_pilots,
                       receive_sensing, receive_user, sensing_noise_var,
                       user_noise_var)

__all__ = [
    "__version__",
    "SystemConfig", "ChannelRealization", "steering_vector", "path_loss_linear",
    "draw_sensing_channel", "draw_comm_channels", "draw_realization",
    "PilotConfig", "SensingFrames", "UserFrames", "build_pilots",
    "receive_sensing", "receive_user", "sensing_noise_var", "user_noise_var",
    "EstimationReport", "ls_sense", "ls_comm", "nmse",
    "Sample", "Dataset", "generate_dataset", "augment_channel", "preprocess",
    "split", "save_dataset", "load_dataset",
    "NetworkSpec", "TrainConfig", "build_se_dnn", "build_ce_dnn", "init_params",
    "forward", "train", "infer_channel", "save_params", "load_params",
    "RngStream", "dft_matrix", "pinv_square", "fro_norm_sq",
    "ExperimentConfig", "desk_profile", "paper_profile", "load_config",
    "run_generate", "run_train", "run_eval", "run_sweep_l", "run_sweep_m",
]
