"""GAN-based detector for fake channel-state information."""

from .dataset import CsidDataset, CsidFormatError, load_csid
from .models import GanConfig, GanConfigError, build_discriminator, build_generator
from .score import DetectionScore, calibrate_threshold, evaluate, score_report
from .train import TrainedModels, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"
