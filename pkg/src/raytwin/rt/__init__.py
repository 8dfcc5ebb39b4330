from .config import EngineConfig
from .path import Interaction, PropagationPath, ChannelRealization, TerminalSpec
from .engine import simulate_link, doppler_annotate, LinkContext
from .launch import launch_directions
from .image_method import enumerate_images, refine_specular, ImageMethodError

__all__ = [
    "EngineConfig", "Interaction", "PropagationPath", "ChannelRealization",
    "TerminalSpec", "simulate_link", "doppler_annotate", "LinkContext",
    "launch_directions", "enumerate_images", "refine_specular", "ImageMethodError",
]
