# Default to development settings
from .development import *  # noqa: F401, F403
