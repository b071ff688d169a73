"""Python access to the sdwave finite element and Monte-Carlo routines."""

from ._sdwave import *  # noqa: F401,F403
from ._sdwave import __version__, SdwaveError  # noqa: F401
