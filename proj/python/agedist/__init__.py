from ._agedist import *  # noqa: F401,F403
from ._agedist import __doc__  # noqa: F401
