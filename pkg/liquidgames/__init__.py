from .config import VERSION as __version__  # noqa: F401
from .errors import *  # noqa: F401,F403
from .operators import *  # noqa: F401,F403
from .game import *  # noqa: F401,F403
from .gamefile import *  # noqa: F401,F403
from .equilibrium import *  # noqa: F401,F403
from .networks import *  # noqa: F401,F403
from .metrics import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .testing import ExampleGames  # noqa: F401
