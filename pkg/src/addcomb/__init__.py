"""Exact additive combinatorics on finite abelian groups.

Groups are products of cyclic groups with dense bitset subsets; convolutions
and solution counts are exact integers.  On top of that sit Bohr sets,
almost-period scans, solution-free constructions and searches, the density
increment for ``x + y + z = 3w``, and structure finding in ``A + B + C``.
"""

from .bohr import *  # noqa: F401,F403
from .constructions import *  # noqa: F401,F403
from .equations import *  # noqa: F401,F403
from .errors import GroupMismatchError, NeitherCaseError, NotFoundError, VerificationError  # noqa: F401
from .group import *  # noqa: F401,F403
from .increment import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .parallel import get_threads, set_threads  # noqa: F401
from .periodicity import *  # noqa: F401,F403
from .spectral import *  # noqa: F401,F403
from .structure import *  # noqa: F401,F403

__version__ = "0.1.0"
