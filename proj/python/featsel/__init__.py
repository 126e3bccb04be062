"""Feature-selection experiment toolkit.

Correlation ranking, weight-magnitude importances and a genetic-algorithm
wrapper over feature masks, evaluated with from-scratch MLP and RBF-SVM
classifiers. The heavy lifting lives in the compiled `_core` module.
"""

from featsel._core import *  # noqa: F401,F403
from featsel._core import __version__  # noqa: F401
