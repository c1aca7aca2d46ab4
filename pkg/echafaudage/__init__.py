from . import backends
from . import math_utils
from . import factorization
from . import cloud
from . import segmentation
from . import registration
from . import deviation
from . import structure
from . import graphdiff
from . import synth
from . import preprocess
from . import config
