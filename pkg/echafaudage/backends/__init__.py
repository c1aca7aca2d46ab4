from .typedef import *
from .matrix import *
from .rand import *
from .common import *
