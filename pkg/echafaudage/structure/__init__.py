from .features import *
from .clustering import *
from .elements import *
from .graph import *
from .extraction import *
