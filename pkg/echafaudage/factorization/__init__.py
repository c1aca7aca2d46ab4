from .pca import *
