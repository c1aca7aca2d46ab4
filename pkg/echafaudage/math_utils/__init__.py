from .nearest_neighbors import *
