from .complexes import *
from .hom import *
from .homology import *
from .generators import *
