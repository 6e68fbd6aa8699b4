from .objects import *
from .banded import *
from .reindex import *
from .flasque import *
from .standard import *
from .complexes import *
from .lift import *
from .domination import *
from .transfer import *
