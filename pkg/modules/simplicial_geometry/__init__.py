from .complexes import *
from .dual_cells import *
from .upper_closed import *
from .product import *
from .distance import *
from .covers import *
