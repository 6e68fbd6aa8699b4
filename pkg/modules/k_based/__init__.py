from .sparse import *
from .complexes import *
from .duality import *
from .quadratic import *
from .local_dual import *
from .product_pairs import *
from .cylinder import *
from .cover_pair import *
from .assembly import *
