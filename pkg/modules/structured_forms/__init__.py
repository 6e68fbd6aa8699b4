from .quadratic import *
from .pairs import *
from .thickening import *
from .w_tensor import *
from .generators import *
from .sign_search import *
